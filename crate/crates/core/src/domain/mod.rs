//! Domain values shared by every stage of the pipeline.

mod calendar;
mod config;
mod ids;
mod percent;
mod records;
mod roster;

pub use calendar::{
    day_windows, day_windows_with, is_weekday, local_date, local_day_start, parse_timezone,
    DayWindows, Window,
};
pub use config::StudyConfig;
pub use ids::{ParticipantId, TeamId};
pub use percent::Percent;
pub use records::{
    BeaconSighting, BeaconStatus, ComplianceSummary, DailyComplianceRecord, HeartRateSample,
    SurveyComplianceRecord, SurveySubmission,
};
pub use roster::{FundingGroup, RosterEntry, StudyStatus};
