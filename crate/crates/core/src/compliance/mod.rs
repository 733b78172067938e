//! Wearable, survey and beacon compliance.
//!
//! Wearable compliance for a day is the share of the day's half-hour windows
//! holding at least one valid heart-rate sample. Survey compliance is 100% on
//! a weekday with a completed survey and 0% otherwise. Overall figures are
//! plain means of the daily figures over the elapsed in-study days (weekdays
//! for surveys), with missing days counted as 0%.

mod engine;

pub use engine::{
    beacon_status, compute_all, daily_survey_compliance, daily_wearable_compliance, is_provisional,
    mark_provisional, overall_survey_compliance, overall_wearable_compliance, score_day,
    score_windows, ComplianceDataset, ComputeContext, Orphan, ParticipantCompliance, Provisional,
    WindowScoreVector,
};
