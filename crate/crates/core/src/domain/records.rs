use chrono::{DateTime, NaiveDate, Utc};
use serde::Serialize;

use crate::domain::{ParticipantId, Percent, StudyConfig};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeartRateSample {
    pub participant_id: ParticipantId,
    pub timestamp: DateTime<Utc>,
    pub hr_bpm: u16,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurveySubmission {
    pub participant_id: ParticipantId,
    pub survey_date: NaiveDate,
    pub completed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct BeaconSighting {
    pub participant_id: ParticipantId,
    pub beacon_id: String,
    pub timestamp: DateTime<Utc>,
}

/// Wearable compliance for one participant-day.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DailyComplianceRecord {
    pub participant_id: ParticipantId,
    pub date: NaiveDate,
    pub windows_present: u32,
    pub windows_total: u32,
    pub provisional: bool,
}

impl DailyComplianceRecord {
    pub fn compliance_pct(&self) -> Percent {
        Percent::from_fraction(
            u64::from(self.windows_present),
            u64::from(self.windows_total),
        )
    }
}

/// Survey compliance for one weekday: 100% when completed, 0% otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SurveyComplianceRecord {
    pub participant_id: ParticipantId,
    pub date: NaiveDate,
    pub completed: bool,
    pub provisional: bool,
}

impl SurveyComplianceRecord {
    pub fn compliance_pct(&self) -> Percent {
        if self.completed {
            Percent::hundred()
        } else {
            Percent::zero()
        }
    }
}

/// Overall compliance. `mean_daily_pct` is `None` before the first in-study
/// day; such a summary is never below threshold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComplianceSummary {
    pub participant_id: ParticipantId,
    pub days_elapsed: u32,
    pub mean_daily_pct: Option<Percent>,
    pub below_threshold: bool,
}

impl ComplianceSummary {
    pub fn new(participant_id: ParticipantId, daily: &[Percent], cfg: &StudyConfig) -> Self {
        let mean = Percent::mean(daily.iter().copied());
        ComplianceSummary {
            participant_id,
            days_elapsed: daily.len() as u32,
            below_threshold: mean.is_some_and(|m| m < cfg.threshold()),
            mean_daily_pct: mean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BeaconStatus {
    pub participant_id: ParticipantId,
    pub last_sighted_date: Option<NaiveDate>,
    pub days_since: Option<u32>,
}

impl BeaconStatus {
    pub fn never_sighted(&self) -> bool {
        self.last_sighted_date.is_none()
    }

    /// Not sighted for strictly more than `beacon_stale_days`.
    pub fn is_stale(&self, cfg: &StudyConfig) -> bool {
        self.days_since.is_some_and(|d| d > cfg.beacon_stale_days)
    }
}
