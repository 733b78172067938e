use serde::{Deserialize, Serialize};

use crate::domain::Percent;
use crate::error::Error;

/// Study-wide parameters. Defaults describe a ten-week study scored on
/// half-hour windows with an 80% compliance target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    pub study_length_days: u32,
    pub windows_per_day_nominal: u32,
    pub compliance_threshold_pct: f64,
    pub beacon_stale_days: u32,
    pub sync_lag_days: u32,
    pub hr_min_bpm: u16,
    pub hr_max_bpm: u16,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            study_length_days: 70,
            windows_per_day_nominal: 48,
            compliance_threshold_pct: 80.0,
            beacon_stale_days: 3,
            sync_lag_days: 3,
            hr_min_bpm: 20,
            hr_max_bpm: 250,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<(), Error> {
        let fail = |msg: &str| Err(Error::Config(msg.to_owned()));
        if self.study_length_days == 0 {
            return fail("study_length_days must be positive");
        }
        if self.windows_per_day_nominal == 0 || 1440 % self.windows_per_day_nominal != 0 {
            return fail("windows_per_day_nominal must evenly divide 1440 minutes");
        }
        if !(self.compliance_threshold_pct > 0.0 && self.compliance_threshold_pct <= 100.0) {
            return fail("compliance_threshold_pct must lie in (0, 100]");
        }
        if self.beacon_stale_days == 0 || self.sync_lag_days == 0 {
            return fail("beacon_stale_days and sync_lag_days must be positive");
        }
        if self.hr_min_bpm == 0 || self.hr_min_bpm > self.hr_max_bpm {
            return fail("hr bounds must satisfy 0 < hr_min_bpm <= hr_max_bpm");
        }
        Ok(())
    }

    /// Length of one scoring window.
    pub fn window_length(&self) -> chrono::Duration {
        chrono::Duration::minutes(i64::from(1440 / self.windows_per_day_nominal))
    }

    pub fn threshold(&self) -> Percent {
        Percent::from_decimal(self.compliance_threshold_pct)
    }
}
