use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::domain::{ParticipantId, Percent, StudyConfig, TeamId};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileCounts {
    pub roster_rows: u64,
    pub hr_valid_rows: u64,
    pub hr_invalid_rows: u64,
    pub survey_rows: u64,
    pub beacon_rows: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DayTruth {
    pub date: NaiveDate,
    pub windows_present: u32,
    pub windows_total: u32,
    pub provisional: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyTruth {
    pub date: NaiveDate,
    pub completed: bool,
}

/// An exact mean as `numer/denom` plus its one-decimal rendering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeanTruth {
    pub numer: u64,
    pub denom: u64,
    pub rendered: String,
    pub below_threshold: bool,
}

impl MeanTruth {
    pub(crate) fn from_percent(p: Percent, threshold: Percent) -> Self {
        MeanTruth {
            numer: *p.ratio().numer(),
            denom: *p.ratio().denom(),
            rendered: p.render(),
            below_threshold: p < threshold,
        }
    }

    pub fn percent(&self) -> Percent {
        Percent::from_ratio(num_rational::Ratio::new(self.numer, self.denom))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeaconTruth {
    pub last_sighted_date: Option<NaiveDate>,
    pub days_since: Option<u32>,
    pub never_sighted: bool,
    pub stale: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParticipantTruth {
    pub participant_id: ParticipantId,
    pub team_id: TeamId,
    pub funding_group: String,
    pub status: String,
    pub timezone: String,
    pub scored: bool,
    pub days_elapsed: u32,
    pub daily: Vec<DayTruth>,
    pub wearable_mean: Option<MeanTruth>,
    pub surveys: Vec<SurveyTruth>,
    pub survey_mean: Option<MeanTruth>,
    pub beacon: Option<BeaconTruth>,
    pub dead_device: Option<(NaiveDate, NaiveDate)>,
    pub sync_delayed: bool,
    pub beacon_failure: bool,
}

/// Expected engine output for a generated cohort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub as_of: NaiveDate,
    pub cadence_secs: u32,
    pub config: StudyConfig,
    pub files: FileCounts,
    pub participants: Vec<ParticipantTruth>,
}

impl Manifest {
    pub fn participant(&self, id: &str) -> Option<&ParticipantTruth> {
        self.participants
            .iter()
            .find(|p| p.participant_id.as_str() == id)
    }

    pub fn scored(&self) -> impl Iterator<Item = &ParticipantTruth> {
        self.participants.iter().filter(|p| p.scored)
    }
}
