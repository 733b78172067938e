use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use chrono_tz::Tz;
use serde::Serialize;

use crate::domain::{ParticipantId, StudyConfig, TeamId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum FundingGroup {
    #[serde(rename = "A")]
    GroupA,
    #[serde(rename = "B")]
    GroupB,
}

impl FundingGroup {
    pub const ALL: [FundingGroup; 2] = [FundingGroup::GroupA, FundingGroup::GroupB];

    pub fn as_str(self) -> &'static str {
        match self {
            FundingGroup::GroupA => "A",
            FundingGroup::GroupB => "B",
        }
    }
}

impl FromStr for FundingGroup {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '_' && *c != '-')
            .collect::<String>()
            .to_ascii_uppercase();
        match norm.as_str() {
            "A" | "GROUPA" => Ok(FundingGroup::GroupA),
            "B" | "GROUPB" => Ok(FundingGroup::GroupB),
            _ => Err(format!("unknown funding group {s:?}")),
        }
    }
}

impl fmt::Display for FundingGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyStatus {
    YetToConsent,
    YetToStart,
    Started,
    Completed,
    Withdrawn,
}

impl StudyStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            StudyStatus::YetToConsent => "yet_to_consent",
            StudyStatus::YetToStart => "yet_to_start",
            StudyStatus::Started => "started",
            StudyStatus::Completed => "completed",
            StudyStatus::Withdrawn => "withdrawn",
        }
    }

    /// Participants whose data is expected and scored.
    pub fn is_scored(self) -> bool {
        matches!(self, StudyStatus::Started | StudyStatus::Completed)
    }
}

impl FromStr for StudyStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .trim()
            .chars()
            .map(|c| {
                if c == '-' || c == ' ' {
                    '_'
                } else {
                    c.to_ascii_lowercase()
                }
            })
            .collect();
        match norm.as_str() {
            "yet_to_consent" => Ok(StudyStatus::YetToConsent),
            "yet_to_start" => Ok(StudyStatus::YetToStart),
            "started" | "started_study" => Ok(StudyStatus::Started),
            "completed" => Ok(StudyStatus::Completed),
            "withdrawn" => Ok(StudyStatus::Withdrawn),
            _ => Err(format!("unknown study status {s:?}")),
        }
    }
}

impl fmt::Display for StudyStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One enrolled participant. Carries no personal data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RosterEntry {
    pub participant_id: ParticipantId,
    pub team_id: TeamId,
    pub funding_group: FundingGroup,
    pub status: StudyStatus,
    pub start_date: Option<NaiveDate>,
    pub end_date: Option<NaiveDate>,
    pub timezone: Tz,
}

impl RosterEntry {
    /// Checks the date invariants. Returns a short reason on violation.
    pub fn validate(&self, cfg: &StudyConfig) -> Result<(), String> {
        match (self.start_date, self.end_date) {
            (Some(start), Some(end)) => {
                if end < start {
                    return Err("date order: end_date precedes start_date".into());
                }
                let span = (end - start).num_days() + 1;
                if span != i64::from(cfg.study_length_days) {
                    return Err(format!(
                        "study length: start..end spans {span} days, expected {}",
                        cfg.study_length_days
                    ));
                }
            }
            (None, Some(_)) => return Err("end_date given without start_date".into()),
            _ => {}
        }
        if self.status.is_scored() && (self.start_date.is_none() || self.end_date.is_none()) {
            return Err(format!(
                "status {} requires start_date and end_date",
                self.status
            ));
        }
        Ok(())
    }

    fn study_end(&self, cfg: &StudyConfig) -> Option<NaiveDate> {
        self.end_date.or_else(|| {
            self.start_date
                .map(|s| s + chrono::Duration::days(i64::from(cfg.study_length_days) - 1))
        })
    }

    /// Days completed in the study as of `as_of`, counting the start date as
    /// day 1 and capped at the study length. Zero before the start date and
    /// for participants who have not started.
    pub fn days_completed(&self, as_of: NaiveDate, cfg: &StudyConfig) -> u32 {
        let Some(start) = self.start_date else {
            return 0;
        };
        if matches!(
            self.status,
            StudyStatus::YetToConsent | StudyStatus::YetToStart
        ) {
            return 0;
        }
        let elapsed = (as_of - start).num_days() + 1;
        elapsed.clamp(0, i64::from(cfg.study_length_days)) as u32
    }

    /// In-study dates from the start date through `min(as_of, end_date)`.
    pub fn elapsed_study_dates(&self, as_of: NaiveDate, cfg: &StudyConfig) -> Vec<NaiveDate> {
        let (Some(start), Some(end)) = (self.start_date, self.study_end(cfg)) else {
            return Vec::new();
        };
        let last = as_of.min(end);
        start.iter_days().take_while(|d| *d <= last).collect()
    }
}
