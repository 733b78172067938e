//! Raw input parsing and the append-only record store.

mod hr_log;
mod parse;
mod store;
pub(crate) mod timefmt;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

pub use hr_log::{HeartRateLog, HrPoint};
pub use parse::{
    parse_beacon_log, parse_heart_rate_log, parse_roster, parse_survey_log, BEACON_HEADER,
    HR_HEADER, ROSTER_HEADER, SURVEY_HEADER,
};
pub use store::{ManifestEntry, Store, StoreSnapshot};
pub use timefmt::{format_instant, parse_instant};

/// Upper bound on warnings kept verbatim in a report; the rest are counted.
const MAX_WARNINGS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FileKind {
    Roster,
    HeartRate,
    Survey,
    Beacon,
}

impl FileKind {
    pub const ALL: [FileKind; 4] = [
        FileKind::Roster,
        FileKind::HeartRate,
        FileKind::Survey,
        FileKind::Beacon,
    ];

    /// Name of the canonical file holding this kind inside a store.
    pub fn store_file(self) -> &'static str {
        match self {
            FileKind::Roster => "roster.csv",
            FileKind::HeartRate => "hr.csv",
            FileKind::Survey => "surveys.csv",
            FileKind::Beacon => "beacons.csv",
        }
    }

    pub fn header(self) -> &'static [&'static str] {
        match self {
            FileKind::Roster => ROSTER_HEADER,
            FileKind::HeartRate => HR_HEADER,
            FileKind::Survey => SURVEY_HEADER,
            FileKind::Beacon => BEACON_HEADER,
        }
    }
}

impl fmt::Display for FileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FileKind::Roster => "roster",
            FileKind::HeartRate => "heart-rate",
            FileKind::Survey => "survey",
            FileKind::Beacon => "beacon",
        })
    }
}

impl FromStr for FileKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "roster" => Ok(FileKind::Roster),
            "hr" | "heart-rate" | "heart_rate" => Ok(FileKind::HeartRate),
            "survey" | "surveys" => Ok(FileKind::Survey),
            "beacon" | "beacons" => Ok(FileKind::Beacon),
            _ => Err(format!("unknown file kind {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Warning {
    pub line: u64,
    pub message: String,
}

/// Outcome of parsing or ingesting one file.
///
/// `records_accepted + records_rejected + duplicates_skipped` always equals
/// the number of data lines read.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub file_kind: FileKind,
    pub records_accepted: u64,
    pub records_rejected: u64,
    pub duplicates_skipped: u64,
    pub warnings: Vec<Warning>,
    pub warnings_omitted: u64,
    /// True when the file's digest was already in the store manifest.
    pub already_ingested: bool,
}

impl IngestReport {
    pub(crate) fn new(file_kind: FileKind) -> Self {
        IngestReport {
            file_kind,
            records_accepted: 0,
            records_rejected: 0,
            duplicates_skipped: 0,
            warnings: Vec::new(),
            warnings_omitted: 0,
            already_ingested: false,
        }
    }

    pub fn data_lines(&self) -> u64 {
        self.records_accepted + self.records_rejected + self.duplicates_skipped
    }

    pub(crate) fn warn(&mut self, line: u64, message: impl Into<String>) {
        if self.warnings.len() < MAX_WARNINGS {
            self.warnings.push(Warning {
                line,
                message: message.into(),
            });
        } else {
            self.warnings_omitted += 1;
        }
    }

    pub(crate) fn reject(&mut self, line: u64, message: impl Into<String>) {
        self.records_rejected += 1;
        self.warn(line, message);
    }

    /// Moves `n` accepted records into the duplicate column.
    pub(crate) fn demote_to_duplicates(&mut self, n: u64) {
        debug_assert!(n <= self.records_accepted);
        self.records_accepted -= n;
        self.duplicates_skipped += n;
    }
}

/// Warnings shown by `Display`; the report itself keeps more.
const DISPLAYED_WARNINGS: usize = 20;

impl fmt::Display for IngestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} accepted, {} rejected, {} duplicates skipped",
            self.file_kind, self.records_accepted, self.records_rejected, self.duplicates_skipped
        )?;
        if self.already_ingested {
            f.write_str(" (file already ingested)")?;
        }
        for w in self.warnings.iter().take(DISPLAYED_WARNINGS) {
            write!(f, "\n  line {}: {}", w.line, w.message)?;
        }
        let hidden =
            self.warnings.len().saturating_sub(DISPLAYED_WARNINGS) as u64 + self.warnings_omitted;
        if hidden > 0 {
            write!(f, "\n  ... {hidden} more warnings")?;
        }
        Ok(())
    }
}
