use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::{Duration, NaiveDate};
use serde::Serialize;

use crate::compliance::{ComplianceDataset, ParticipantCompliance};
use crate::domain::{ComplianceSummary, FundingGroup, Percent, RosterEntry, StudyConfig};
use crate::error::Error;

pub const TIMELINE_FILE: &str = "timeline.csv";
pub const ENROLLMENT_FILE: &str = "enrollment_overview.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TableKind {
    WearableSummary,
    WearableRecentWeek,
    WearableAllPrevious,
    SurveySummary,
    SurveyRecentWeek,
    SurveyAllPrevious,
    BeaconLastSighted,
}

impl TableKind {
    pub const ALL: [TableKind; 7] = [
        TableKind::WearableSummary,
        TableKind::WearableRecentWeek,
        TableKind::WearableAllPrevious,
        TableKind::SurveySummary,
        TableKind::SurveyRecentWeek,
        TableKind::SurveyAllPrevious,
        TableKind::BeaconLastSighted,
    ];

    pub fn slug(self) -> &'static str {
        match self {
            TableKind::WearableSummary => "wearable_summary",
            TableKind::WearableRecentWeek => "wearable_recent_week",
            TableKind::WearableAllPrevious => "wearable_all_previous",
            TableKind::SurveySummary => "survey_summary",
            TableKind::SurveyRecentWeek => "survey_recent_week",
            TableKind::SurveyAllPrevious => "survey_all_previous",
            TableKind::BeaconLastSighted => "beacon_last_sighted",
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.csv", self.slug())
    }
}

impl fmt::Display for TableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for TableKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let norm = s.replace('-', "_");
        TableKind::ALL
            .into_iter()
            .find(|k| k.slug() == norm)
            .ok_or_else(|| Error::UnknownTable(s.to_owned()))
    }
}

/// A rectangular table of rendered cells.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to vec");
        buf
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Table, csv::Error> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(input);
        let columns = r.headers()?.iter().map(str::to_owned).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|r| r.iter().map(str::to_owned).collect()))
            .collect::<Result<_, _>>()?;
        Ok(Table { columns, rows })
    }
}

/// The seven dates ending at `as_of`, oldest first.
pub fn recent_week(as_of: NaiveDate) -> Vec<NaiveDate> {
    (0..7)
        .rev()
        .map(|back| as_of - Duration::days(back))
        .collect()
}

fn summary_row(p: &ParticipantCompliance, s: &ComplianceSummary) -> Vec<String> {
    vec![
        p.entry.participant_id.to_string(),
        p.entry.team_id.to_string(),
        p.entry.funding_group.to_string(),
        s.days_elapsed.to_string(),
        s.mean_daily_pct.map(Percent::render).unwrap_or_default(),
        s.below_threshold.to_string(),
    ]
}

const SUMMARY_COLUMNS: [&str; 6] = [
    "participant_id",
    "team_id",
    "funding_group",
    "days_elapsed",
    "mean_daily_pct",
    "below_threshold",
];

/// One row per participant: a cell per recent-week date (empty outside the
/// participant's elapsed study days) and the first provisional date shown.
fn recent_week_table<F>(ds: &ComplianceDataset, days: &[NaiveDate], cells: F) -> Table
where
    F: Fn(&ParticipantCompliance) -> Vec<(NaiveDate, Percent, bool)>,
{
    let mut columns = vec!["participant_id".to_owned(), "team_id".to_owned()];
    columns.extend(days.iter().map(NaiveDate::to_string));
    columns.push("provisional_from".to_owned());
    let mut table = Table {
        columns,
        rows: Vec::new(),
    };
    for p in &ds.participants {
        let values = cells(p);
        let mut row = vec![
            p.entry.participant_id.to_string(),
            p.entry.team_id.to_string(),
        ];
        for day in days {
            row.push(
                values
                    .iter()
                    .find(|(d, _, _)| d == day)
                    .map(|(_, pct, _)| pct.render())
                    .unwrap_or_default(),
            );
        }
        row.push(
            values
                .iter()
                .filter(|(d, _, prov)| *prov && days.contains(d))
                .map(|(d, _, _)| *d)
                .min()
                .map(|d| d.to_string())
                .unwrap_or_default(),
        );
        table.rows.push(row);
    }
    table
}

pub fn build_table(ds: &ComplianceDataset, kind: TableKind) -> Table {
    let days = recent_week(ds.as_of);
    let week_start = days[0];
    match kind {
        TableKind::WearableSummary => {
            let mut t = Table::new(SUMMARY_COLUMNS);
            t.rows = ds
                .participants
                .iter()
                .map(|p| summary_row(p, &p.wearable_summary))
                .collect();
            t
        }
        TableKind::SurveySummary => {
            let mut t = Table::new(SUMMARY_COLUMNS);
            t.rows = ds
                .participants
                .iter()
                .map(|p| summary_row(p, &p.survey_summary))
                .collect();
            t
        }
        TableKind::WearableRecentWeek => recent_week_table(ds, &days, |p| {
            p.wearable_daily
                .iter()
                .map(|r| (r.date, r.compliance_pct(), r.provisional))
                .collect()
        }),
        TableKind::SurveyRecentWeek => recent_week_table(ds, &days, |p| {
            p.survey_daily
                .iter()
                .map(|r| (r.date, r.compliance_pct(), r.provisional))
                .collect()
        }),
        TableKind::WearableAllPrevious => {
            let mut t = Table::new([
                "participant_id",
                "date",
                "windows_present",
                "windows_total",
                "compliance_pct",
            ]);
            for p in &ds.participants {
                for r in p.wearable_daily.iter().filter(|r| r.date < week_start) {
                    t.rows.push(vec![
                        r.participant_id.to_string(),
                        r.date.to_string(),
                        r.windows_present.to_string(),
                        r.windows_total.to_string(),
                        r.compliance_pct().render(),
                    ]);
                }
            }
            t
        }
        TableKind::SurveyAllPrevious => {
            let mut t = Table::new(["participant_id", "date", "completed", "compliance_pct"]);
            for p in &ds.participants {
                for r in p.survey_daily.iter().filter(|r| r.date < week_start) {
                    t.rows.push(vec![
                        r.participant_id.to_string(),
                        r.date.to_string(),
                        r.completed.to_string(),
                        r.compliance_pct().render(),
                    ]);
                }
            }
            t
        }
        TableKind::BeaconLastSighted => {
            let mut t = Table::new([
                "participant_id",
                "team_id",
                "last_sighted_date",
                "days_since",
                "never_sighted",
            ]);
            for p in &ds.participants {
                let b = &p.beacon;
                t.rows.push(vec![
                    b.participant_id.to_string(),
                    p.entry.team_id.to_string(),
                    b.last_sighted_date
                        .map(|d| d.to_string())
                        .unwrap_or_default(),
                    b.days_since.map(|d| d.to_string()).unwrap_or_default(),
                    b.never_sighted().to_string(),
                ]);
            }
            t
        }
    }
}

fn sorted_roster(roster: &[RosterEntry]) -> Vec<&RosterEntry> {
    let mut v: Vec<&RosterEntry> = roster.iter().collect();
    v.sort_by(|a, b| (&a.team_id, &a.participant_id).cmp(&(&b.team_id, &b.participant_id)));
    v
}

/// Per-participant study timeline with progress through the study.
pub fn build_timeline(roster: &[RosterEntry], as_of: NaiveDate, cfg: &StudyConfig) -> Table {
    let mut t = Table::new([
        "participant_id",
        "team_id",
        "funding_group",
        "start_date",
        "end_date",
        "days_completed",
        "pct_progress",
    ]);
    let date = |d: Option<NaiveDate>| d.map(|d| d.to_string()).unwrap_or_default();
    for e in sorted_roster(roster) {
        let done = e.days_completed(as_of, cfg);
        t.rows.push(vec![
            e.participant_id.to_string(),
            e.team_id.to_string(),
            e.funding_group.to_string(),
            date(e.start_date),
            date(e.end_date),
            done.to_string(),
            Percent::from_fraction(u64::from(done), u64::from(cfg.study_length_days)).render(),
        ]);
    }
    t
}

/// Group, team and status for every roster entry, grouped by funding source.
pub fn build_enrollment_overview(roster: &[RosterEntry]) -> Table {
    let mut t = Table::new(["funding_group", "team_id", "participant_id", "status"]);
    for group in FundingGroup::ALL {
        for e in sorted_roster(roster)
            .into_iter()
            .filter(|e| e.funding_group == group)
        {
            t.rows.push(vec![
                group.to_string(),
                e.team_id.to_string(),
                e.participant_id.to_string(),
                e.status.to_string(),
            ]);
        }
    }
    t
}
