//! Fixtures and oracles shared by the criteria. The oracles here use only
//! chrono, chrono-tz and integer arithmetic.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use chrono::{DateTime, Duration, NaiveDate, TimeZone, Utc};
use chrono_tz::Tz;
use compliance_core::export::{export, ExportBundle};
use compliance_core::{
    compute_all, ComplianceDataset, ComputeContext, FileKind, Store, StudyConfig,
};

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

macro_rules! ensure_eq {
    ($left:expr, $right:expr, $($fmt:tt)+) => {{
        let (l, r) = (&$left, &$right);
        if l != r {
            return Err(format!("{}: {:?} != {:?}", format!($($fmt)+), l, r));
        }
    }};
}

pub const STUDY_DAYS: i64 = 70;

pub fn date(s: &str) -> NaiveDate {
    s.parse().expect("valid date literal")
}

/// First instant whose local calendar date in `tz` is `day`, found by a
/// minute scan over UTC.
pub fn first_instant(day: NaiveDate, tz: Tz) -> DateTime<Utc> {
    let mut t = Utc.from_utc_datetime(&day.and_hms_opt(0, 0, 0).unwrap()) - Duration::hours(16);
    while t.with_timezone(&tz).date_naive() < day {
        t += Duration::minutes(1);
    }
    t
}

/// Brute-force window enumeration: consecutive 30-minute intervals from the
/// day's first instant, the last one cut at the next day's first instant.
pub fn oracle_windows(day: NaiveDate, tz: Tz) -> Vec<(DateTime<Utc>, DateTime<Utc>)> {
    let (start, end) = (
        first_instant(day, tz),
        first_instant(day.succ_opt().unwrap(), tz),
    );
    let mut out = Vec::new();
    let mut a = start;
    while a < end {
        let b = (a + Duration::minutes(30)).min(end);
        out.push((a, b));
        a = b;
    }
    out
}

/// `(present, total)` windows for a day.
pub fn oracle_score(day: NaiveDate, tz: Tz, samples: &[DateTime<Utc>]) -> (u64, u64) {
    let windows = oracle_windows(day, tz);
    let present = windows
        .iter()
        .filter(|(a, b)| samples.iter().any(|t| a <= t && t < b))
        .count();
    (present as u64, windows.len() as u64)
}

/// One-decimal rendering, half away from zero, of the percentage `numer / denom`.
pub fn oracle_render_value(numer: u64, denom: u64) -> String {
    let tenths = (20 * numer + denom) / (2 * denom);
    format!("{}.{}", tenths / 10, tenths % 10)
}

/// Rendering of `100 * part / whole`.
pub fn oracle_render(part: u64, whole: u64) -> String {
    oracle_render_value(100 * part, whole)
}

pub fn zulu(t: DateTime<Utc>) -> String {
    t.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

/// A store in a temp dir plus CSV builders for hand-written inputs.
pub struct Fixture {
    pub dir: tempfile::TempDir,
    pub store: Store,
    pub config: StudyConfig,
    files: usize,
}

pub struct Enrolled<'a> {
    pub team: &'a str,
    pub id: &'a str,
    pub group: &'a str,
    pub start: NaiveDate,
    pub tz: &'a str,
}

impl Fixture {
    pub fn new() -> Fixture {
        let dir = tempfile::tempdir().unwrap();
        let config = StudyConfig::default();
        let store = Store::open(dir.path().join("store"), config.clone()).unwrap();
        Fixture {
            dir,
            store,
            config,
            files: 0,
        }
    }

    fn ingest(
        &mut self,
        kind: FileKind,
        body: &str,
    ) -> Result<compliance_core::IngestReport, String> {
        self.files += 1;
        self.store
            .ingest_bytes(kind, &format!("input-{}.csv", self.files), body.as_bytes())
            .map_err(|e| e.to_string())
    }

    pub fn roster(&mut self, people: &[Enrolled<'_>]) -> Result<(), String> {
        let mut csv = String::from(
            "team_id,participant_id,funding_group,status,start_date,end_date,timezone\n",
        );
        for p in people {
            let end = p.start + Duration::days(STUDY_DAYS - 1);
            writeln!(
                csv,
                "{},{},{},started,{},{},{}",
                p.team, p.id, p.group, p.start, end, p.tz
            )
            .unwrap();
        }
        let r = self.ingest(FileKind::Roster, &csv)?;
        ensure_eq!(
            r.records_rejected,
            0,
            "roster rejected rows: {:?}",
            r.warnings
        );
        Ok(())
    }

    pub fn heart_rate(
        &mut self,
        rows: &[(&str, DateTime<Utc>, u16)],
    ) -> Result<compliance_core::IngestReport, String> {
        let mut csv = String::from("participant_id,timestamp_utc,hr_bpm\n");
        for (id, t, bpm) in rows {
            writeln!(csv, "{id},{},{bpm}", zulu(*t)).unwrap();
        }
        self.ingest(FileKind::HeartRate, &csv)
    }

    pub fn surveys(
        &mut self,
        rows: &[(&str, NaiveDate, bool)],
    ) -> Result<compliance_core::IngestReport, String> {
        let mut csv = String::from("participant_id,survey_date,completed\n");
        for (id, d, done) in rows {
            writeln!(csv, "{id},{d},{done}").unwrap();
        }
        self.ingest(FileKind::Survey, &csv)
    }

    pub fn beacons(
        &mut self,
        rows: &[(&str, DateTime<Utc>)],
    ) -> Result<compliance_core::IngestReport, String> {
        let mut csv = String::from("participant_id,beacon_id,timestamp_utc\n");
        for (id, t) in rows {
            writeln!(csv, "{id},BCN-{id},{}", zulu(*t)).unwrap();
        }
        self.ingest(FileKind::Beacon, &csv)
    }

    pub fn compute(&self, as_of: NaiveDate) -> ComplianceDataset {
        let ctx = ComputeContext::new(as_of, self.config.clone()).unwrap();
        compute_all(&self.store.snapshot().unwrap(), &ctx)
    }

    pub fn export(&self, as_of: NaiveDate) -> Result<ExportBundle, String> {
        export(
            &self.compute(as_of),
            &self.dir.path().join(format!("bundle-{as_of}")),
        )
        .map_err(|e| e.to_string())
    }
}

/// A bundle CSV read with the csv crate alone.
#[derive(Debug, Clone)]
pub struct Csv {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn read(path: &Path) -> Csv {
        let mut r =
            csv::Reader::from_path(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let header = r.headers().unwrap().iter().map(str::to_owned).collect();
        let rows = r
            .records()
            .map(|rec| rec.unwrap().iter().map(str::to_owned).collect())
            .collect();
        Csv { header, rows }
    }

    pub fn col(&self, name: &str) -> usize {
        self.header
            .iter()
            .position(|h| h == name)
            .unwrap_or_else(|| panic!("no column {name} in {:?}", self.header))
    }

    /// Rows keyed by the first column.
    pub fn by_participant(&self) -> BTreeMap<String, Vec<String>> {
        self.rows
            .iter()
            .map(|r| (r[0].clone(), r.clone()))
            .collect()
    }
}

pub fn bundle_csv(bundle: &ExportBundle, file: &str) -> Csv {
    Csv::read(&bundle.dir.join(file))
}
