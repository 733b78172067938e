use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use csv::{ByteRecord, ReaderBuilder};

use super::timefmt::{parse_date, parse_instant};
use super::{FileKind, HeartRateLog, HrPoint, IngestReport};
use crate::domain::{
    is_weekday, parse_timezone, BeaconSighting, FundingGroup, ParticipantId, RosterEntry,
    StudyConfig, SurveySubmission, TeamId,
};
use crate::error::{Error, Result};

pub const ROSTER_HEADER: &[&str] = &[
    "team_id",
    "participant_id",
    "funding_group",
    "status",
    "start_date",
    "end_date",
    "timezone",
];
pub const HR_HEADER: &[&str] = &["participant_id", "timestamp_utc", "hr_bpm"];
pub const SURVEY_HEADER: &[&str] = &["participant_id", "survey_date", "completed"];
pub const BEACON_HEADER: &[&str] = &["participant_id", "beacon_id", "timestamp_utc"];

/// Drives a CSV reader row by row. Header mismatches and unreadable input
/// are hard errors; a row the callback refuses is counted as rejected.
fn for_each_row<R, F>(
    input: R,
    kind: FileKind,
    report: &mut IngestReport,
    mut on_row: F,
) -> Result<()>
where
    R: Read,
    F: FnMut(u64, &[&str], &mut IngestReport) -> std::result::Result<(), String>,
{
    let expected = kind.header();
    let mut reader = ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(input);
    let found = reader
        .byte_headers()
        .map_err(|e| hard_error(kind, e))?
        .clone();
    if found
        .iter()
        .map(|f| f.trim_ascii())
        .ne(expected.iter().map(|h| h.as_bytes()))
    {
        return Err(Error::Header {
            kind,
            expected: expected.join(","),
            found: found
                .iter()
                .map(String::from_utf8_lossy)
                .collect::<Vec<_>>()
                .join(","),
        });
    }

    let mut record = ByteRecord::new();
    loop {
        match reader.read_byte_record(&mut record) {
            Ok(true) => {}
            Ok(false) => break,
            Err(e) => return Err(hard_error(kind, e)),
        }
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != expected.len() {
            report.reject(
                line,
                format!("expected {} fields, found {}", expected.len(), record.len()),
            );
            continue;
        }
        let mut fields = [""; 8];
        let mut utf8_ok = true;
        for (slot, raw) in fields.iter_mut().zip(record.iter()) {
            match std::str::from_utf8(raw) {
                Ok(s) => *slot = s.trim(),
                Err(_) => {
                    utf8_ok = false;
                    break;
                }
            }
        }
        if !utf8_ok {
            report.reject(line, "field is not valid UTF-8");
            continue;
        }
        if let Err(message) = on_row(line, &fields[..expected.len()], report) {
            report.reject(line, message);
        }
    }
    Ok(())
}

fn hard_error(kind: FileKind, err: csv::Error) -> Error {
    match err.into_kind() {
        csv::ErrorKind::Io(e) => Error::io(format!("reading {kind} input"), e),
        other => Error::Malformed {
            kind,
            message: format!("{other:?}"),
        },
    }
}

/// Reuses the previous row's id when consecutive rows share a participant,
/// which is the common layout of device exports.
#[derive(Default)]
struct IdCache {
    last: Option<ParticipantId>,
}

impl IdCache {
    fn get(&mut self, raw: &str) -> std::result::Result<ParticipantId, String> {
        if let Some(id) = &self.last {
            if id.as_str() == raw {
                return Ok(id.clone());
            }
        }
        let id = ParticipantId::parse(raw).map_err(|e| e.to_string())?;
        self.last = Some(id.clone());
        Ok(id)
    }
}

fn optional_date(
    raw: &str,
    column: &str,
) -> std::result::Result<Option<chrono::NaiveDate>, String> {
    if raw.is_empty() {
        return Ok(None);
    }
    parse_date(raw)
        .map(Some)
        .ok_or_else(|| format!("malformed {column} {raw:?}"))
}

/// Parses an enrollment roster. Entries are returned sorted by participant.
/// A participant listed twice keeps the later row.
pub fn parse_roster<R: Read>(
    input: R,
    cfg: &StudyConfig,
) -> Result<(Vec<RosterEntry>, IngestReport)> {
    let mut report = IngestReport::new(FileKind::Roster);
    let mut entries: BTreeMap<ParticipantId, (u64, RosterEntry)> = BTreeMap::new();
    let mut team_groups: BTreeMap<TeamId, FundingGroup> = BTreeMap::new();

    for_each_row(input, FileKind::Roster, &mut report, |line, f, report| {
        let team_id = TeamId::parse(f[0]).map_err(|e| e.to_string())?;
        let participant_id = ParticipantId::parse(f[1]).map_err(|e| e.to_string())?;
        let entry = RosterEntry {
            team_id,
            participant_id,
            funding_group: f[2].parse()?,
            status: f[3].parse()?,
            start_date: optional_date(f[4], "start_date")?,
            end_date: optional_date(f[5], "end_date")?,
            timezone: parse_timezone(f[6]).map_err(|e| e.to_string())?,
        };
        entry.validate(cfg)?;
        match team_groups.get(&entry.team_id) {
            Some(g) if *g != entry.funding_group => {
                return Err(format!(
                    "team {} already assigned to group {g}, row says {}",
                    entry.team_id, entry.funding_group
                ));
            }
            _ => {
                team_groups.insert(entry.team_id.clone(), entry.funding_group);
            }
        }
        if let Some((prev_line, _)) =
            entries.insert(entry.participant_id.clone(), (line, entry.clone()))
        {
            report.duplicates_skipped += 1;
            report.warn(
                line,
                format!(
                    "participant {} also on line {prev_line}; keeping this row",
                    entry.participant_id
                ),
            );
        } else {
            report.records_accepted += 1;
        }
        Ok(())
    })?;

    Ok((entries.into_values().map(|(_, e)| e).collect(), report))
}

/// Parses a heart-rate log. Out-of-range readings are rejected; a repeated
/// `(participant, timestamp)` keeps its first occurrence.
pub fn parse_heart_rate_log<R: Read>(
    input: R,
    cfg: &StudyConfig,
) -> Result<(HeartRateLog, IngestReport)> {
    let mut report = IngestReport::new(FileKind::HeartRate);
    let mut log = HeartRateLog::new();
    let mut ids = IdCache::default();

    for_each_row(input, FileKind::HeartRate, &mut report, |_, f, report| {
        let participant = ids.get(f[0])?;
        let timestamp =
            parse_instant(f[1]).ok_or_else(|| format!("unparseable timestamp {:?}", f[1]))?;
        let hr_bpm: u16 = f[2]
            .parse()
            .map_err(|_| format!("malformed hr_bpm {:?}", f[2]))?;
        if hr_bpm < cfg.hr_min_bpm || hr_bpm > cfg.hr_max_bpm {
            return Err(format!(
                "hr_bpm {hr_bpm} outside [{}, {}]",
                cfg.hr_min_bpm, cfg.hr_max_bpm
            ));
        }
        log.push_point(&participant, HrPoint { timestamp, hr_bpm });
        report.records_accepted += 1;
        Ok(())
    })?;

    let dropped = log.normalize();
    report.demote_to_duplicates(dropped);
    Ok((log, report))
}

fn parse_bool(raw: &str) -> std::result::Result<bool, String> {
    match raw.to_ascii_lowercase().as_str() {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        _ => Err(format!("malformed completed flag {raw:?}")),
    }
}

/// Parses survey completions. Weekend dates are rejected; repeated
/// `(participant, date)` rows merge by logical OR of `completed`.
pub fn parse_survey_log<R: Read>(input: R) -> Result<(Vec<SurveySubmission>, IngestReport)> {
    let mut report = IngestReport::new(FileKind::Survey);
    let mut merged: BTreeMap<(ParticipantId, chrono::NaiveDate), bool> = BTreeMap::new();
    let mut ids = IdCache::default();

    for_each_row(input, FileKind::Survey, &mut report, |_, f, report| {
        let participant = ids.get(f[0])?;
        let date = parse_date(f[1]).ok_or_else(|| format!("malformed survey_date {:?}", f[1]))?;
        if !is_weekday(date) {
            return Err(format!(
                "weekend survey_date {date}: surveys are weekday-only"
            ));
        }
        let completed = parse_bool(f[2])?;
        match merged.get_mut(&(participant.clone(), date)) {
            Some(existing) => {
                *existing |= completed;
                report.duplicates_skipped += 1;
            }
            None => {
                merged.insert((participant, date), completed);
                report.records_accepted += 1;
            }
        }
        Ok(())
    })?;

    let submissions = merged
        .into_iter()
        .map(
            |((participant_id, survey_date), completed)| SurveySubmission {
                participant_id,
                survey_date,
                completed,
            },
        )
        .collect();
    Ok((submissions, report))
}

/// Parses beacon sightings, dropping exact `(participant, beacon, timestamp)`
/// repeats. Output is sorted.
pub fn parse_beacon_log<R: Read>(input: R) -> Result<(Vec<BeaconSighting>, IngestReport)> {
    let mut report = IngestReport::new(FileKind::Beacon);
    let mut seen: BTreeSet<BeaconSighting> = BTreeSet::new();
    let mut ids = IdCache::default();

    for_each_row(input, FileKind::Beacon, &mut report, |_, f, report| {
        let participant_id = ids.get(f[0])?;
        if f[1].is_empty() {
            return Err("empty beacon_id".into());
        }
        let timestamp =
            parse_instant(f[2]).ok_or_else(|| format!("unparseable timestamp {:?}", f[2]))?;
        if seen.insert(BeaconSighting {
            participant_id,
            beacon_id: f[1].to_owned(),
            timestamp,
        }) {
            report.records_accepted += 1;
        } else {
            report.duplicates_skipped += 1;
        }
        Ok(())
    })?;

    Ok((seen.into_iter().collect(), report))
}
