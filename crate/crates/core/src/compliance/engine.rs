use std::collections::BTreeMap;

use chrono::NaiveDate;
use chrono_tz::Tz;
use serde::Serialize;

use crate::domain::{
    day_windows_with, is_weekday, local_date, BeaconSighting, BeaconStatus, ComplianceSummary,
    DailyComplianceRecord, DayWindows, ParticipantId, Percent, RosterEntry, StudyConfig,
    SurveyComplianceRecord, SurveySubmission,
};
use crate::error::Result;
use crate::ingest::{FileKind, HrPoint, StoreSnapshot};

/// The report date and study parameters every computation is pinned to.
#[derive(Debug, Clone, PartialEq)]
pub struct ComputeContext {
    pub as_of: NaiveDate,
    pub config: StudyConfig,
}

impl ComputeContext {
    pub fn new(as_of: NaiveDate, config: StudyConfig) -> Result<Self> {
        config.validate()?;
        Ok(ComputeContext { as_of, config })
    }
}

/// Presence score per window of one participant-day.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WindowScoreVector {
    pub participant_id: ParticipantId,
    pub date: NaiveDate,
    pub scores: Vec<bool>,
}

impl WindowScoreVector {
    pub fn present(&self) -> u32 {
        self.scores.iter().filter(|s| **s).count() as u32
    }
}

/// Scores one day's windows. Samples may be in any order and may include
/// samples from other days; those are ignored.
pub fn score_day(
    participant_id: &ParticipantId,
    day: &DayWindows,
    samples: &[HrPoint],
) -> WindowScoreVector {
    let mut scores = vec![false; day.count()];
    for s in samples {
        if let Some(i) = day.index_of(s.timestamp) {
            scores[i] = true;
        }
    }
    WindowScoreVector {
        participant_id: participant_id.clone(),
        date: day.date(),
        scores,
    }
}

pub fn score_windows(
    participant_id: &ParticipantId,
    samples: &[HrPoint],
    date: NaiveDate,
    tz: Tz,
    cfg: &StudyConfig,
) -> WindowScoreVector {
    score_day(
        participant_id,
        &day_windows_with(date, tz, cfg.window_length()),
        samples,
    )
}

pub fn daily_wearable_compliance(v: &WindowScoreVector) -> DailyComplianceRecord {
    DailyComplianceRecord {
        participant_id: v.participant_id.clone(),
        date: v.date,
        windows_present: v.present(),
        windows_total: v.scores.len() as u32,
        provisional: false,
    }
}

/// Mean over every elapsed in-study date; dates without a record count as 0%.
pub fn overall_wearable_compliance(
    records: &[DailyComplianceRecord],
    entry: &RosterEntry,
    ctx: &ComputeContext,
) -> ComplianceSummary {
    let by_date: BTreeMap<NaiveDate, Percent> = records
        .iter()
        .filter(|r| r.participant_id == entry.participant_id)
        .map(|r| (r.date, r.compliance_pct()))
        .collect();
    let daily: Vec<Percent> = entry
        .elapsed_study_dates(ctx.as_of, &ctx.config)
        .into_iter()
        .map(|d| by_date.get(&d).copied().unwrap_or_else(Percent::zero))
        .collect();
    ComplianceSummary::new(entry.participant_id.clone(), &daily, &ctx.config)
}

/// One record per elapsed in-study weekday. Absence of a submission is
/// non-completion.
pub fn daily_survey_compliance(
    submissions: &[SurveySubmission],
    entry: &RosterEntry,
    ctx: &ComputeContext,
) -> Vec<SurveyComplianceRecord> {
    let completed: std::collections::BTreeSet<NaiveDate> = submissions
        .iter()
        .filter(|s| s.participant_id == entry.participant_id && s.completed)
        .map(|s| s.survey_date)
        .collect();
    entry
        .elapsed_study_dates(ctx.as_of, &ctx.config)
        .into_iter()
        .filter(|d| is_weekday(*d))
        .map(|date| SurveyComplianceRecord {
            participant_id: entry.participant_id.clone(),
            date,
            completed: completed.contains(&date),
            provisional: false,
        })
        .collect()
}

/// Mean over elapsed in-study weekdays only.
pub fn overall_survey_compliance(
    records: &[SurveyComplianceRecord],
    entry: &RosterEntry,
    ctx: &ComputeContext,
) -> ComplianceSummary {
    let by_date: BTreeMap<NaiveDate, Percent> = records
        .iter()
        .filter(|r| r.participant_id == entry.participant_id)
        .map(|r| (r.date, r.compliance_pct()))
        .collect();
    let daily: Vec<Percent> = entry
        .elapsed_study_dates(ctx.as_of, &ctx.config)
        .into_iter()
        .filter(|d| is_weekday(*d))
        .map(|d| by_date.get(&d).copied().unwrap_or_else(Percent::zero))
        .collect();
    ComplianceSummary::new(entry.participant_id.clone(), &daily, &ctx.config)
}

/// Latest sighting on or before the report date, as a local calendar date.
pub fn beacon_status(
    sightings: &[BeaconSighting],
    entry: &RosterEntry,
    ctx: &ComputeContext,
) -> BeaconStatus {
    let last = sightings
        .iter()
        .filter(|s| s.participant_id == entry.participant_id)
        .map(|s| local_date(s.timestamp, entry.timezone))
        .filter(|d| *d <= ctx.as_of)
        .max();
    BeaconStatus {
        participant_id: entry.participant_id.clone(),
        last_sighted_date: last,
        days_since: last.map(|d| (ctx.as_of - d).num_days() as u32),
    }
}

/// Recent days may still be missing data that has not synced yet.
pub fn is_provisional(date: NaiveDate, ctx: &ComputeContext) -> bool {
    (ctx.as_of - date).num_days() < i64::from(ctx.config.sync_lag_days)
}

pub trait Provisional {
    fn date(&self) -> NaiveDate;
    fn set_provisional(&mut self, provisional: bool);
}

impl Provisional for DailyComplianceRecord {
    fn date(&self) -> NaiveDate {
        self.date
    }
    fn set_provisional(&mut self, provisional: bool) {
        self.provisional = provisional;
    }
}

impl Provisional for SurveyComplianceRecord {
    fn date(&self) -> NaiveDate {
        self.date
    }
    fn set_provisional(&mut self, provisional: bool) {
        self.provisional = provisional;
    }
}

pub fn mark_provisional<R: Provisional>(mut record: R, ctx: &ComputeContext) -> R {
    let flag = is_provisional(record.date(), ctx);
    record.set_provisional(flag);
    record
}

/// Records that reference a participant missing from the roster.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Orphan {
    pub participant_id: ParticipantId,
    pub file_kind: FileKind,
    pub records: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParticipantCompliance {
    #[serde(skip)]
    pub entry: RosterEntry,
    pub window_scores: Vec<WindowScoreVector>,
    pub wearable_daily: Vec<DailyComplianceRecord>,
    pub wearable_summary: ComplianceSummary,
    pub survey_daily: Vec<SurveyComplianceRecord>,
    pub survey_summary: ComplianceSummary,
    pub beacon: BeaconStatus,
}

/// Every computed figure for one report date.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplianceDataset {
    pub as_of: NaiveDate,
    pub config: StudyConfig,
    /// Whole roster ordered by team then participant.
    pub roster: Vec<RosterEntry>,
    /// Started and completed participants, in roster order.
    pub participants: Vec<ParticipantCompliance>,
    pub orphans: Vec<Orphan>,
}

impl ComplianceDataset {
    pub fn participant(&self, id: &ParticipantId) -> Option<&ParticipantCompliance> {
        self.participants
            .iter()
            .find(|p| &p.entry.participant_id == id)
    }
}

fn compute_participant(
    entry: &RosterEntry,
    series: &[HrPoint],
    surveys: &[SurveySubmission],
    sightings: &[BeaconSighting],
    ctx: &ComputeContext,
) -> ParticipantCompliance {
    let window = ctx.config.window_length();
    let mut window_scores = Vec::new();
    let mut wearable_daily = Vec::new();
    for date in entry.elapsed_study_dates(ctx.as_of, &ctx.config) {
        let day = day_windows_with(date, entry.timezone, window);
        let lo = series.partition_point(|p| p.timestamp < day.day_start());
        let hi = series.partition_point(|p| p.timestamp < day.day_end());
        let scores = score_day(&entry.participant_id, &day, &series[lo..hi]);
        wearable_daily.push(mark_provisional(daily_wearable_compliance(&scores), ctx));
        window_scores.push(scores);
    }
    let survey_daily: Vec<_> = daily_survey_compliance(surveys, entry, ctx)
        .into_iter()
        .map(|r| mark_provisional(r, ctx))
        .collect();
    ParticipantCompliance {
        wearable_summary: overall_wearable_compliance(&wearable_daily, entry, ctx),
        survey_summary: overall_survey_compliance(&survey_daily, entry, ctx),
        beacon: beacon_status(sightings, entry, ctx),
        entry: entry.clone(),
        window_scores,
        wearable_daily,
        survey_daily,
    }
}

/// Computes the full dataset. A pure function of the snapshot and context.
pub fn compute_all(snapshot: &StoreSnapshot, ctx: &ComputeContext) -> ComplianceDataset {
    let mut roster = snapshot.roster.clone();
    roster.sort_by(|a, b| (&a.team_id, &a.participant_id).cmp(&(&b.team_id, &b.participant_id)));

    let mut surveys: BTreeMap<&ParticipantId, Vec<SurveySubmission>> = BTreeMap::new();
    for s in &snapshot.surveys {
        surveys
            .entry(&s.participant_id)
            .or_default()
            .push(s.clone());
    }
    let mut beacons: BTreeMap<&ParticipantId, Vec<BeaconSighting>> = BTreeMap::new();
    for s in &snapshot.beacons {
        beacons
            .entry(&s.participant_id)
            .or_default()
            .push(s.clone());
    }

    let known: std::collections::BTreeSet<&ParticipantId> =
        roster.iter().map(|e| &e.participant_id).collect();
    let mut orphans = Vec::new();
    for (id, series) in snapshot.heart_rate.iter() {
        if !known.contains(id) {
            orphans.push(Orphan {
                participant_id: id.clone(),
                file_kind: FileKind::HeartRate,
                records: series.len() as u64,
            });
        }
    }
    for (kind, counts) in [
        (
            FileKind::Survey,
            surveys
                .iter()
                .map(|(k, v)| (*k, v.len()))
                .collect::<Vec<_>>(),
        ),
        (
            FileKind::Beacon,
            beacons.iter().map(|(k, v)| (*k, v.len())).collect(),
        ),
    ] {
        for (id, n) in counts {
            if !known.contains(id) {
                orphans.push(Orphan {
                    participant_id: id.clone(),
                    file_kind: kind,
                    records: n as u64,
                });
            }
        }
    }
    if !orphans.is_empty() {
        tracing::warn!(
            count = orphans.len(),
            "records reference participants missing from the roster"
        );
    }

    let participants = roster
        .iter()
        .filter(|e| e.status.is_scored())
        .map(|e| {
            let id = &e.participant_id;
            compute_participant(
                e,
                snapshot.heart_rate.series(id),
                surveys.get(id).map_or(&[], Vec::as_slice),
                beacons.get(id).map_or(&[], Vec::as_slice),
                ctx,
            )
        })
        .collect();

    ComplianceDataset {
        as_of: ctx.as_of,
        config: ctx.config.clone(),
        roster,
        participants,
        orphans,
    }
}
