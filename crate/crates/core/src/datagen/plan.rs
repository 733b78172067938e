use std::io::{self, Write};

use chrono::{Duration, NaiveDate};
use chrono_tz::Tz;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::manifest::{BeaconTruth, DayTruth, Manifest, MeanTruth, ParticipantTruth, SurveyTruth};
use crate::domain::{
    day_windows_with, is_weekday, local_day_start, FundingGroup, ParticipantId, Percent,
    RosterEntry, StudyConfig, StudyStatus, TeamId,
};
use crate::ingest::timefmt::write_instant;

/// Failure modes layered onto an otherwise compliant cohort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Scenario {
    /// Per participant-day chance that the first 16 windows (00:00-08:00) are uncovered.
    pub night_nonwear: f64,
    /// Per participant chance that the most recent `sync_lag_days` have not synced.
    pub sync_delay: f64,
    /// Per window chance of a random gap.
    pub window_dropout: f64,
    /// Participants whose device is dead for `dead_device_days` consecutive days.
    pub dead_devices: u32,
    pub dead_device_days: u32,
    /// Per weekday chance that the survey is completed.
    pub survey_completion: f64,
    /// Per day chance of beacon sightings (weekends use a quarter of it).
    pub beacon_sighting: f64,
    /// Participants whose beacon stops being seen 4-15 days before the report date.
    pub beacon_failures: u32,
    /// Participants whose beacon is never seen.
    pub never_sighted: u32,
    /// Out-of-range heart-rate rows per participant, placed in uncovered windows.
    pub invalid_hr_rows: u32,
    /// Extra teams still in the enrollment pipeline (yet to start or consent).
    pub pipeline_teams: u32,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            night_nonwear: 0.0,
            sync_delay: 0.0,
            window_dropout: 0.0,
            dead_devices: 0,
            dead_device_days: 21,
            survey_completion: 1.0,
            beacon_sighting: 1.0,
            beacon_failures: 0,
            never_sighted: 0,
            invalid_hr_rows: 0,
            pipeline_teams: 0,
        }
    }
}

impl Scenario {
    /// A mix of every failure mode, roughly as messy as a real cohort.
    pub fn realistic() -> Self {
        Scenario {
            night_nonwear: 0.3,
            sync_delay: 0.15,
            window_dropout: 0.04,
            dead_devices: 2,
            dead_device_days: 21,
            survey_completion: 0.85,
            beacon_sighting: 0.9,
            beacon_failures: 3,
            never_sighted: 1,
            invalid_hr_rows: 2,
            pipeline_teams: 2,
        }
    }
}

/// Inputs to [`CohortPlan::new`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSpec {
    pub seed: u64,
    pub num_teams: u32,
    pub first_start: NaiveDate,
    /// Days between consecutive team start dates.
    pub stagger_days: u32,
    /// Report date; defaults to the last scored team's end date.
    pub as_of: Option<NaiveDate>,
    pub cadence_secs: u32,
    pub timezones: Vec<String>,
    pub config: StudyConfig,
    pub scenario: Scenario,
}

impl Default for CohortSpec {
    fn default() -> Self {
        CohortSpec {
            seed: 0,
            num_teams: 15,
            first_start: NaiveDate::from_ymd_opt(2023, 1, 9).expect("valid date"),
            stagger_days: 3,
            as_of: None,
            cadence_secs: 15,
            timezones: [
                "America/New_York",
                "America/Chicago",
                "America/Denver",
                "America/Los_Angeles",
            ]
            .map(String::from)
            .to_vec(),
            config: StudyConfig::default(),
            scenario: Scenario::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DayPlan {
    pub date: NaiveDate,
    pub windows_total: u32,
    /// Indices of windows the wearable covers, ascending.
    pub covered: Vec<u16>,
    /// `Some` on weekdays.
    pub survey_completed: Option<bool>,
    /// Emit a survey row for this weekday (an absent row is a non-completion).
    pub survey_row: bool,
    /// Emit a preceding `false` row that must OR-merge into the completion.
    pub survey_false_first: bool,
    /// Beacon sightings as seconds after local midnight.
    pub beacon_secs: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticipantPlan {
    pub entry: RosterEntry,
    pub beacon_id: String,
    pub days: Vec<DayPlan>,
    pub dead_device: Option<(NaiveDate, NaiveDate)>,
    pub sync_delayed: bool,
    pub beacon_failure: bool,
    pub never_sighted: bool,
    /// Out-of-range heart-rate rows: (timestamp offset in seconds from the
    /// day's local midnight, day index, bpm).
    pub invalid_hr: Vec<(u32, usize, u16)>,
    stream: u64,
}

/// A fully decided synthetic cohort.
#[derive(Debug, Clone, PartialEq)]
pub struct CohortPlan {
    pub spec: CohortSpec,
    pub as_of: NaiveDate,
    pub participants: Vec<ParticipantPlan>,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl CohortPlan {
    pub fn new(spec: &CohortSpec) -> CohortPlan {
        let cfg = &spec.config;
        let len = i64::from(cfg.study_length_days);
        let last_start = spec.first_start
            + Duration::days(
                i64::from(spec.stagger_days) * i64::from(spec.num_teams.saturating_sub(1)),
            );
        let as_of = spec.as_of.unwrap_or(last_start + Duration::days(len - 1));
        let zones: Vec<Tz> = spec
            .timezones
            .iter()
            .map(|z| z.parse().unwrap_or(chrono_tz::UTC))
            .collect();
        let mut rng = rng_for(spec.seed, 0);

        let mut entries = Vec::new();
        let total_teams = spec.num_teams + spec.scenario.pipeline_teams;
        for t in 0..total_teams {
            let team_id = TeamId::parse(&format!("T{:02}", t + 1)).expect("valid team id");
            let size = rng.gen_range(3..=5);
            let group = if rng.gen_bool(0.5) {
                FundingGroup::GroupA
            } else {
                FundingGroup::GroupB
            };
            let tz = zones[t as usize % zones.len()];
            let pipeline = t >= spec.num_teams;
            for m in 0..size {
                let participant_id =
                    ParticipantId::parse(&format!("{team_id}-P{}", m + 1)).expect("valid id");
                let (status, start, end) = if pipeline {
                    if (t - spec.num_teams).is_multiple_of(2) {
                        let start = as_of + Duration::days(7 + i64::from(t - spec.num_teams) * 7);
                        (
                            StudyStatus::YetToStart,
                            Some(start),
                            Some(start + Duration::days(len - 1)),
                        )
                    } else {
                        (StudyStatus::YetToConsent, None, None)
                    }
                } else {
                    let start = spec.first_start
                        + Duration::days(i64::from(spec.stagger_days) * i64::from(t));
                    let end = start + Duration::days(len - 1);
                    let status = if start > as_of {
                        StudyStatus::YetToStart
                    } else if end <= as_of {
                        StudyStatus::Completed
                    } else {
                        StudyStatus::Started
                    };
                    (status, Some(start), Some(end))
                };
                entries.push(RosterEntry {
                    participant_id,
                    team_id: team_id.clone(),
                    funding_group: group,
                    status,
                    start_date: start,
                    end_date: end,
                    timezone: tz,
                });
            }
        }

        let scored: Vec<usize> = (0..entries.len())
            .filter(|i| entries[*i].status.is_scored())
            .collect();
        let pick = |rng: &mut ChaCha8Rng, n: u32| -> Vec<usize> {
            scored.choose_multiple(rng, n as usize).copied().collect()
        };
        let dead = pick(&mut rng, spec.scenario.dead_devices);
        let failing = pick(&mut rng, spec.scenario.beacon_failures);
        let never = pick(&mut rng, spec.scenario.never_sighted);

        let participants = entries
            .into_iter()
            .enumerate()
            .map(|(i, entry)| {
                plan_participant(
                    spec,
                    as_of,
                    entry,
                    i as u64 + 1,
                    dead.contains(&i),
                    failing.contains(&i) && !never.contains(&i),
                    never.contains(&i),
                )
            })
            .collect();

        CohortPlan {
            spec: spec.clone(),
            as_of,
            participants,
        }
    }

    pub fn roster(&self) -> Vec<RosterEntry> {
        self.participants.iter().map(|p| p.entry.clone()).collect()
    }

    pub fn manifest(&self) -> Manifest {
        let cfg = &self.spec.config;
        let participants = self
            .participants
            .iter()
            .map(|p| {
                let e = &p.entry;
                let scored = e.status.is_scored();
                let daily: Vec<DayTruth> = p
                    .days
                    .iter()
                    .map(|d| DayTruth {
                        date: d.date,
                        windows_present: d.covered.len() as u32,
                        windows_total: d.windows_total,
                        provisional: (self.as_of - d.date).num_days()
                            < i64::from(cfg.sync_lag_days),
                    })
                    .collect();
                let surveys: Vec<SurveyTruth> = p
                    .days
                    .iter()
                    .filter_map(|d| {
                        d.survey_completed.map(|c| SurveyTruth {
                            date: d.date,
                            completed: c,
                        })
                    })
                    .collect();
                let wearable_mean = Percent::mean(daily.iter().map(|d| {
                    Percent::from_fraction(u64::from(d.windows_present), u64::from(d.windows_total))
                }))
                .map(|m| MeanTruth::from_percent(m, cfg.threshold()));
                let survey_mean = Percent::mean(surveys.iter().map(|s| {
                    if s.completed {
                        Percent::hundred()
                    } else {
                        Percent::zero()
                    }
                }))
                .map(|m| MeanTruth::from_percent(m, cfg.threshold()));
                let beacon = scored.then(|| {
                    let last = p
                        .days
                        .iter()
                        .rev()
                        .find(|d| !d.beacon_secs.is_empty())
                        .map(|d| d.date);
                    let days_since = last.map(|d| (self.as_of - d).num_days() as u32);
                    BeaconTruth {
                        last_sighted_date: last,
                        days_since,
                        never_sighted: last.is_none(),
                        stale: days_since.is_some_and(|n| n > cfg.beacon_stale_days),
                    }
                });
                ParticipantTruth {
                    participant_id: e.participant_id.clone(),
                    team_id: e.team_id.clone(),
                    funding_group: e.funding_group.to_string(),
                    status: e.status.to_string(),
                    timezone: e.timezone.name().to_owned(),
                    scored,
                    days_elapsed: p.days.len() as u32,
                    daily,
                    wearable_mean,
                    surveys,
                    survey_mean,
                    beacon,
                    dead_device: p.dead_device,
                    sync_delayed: p.sync_delayed,
                    beacon_failure: p.beacon_failure,
                }
            })
            .collect();
        Manifest {
            seed: self.spec.seed,
            as_of: self.as_of,
            cadence_secs: self.spec.cadence_secs,
            config: cfg.clone(),
            files: Default::default(),
            participants,
        }
    }

    pub fn write_roster<W: Write>(&self, w: W) -> io::Result<u64> {
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        out.write_record(crate::ingest::ROSTER_HEADER)?;
        let date = |d: Option<NaiveDate>| d.map(|d| d.to_string()).unwrap_or_default();
        for p in &self.participants {
            let e = &p.entry;
            out.write_record([
                e.team_id.as_str(),
                e.participant_id.as_str(),
                e.funding_group.as_str(),
                e.status.as_str(),
                &date(e.start_date),
                &date(e.end_date),
                e.timezone.name(),
            ])?;
        }
        out.flush()?;
        Ok(self.participants.len() as u64)
    }

    /// Streams heart-rate rows at the configured cadence inside covered
    /// windows only. Returns `(valid_rows, invalid_rows)`.
    pub fn write_heart_rate<W: Write>(&self, mut w: W) -> io::Result<(u64, u64)> {
        writeln!(w, "{}", crate::ingest::HR_HEADER.join(","))?;
        let cadence = Duration::seconds(i64::from(self.spec.cadence_secs.max(1)));
        let window = self.spec.config.window_length();
        let (mut valid, mut invalid) = (0u64, 0u64);
        let mut line = String::with_capacity(48);
        for p in &self.participants {
            let mut rng = rng_for(self.spec.seed ^ 0x5EED_0000_0000_0001, p.stream);
            let id = p.entry.participant_id.as_str();
            for day in &p.days {
                if day.covered.is_empty() {
                    continue;
                }
                let dw = day_windows_with(day.date, p.entry.timezone, window);
                for &idx in &day.covered {
                    let win = dw.windows()[idx as usize];
                    let mut t =
                        win.start + Duration::seconds(rng.gen_range(0..cadence.num_seconds()));
                    while t < win.end {
                        line.clear();
                        line.push_str(id);
                        line.push(',');
                        write_instant(&mut line, t);
                        let bpm: u16 = rng.gen_range(55..=95);
                        let _ = std::fmt::Write::write_fmt(&mut line, format_args!(",{bpm}\n"));
                        w.write_all(line.as_bytes())?;
                        valid += 1;
                        t += cadence;
                    }
                }
            }
            for &(secs, day_idx, bpm) in &p.invalid_hr {
                let start = local_day_start(p.days[day_idx].date, p.entry.timezone);
                line.clear();
                line.push_str(id);
                line.push(',');
                write_instant(&mut line, start + Duration::seconds(i64::from(secs)));
                let _ = std::fmt::Write::write_fmt(&mut line, format_args!(",{bpm}\n"));
                w.write_all(line.as_bytes())?;
                invalid += 1;
            }
        }
        w.flush()?;
        Ok((valid, invalid))
    }

    pub fn write_surveys<W: Write>(&self, mut w: W) -> io::Result<u64> {
        writeln!(w, "{}", crate::ingest::SURVEY_HEADER.join(","))?;
        let mut rows = 0;
        for p in &self.participants {
            for d in &p.days {
                let Some(completed) = d.survey_completed else {
                    continue;
                };
                if d.survey_false_first {
                    writeln!(w, "{},{},false", p.entry.participant_id, d.date)?;
                    rows += 1;
                }
                if d.survey_row {
                    writeln!(w, "{},{},{}", p.entry.participant_id, d.date, completed)?;
                    rows += 1;
                }
            }
        }
        w.flush()?;
        Ok(rows)
    }

    pub fn write_beacons<W: Write>(&self, mut w: W) -> io::Result<u64> {
        writeln!(w, "{}", crate::ingest::BEACON_HEADER.join(","))?;
        let mut rows = 0;
        let mut line = String::with_capacity(48);
        for p in &self.participants {
            for d in &p.days {
                if d.beacon_secs.is_empty() {
                    continue;
                }
                let start = local_day_start(d.date, p.entry.timezone);
                for &secs in &d.beacon_secs {
                    line.clear();
                    line.push_str(p.entry.participant_id.as_str());
                    line.push(',');
                    line.push_str(&p.beacon_id);
                    line.push(',');
                    write_instant(&mut line, start + Duration::seconds(i64::from(secs)));
                    line.push('\n');
                    w.write_all(line.as_bytes())?;
                    rows += 1;
                }
            }
        }
        w.flush()?;
        Ok(rows)
    }
}

fn plan_participant(
    spec: &CohortSpec,
    as_of: NaiveDate,
    entry: RosterEntry,
    stream: u64,
    dead: bool,
    beacon_failure: bool,
    never_sighted: bool,
) -> ParticipantPlan {
    let cfg = &spec.config;
    let sc = &spec.scenario;
    let mut rng = rng_for(spec.seed, stream);
    let dates = if entry.status.is_scored() {
        entry.elapsed_study_dates(as_of, cfg)
    } else {
        Vec::new()
    };
    let dead_device = (dead && !dates.is_empty()).then(|| {
        let span = (sc.dead_device_days as usize).clamp(1, dates.len());
        let first = rng.gen_range(0..=dates.len() - span);
        (dates[first], dates[first + span - 1])
    });
    let sync_delayed = !dates.is_empty() && rng.gen_bool(sc.sync_delay.clamp(0.0, 1.0));
    let beacon_cutoff = beacon_failure.then(|| as_of - Duration::days(rng.gen_range(4..=15)));
    let window = cfg.window_length();

    let mut days = Vec::with_capacity(dates.len());
    for date in dates {
        let total = day_windows_with(date, entry.timezone, window).count();
        let is_dead = dead_device.is_some_and(|(a, b)| a <= date && date <= b);
        let unsynced = sync_delayed && (as_of - date).num_days() < i64::from(cfg.sync_lag_days);
        let night = rng.gen_bool(sc.night_nonwear.clamp(0.0, 1.0));
        let covered: Vec<u16> = (0..total as u16)
            .filter(|i| !(night && *i < 16))
            .filter(|_| !rng.gen_bool(sc.window_dropout.clamp(0.0, 1.0)))
            .filter(|_| !is_dead && !unsynced)
            .collect();

        let weekday = is_weekday(date);
        let survey_completed = weekday.then(|| rng.gen_bool(sc.survey_completion.clamp(0.0, 1.0)));
        let (survey_row, survey_false_first) = match survey_completed {
            Some(true) => (true, rng.gen_bool(0.05)),
            Some(false) => (rng.gen_bool(0.5), false),
            None => (false, false),
        };

        let p_seen = if weekday {
            sc.beacon_sighting
        } else {
            sc.beacon_sighting / 4.0
        };
        let seen = !never_sighted
            && beacon_cutoff.is_none_or(|cut| date <= cut)
            && rng.gen_bool(p_seen.clamp(0.0, 1.0));
        let mut beacon_secs: Vec<u32> = if seen {
            (0..rng.gen_range(1..=4))
                .map(|_| rng.gen_range(8 * 3600..18 * 3600))
                .collect()
        } else {
            Vec::new()
        };
        beacon_secs.sort_unstable();

        days.push(DayPlan {
            date,
            windows_total: total as u32,
            covered,
            survey_completed,
            survey_row,
            survey_false_first,
            beacon_secs,
        });
    }

    // Out-of-range readings are dropped by ingestion, so they only go where
    // accepting them would change the score.
    let mut invalid_hr = Vec::new();
    let slots: Vec<(usize, u16)> = days
        .iter()
        .enumerate()
        .flat_map(|(i, d)| {
            (0..d.windows_total as u16)
                .filter(|w| d.covered.binary_search(w).is_err())
                .map(move |w| (i, w))
        })
        .collect();
    let window_secs = window.num_seconds() as u32;
    for &(day_idx, w) in slots.choose_multiple(&mut rng, sc.invalid_hr_rows as usize) {
        let secs = u32::from(w) * window_secs + rng.gen_range(0..window_secs);
        let bpm = if rng.gen_bool(0.5) {
            0
        } else {
            cfg.hr_max_bpm + 50
        };
        invalid_hr.push((secs, day_idx, bpm));
    }

    ParticipantPlan {
        beacon_id: format!("BCN-{}", entry.participant_id),
        entry,
        days,
        dead_device,
        sync_delayed,
        beacon_failure: beacon_cutoff.is_some(),
        never_sighted,
        invalid_hr,
        stream,
    }
}
