use std::collections::BTreeSet;
use std::time::{Duration as Elapsed, Instant};

use chrono::{DateTime, Datelike, Duration, NaiveDate, TimeZone, Utc, Weekday};
use chrono_tz::Tz;
use compliance_core::compliance::{daily_wearable_compliance, score_windows};
use compliance_core::ingest::HrPoint;
use compliance_core::{
    compute_all, day_windows, BeaconSighting, ComplianceSummary, ComputeContext, FundingGroup,
    HeartRateSample, ParticipantId, Percent, RosterEntry, StoreSnapshot, StudyConfig, StudyStatus,
    TeamId,
};
use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::support::{
    bundle_csv, date, first_instant, oracle_render, oracle_score, oracle_windows, Enrolled,
    Fixture, STUDY_DAYS,
};

const FORMULA_CASES: usize = 1000;
const FORMULA_BUDGET: Elapsed = Elapsed::from_secs(10);
const MONOTONICITY_CASES: usize = 200;

const ZONES: [&str; 7] = [
    "America/Chicago",
    "America/New_York",
    "America/Phoenix",
    "Europe/London",
    "Australia/Sydney",
    "Asia/Kolkata",
    "America/Sao_Paulo",
];

/// Transition days for the zones above, including a midnight gap in
/// Sao Paulo (2018-11-04).
const TRANSITIONS: [&str; 8] = [
    "2023-03-12",
    "2023-11-05",
    "2023-03-26",
    "2023-10-29",
    "2023-04-02",
    "2023-10-01",
    "2018-11-04",
    "2018-02-18",
];

fn random_samples(rng: &mut ChaCha8Rng, day: NaiveDate, tz: Tz) -> Vec<DateTime<Utc>> {
    let start = first_instant(day, tz);
    let end = first_instant(day.succ_opt().unwrap(), tz);
    let span = (end - start).num_seconds() + 7200;
    let n = match rng.gen_range(0..4) {
        0 => rng.gen_range(0..5),
        1 => rng.gen_range(0..60),
        _ => rng.gen_range(0..400),
    };
    (0..n)
        .map(|_| match rng.gen_range(0..6) {
            // Window edges and the day's own bounds.
            0 => start + Duration::minutes(30 * rng.gen_range(-1..52)),
            1 => end - Duration::seconds(rng.gen_range(0..2)),
            _ => start - Duration::hours(1) + Duration::seconds(rng.gen_range(0..span)),
        })
        .collect()
}

fn points(samples: &[DateTime<Utc>]) -> Vec<HrPoint> {
    samples
        .iter()
        .map(|&timestamp| HrPoint {
            timestamp,
            hr_bpm: 70,
        })
        .collect()
}

fn pct(num: u64, den: u64) -> Ratio<u64> {
    Ratio::new(100 * num, den)
}

pub fn formula_fidelity() -> Result<String, String> {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x00F0_F1DE);
    let cfg = StudyConfig::default();
    let id = ParticipantId::parse("T01-P1").unwrap();
    let transitions: Vec<NaiveDate> = TRANSITIONS.iter().map(|d| date(d)).collect();
    let mut irregular = 0;
    for case in 0..FORMULA_CASES {
        let tz: Tz = ZONES.choose(&mut rng).unwrap().parse().unwrap();
        let day = if rng.gen_bool(0.3) {
            *transitions.choose(&mut rng).unwrap()
        } else {
            date("2018-01-01") + Duration::days(rng.gen_range(0..2557))
        };
        let samples = random_samples(&mut rng, day, tz);
        let (present, total) = oracle_score(day, tz, &samples);
        irregular += usize::from(total != 48);
        let rec = daily_wearable_compliance(&score_windows(&id, &points(&samples), day, tz, &cfg));
        let ctx = format!("case {case}: {day} {tz} with {} samples", samples.len());
        ensure_eq!(
            (u64::from(rec.windows_present), u64::from(rec.windows_total)),
            (present, total),
            "{ctx}"
        );
        ensure_eq!(rec.compliance_pct().ratio(), pct(present, total), "{ctx}");
    }

    let tz: Tz = "America/Phoenix".parse().unwrap();
    let day = date("2023-06-14");
    let windows = oracle_windows(day, tz);
    let mut spots = Vec::new();
    for (covered, want) in [(48usize, "100.0"), (0, "0.0"), (36, "75.0")] {
        let samples: Vec<_> = windows
            .iter()
            .take(covered)
            .map(|(a, _)| *a + Duration::minutes(7))
            .collect();
        let rec = daily_wearable_compliance(&score_windows(&id, &points(&samples), day, tz, &cfg));
        ensure_eq!(rec.compliance_pct().render(), want, "{covered}/48");
        ensure_eq!(
            oracle_render(covered as u64, 48),
            want,
            "oracle rendering of {covered}/48"
        );
        spots.push(format!("{covered}/48={want}"));
    }
    let elapsed = started.elapsed();
    ensure!(
        elapsed < FORMULA_BUDGET,
        "took {elapsed:?}, budget {FORMULA_BUDGET:?}"
    );
    Ok(format!(
        "{FORMULA_CASES} random days exact ({irregular} with DST-length days); {}",
        spots.join(", ")
    ))
}

/// Sample at the start of each of the first `covered[i]` windows of day `i`.
fn coverage_rows<'a>(
    id: &'a str,
    start: NaiveDate,
    tz: Tz,
    covered: &[usize],
) -> Vec<(&'a str, DateTime<Utc>, u16)> {
    covered
        .iter()
        .enumerate()
        .flat_map(|(i, &n)| {
            let day = start + Duration::days(i as i64);
            oracle_windows(day, tz)
                .into_iter()
                .take(n)
                .map(move |(a, _)| (id, a + Duration::seconds(90), 64))
        })
        .collect()
}

pub fn threshold_semantics() -> Result<String, String> {
    let cfg = StudyConfig::default();
    let id = ParticipantId::parse("T01-P1").unwrap();
    let at = |k: u64, n: u64| {
        ComplianceSummary::new(id.clone(), &[Percent::from_fraction(k, n)], &cfg).below_threshold
    };
    ensure!(!at(80, 100), "80.0 flagged below threshold");
    ensure!(at(7999, 10000), "79.99 not flagged");
    ensure!(!at(40, 50), "40/50 flagged");

    // Over a full study the finest step below 80 is 2687 of 3360 windows.
    let mut fx = Fixture::new();
    let start = date("2023-01-02");
    let tz: Tz = "America/Phoenix".parse().unwrap();
    fx.roster(&[
        Enrolled {
            team: "T01",
            id: "T01-P1",
            group: "A",
            start,
            tz: "America/Phoenix",
        },
        Enrolled {
            team: "T01",
            id: "T01-P2",
            group: "A",
            start,
            tz: "America/Phoenix",
        },
        Enrolled {
            team: "T01",
            id: "T01-P3",
            group: "A",
            start,
            tz: "America/Phoenix",
        },
    ])?;
    let days = STUDY_DAYS as usize;
    let split = |present: usize| -> Vec<usize> {
        (0..days)
            .map(|i| present / days + usize::from(i < present % days))
            .collect()
    };
    let mut rows = coverage_rows("T01-P1", start, tz, &split(2688));
    rows.extend(coverage_rows("T01-P2", start, tz, &split(2687)));
    fx.heart_rate(&rows)?;
    let weekdays: Vec<NaiveDate> = (0..STUDY_DAYS)
        .map(|i| start + Duration::days(i))
        .filter(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun))
        .collect();
    ensure_eq!(weekdays.len(), 50, "weekdays in study");
    let mut surveys: Vec<(&str, NaiveDate, bool)> = weekdays
        .iter()
        .take(40)
        .map(|d| ("T01-P1", *d, true))
        .collect();
    surveys.extend(weekdays.iter().take(39).map(|d| ("T01-P2", *d, true)));
    fx.surveys(&surveys)?;

    let as_of = start + Duration::days(STUDY_DAYS - 1);
    let ds = fx.compute(as_of);
    let mean = |i: usize| {
        ds.participants[i]
            .wearable_summary
            .mean_daily_pct
            .unwrap()
            .ratio()
    };
    ensure_eq!(mean(0), Ratio::new(80, 1), "exact mean");
    ensure_eq!(mean(1), Ratio::new(2687 * 100, 3360), "nearest-below mean");

    let bundle = fx.export(as_of)?;
    for (file, cases) in [
        (
            "wearable_summary.csv",
            [
                ("T01-P1", "80.0", "false"),
                ("T01-P2", "80.0", "true"),
                ("T01-P3", "0.0", "true"),
            ],
        ),
        (
            "survey_summary.csv",
            [
                ("T01-P1", "80.0", "false"),
                ("T01-P2", "78.0", "true"),
                ("T01-P3", "0.0", "true"),
            ],
        ),
    ] {
        let t = bundle_csv(&bundle, file).by_participant();
        for (pid, mean, below) in cases {
            ensure_eq!(
                (t[pid][4].as_str(), t[pid][5].as_str()),
                (mean, below),
                "{file} {pid}"
            );
        }
    }
    Ok("80.0 passes; 79.99 and 2687/3360 (79.97, shown as 80.0) are below".into())
}

pub fn survey_rules() -> Result<String, String> {
    let mut fx = Fixture::new();
    let start = date("2023-01-04");
    let as_of = date("2023-02-02");
    let people = ["T01-P1", "T01-P2", "T01-P3"];
    fx.roster(
        &people
            .iter()
            .map(|id| Enrolled {
                team: "T01",
                id,
                group: "B",
                start,
                tz: "America/Denver",
            })
            .collect::<Vec<_>>(),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5047);
    let dates: Vec<NaiveDate> = (0..=(as_of - start).num_days())
        .map(|i| start + Duration::days(i))
        .collect();
    let is_weekend = |d: &NaiveDate| matches!(d.weekday(), Weekday::Sat | Weekday::Sun);
    let mut rows = Vec::new();
    let mut weekend_rows = 0;
    // P1: random weekday rows with false-then-true pairs and weekend noise; P2: nothing; P3: all true.
    for d in &dates {
        if is_weekend(d) {
            if rng.gen_bool(0.5) {
                rows.push(("T01-P1", *d, true));
                weekend_rows += 1;
            }
            continue;
        }
        match rng.gen_range(0..4) {
            0 => {}
            1 => rows.push(("T01-P1", *d, false)),
            2 => rows.push(("T01-P1", *d, true)),
            _ => {
                rows.push(("T01-P1", *d, false));
                rows.push(("T01-P1", *d, true));
            }
        }
        rows.push(("T01-P3", *d, true));
    }
    rows.push(("T01-P1", as_of + Duration::days(1), true));
    let report = fx.surveys(&rows)?;
    ensure_eq!(
        report.records_rejected,
        weekend_rows + u64::from(is_weekend(&(as_of + Duration::days(1)))),
        "weekend rows rejected"
    );

    let weekdays: Vec<NaiveDate> = dates.iter().copied().filter(|d| !is_weekend(d)).collect();
    let ds = fx.compute(as_of);
    let bundle = fx.export(as_of)?;
    let summary = bundle_csv(&bundle, "survey_summary.csv").by_participant();
    for (i, pid) in people.iter().enumerate() {
        let done: BTreeSet<NaiveDate> = rows
            .iter()
            .filter(|(p, d, c)| p == pid && *c && !is_weekend(d) && *d <= as_of)
            .map(|(_, d, _)| *d)
            .collect();
        let p = &ds.participants[i];
        ensure_eq!(p.entry.participant_id.as_str(), *pid, "participant order");
        let got: Vec<(NaiveDate, bool)> = p
            .survey_daily
            .iter()
            .map(|r| (r.date, r.completed))
            .collect();
        let want: Vec<(NaiveDate, bool)> =
            weekdays.iter().map(|d| (*d, done.contains(d))).collect();
        ensure_eq!(got, want, "{pid} daily survey records");
        let (k, n) = (done.len() as u64, weekdays.len() as u64);
        ensure_eq!(
            p.survey_summary.mean_daily_pct.map(|m| m.ratio()),
            Some(pct(k, n)),
            "{pid} survey mean"
        );
        ensure_eq!(
            p.survey_summary.days_elapsed,
            n as u32,
            "{pid} weekday count"
        );
        ensure_eq!(
            summary[*pid][4],
            oracle_render(k, n),
            "{pid} rendered survey mean"
        );
    }
    let all_prev = bundle_csv(&bundle, "survey_all_previous.csv");
    ensure!(
        all_prev.rows.iter().all(|r| !is_weekend(&date(&r[1]))),
        "weekend date in survey_all_previous"
    );
    ensure!(
        all_prev
            .rows
            .iter()
            .filter(|r| r[0] == "T01-P2")
            .all(|r| r[2] == "false" && r[3] == "0.0"),
        "absent submissions must be 0.0"
    );
    Ok(format!(
        "{} weekdays exact for 3 participants; {weekend_rows} weekend rows rejected",
        weekdays.len()
    ))
}

pub fn beacon_staleness() -> Result<String, String> {
    let mut fx = Fixture::new();
    let cfg = fx.config.clone();
    let start = date("2023-02-01");
    let as_of = date("2023-03-20");
    let tz_name = "America/Chicago";
    let tz: Tz = tz_name.parse().unwrap();
    let ids: Vec<String> = (0..12)
        .map(|i| format!("T{:02}-P{}", i / 4 + 1, i % 4 + 1))
        .collect();
    let teams: Vec<String> = ids.iter().map(|id| id[..3].to_owned()).collect();
    fx.roster(
        &ids.iter()
            .zip(&teams)
            .map(|(id, team)| Enrolled {
                team,
                id,
                group: "A",
                start,
                tz: tz_name,
            })
            .collect::<Vec<_>>(),
    )?;
    // Participant i (i <= 10) is last seen i days before as_of at 23:50 local,
    // which is already the next day in UTC. The last participant is never seen.
    let mut rows: Vec<(&str, DateTime<Utc>)> = Vec::new();
    for (i, id) in ids.iter().enumerate().take(11) {
        let last = as_of - Duration::days(i as i64);
        let late = tz
            .from_local_datetime(&last.and_hms_opt(23, 50, 0).unwrap())
            .single()
            .unwrap()
            .with_timezone(&Utc);
        rows.push((id, late));
        rows.push((id, late - Duration::days(5)));
        rows.push((
            id,
            first_instant(as_of + Duration::days(2), tz) + Duration::hours(9),
        ));
    }
    fx.beacons(&rows)?;
    let ds = fx.compute(as_of);
    let bundle = fx.export(as_of)?;
    let table = bundle_csv(&bundle, "beacon_last_sighted.csv").by_participant();
    let mut flips = Vec::new();
    for (i, id) in ids.iter().enumerate() {
        let last: Option<NaiveDate> = rows
            .iter()
            .filter(|(p, _)| p == id)
            .map(|(_, t)| t.with_timezone(&tz).date_naive())
            .filter(|d| *d <= as_of)
            .max();
        let since = last.map(|d| (as_of - d).num_days() as u32);
        let p = ds
            .participants
            .iter()
            .find(|p| p.entry.participant_id.as_str() == id)
            .unwrap();
        ensure_eq!(
            (p.beacon.last_sighted_date, p.beacon.days_since),
            (last, since),
            "{id}"
        );
        ensure_eq!(p.beacon.never_sighted(), last.is_none(), "{id} sentinel");
        let stale = since.is_some_and(|d| d > cfg.beacon_stale_days);
        ensure_eq!(p.beacon.is_stale(&cfg), stale, "{id} stale flag");
        if i <= 10 {
            ensure_eq!(since, Some(i as u32), "{id} days since");
        }
        let row = &table[id.as_str()];
        let want = [
            last.map(|d| d.to_string()).unwrap_or_default(),
            since.map(|d| d.to_string()).unwrap_or_default(),
            last.is_none().to_string(),
        ];
        ensure_eq!(row[2..5], want, "{id} exported beacon row");
        flips.push(stale);
    }
    let first_stale = flips.iter().position(|s| *s);
    ensure_eq!(
        first_stale,
        Some(cfg.beacon_stale_days as usize + 1),
        "stale boundary"
    );
    Ok(format!(
        "days_since 0..=10 and never-sighted exact; stale from {} days (> {})",
        cfg.beacon_stale_days + 1,
        cfg.beacon_stale_days
    ))
}

fn figures(snapshot: &StoreSnapshot, ctx: &ComputeContext) -> Vec<Ratio<u64>> {
    let ds = compute_all(snapshot, ctx);
    let p = &ds.participants[0];
    let mut out: Vec<Ratio<u64>> = p
        .wearable_daily
        .iter()
        .map(|r| r.compliance_pct().ratio())
        .collect();
    out.extend(p.survey_daily.iter().map(|r| r.compliance_pct().ratio()));
    out.extend(p.wearable_summary.mean_daily_pct.map(Percent::ratio));
    out.extend(p.survey_summary.mean_daily_pct.map(Percent::ratio));
    out
}

pub fn monotonicity() -> Result<String, String> {
    let cfg = StudyConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0404_0404);
    let id = ParticipantId::parse("T01-P1").unwrap();
    let mut strict = 0;
    for case in 0..MONOTONICITY_CASES {
        let tz: Tz = ZONES.choose(&mut rng).unwrap().parse().unwrap();
        let start = date("2023-01-02") + Duration::days(rng.gen_range(0..360));
        let as_of = start + Duration::days(rng.gen_range(0..12));
        let entry = RosterEntry {
            participant_id: id.clone(),
            team_id: TeamId::parse("T01").unwrap(),
            funding_group: FundingGroup::GroupA,
            status: StudyStatus::Started,
            start_date: Some(start),
            end_date: Some(start + Duration::days(STUDY_DAYS - 1)),
            timezone: tz,
        };
        let ctx = ComputeContext::new(as_of, cfg.clone()).unwrap();
        let days: Vec<NaiveDate> = entry.elapsed_study_dates(as_of, &cfg);
        let instants = |n: usize, rng: &mut ChaCha8Rng| -> Vec<DateTime<Utc>> {
            let mut out = Vec::new();
            for _ in 0..n {
                let day = *days.choose(rng).unwrap();
                out.extend(random_samples(rng, day, tz).into_iter().take(8));
            }
            out
        };
        let base = instants(rng.gen_range(0..4), &mut rng);
        let extra = instants(rng.gen_range(1..4), &mut rng);
        let weekdays: Vec<NaiveDate> = days
            .iter()
            .copied()
            .filter(|d| d.weekday().number_from_monday() <= 5)
            .collect();
        let submissions =
            |n: usize, rng: &mut ChaCha8Rng| -> Vec<compliance_core::SurveySubmission> {
                weekdays
                    .choose_multiple(rng, n)
                    .map(|d| compliance_core::SurveySubmission {
                        participant_id: id.clone(),
                        survey_date: *d,
                        completed: rng.gen_bool(0.7),
                    })
                    .collect()
            };
        let base_surveys = submissions(rng.gen_range(0..=weekdays.len()), &mut rng);
        let extra_surveys = submissions(rng.gen_range(0..=weekdays.len().min(3)), &mut rng);
        let snapshot =
            |hr: &[DateTime<Utc>], surveys: Vec<compliance_core::SurveySubmission>| StoreSnapshot {
                roster: vec![entry.clone()],
                heart_rate: hr
                    .iter()
                    .map(|&timestamp| HeartRateSample {
                        participant_id: id.clone(),
                        timestamp,
                        hr_bpm: 70,
                    })
                    .collect(),
                surveys,
                beacons: Vec::<BeaconSighting>::new(),
            };
        let before = figures(&snapshot(&base, base_surveys.clone()), &ctx);
        let all_hr: Vec<_> = base.iter().chain(&extra).copied().collect();
        let after = figures(
            &snapshot(
                &all_hr,
                base_surveys.into_iter().chain(extra_surveys).collect(),
            ),
            &ctx,
        );
        ensure_eq!(before.len(), after.len(), "case {case}: figure count");
        for (i, (b, a)) in before.iter().zip(&after).enumerate() {
            ensure!(
                a >= b,
                "case {case}: figure {i} fell from {b} to {a} ({tz}, start {start}, as_of {as_of})"
            );
        }
        strict += usize::from(before != after);
    }
    Ok(format!(
        "{MONOTONICITY_CASES} additions, none decreased a figure ({strict} increased one)"
    ))
}

pub fn dst_correctness() -> Result<String, String> {
    let chicago: Tz = "America/Chicago".parse().unwrap();
    for (day, want) in [("2023-03-12", 46), ("2023-11-05", 50), ("2023-06-01", 48)] {
        ensure_eq!(
            day_windows(date(day), chicago).count(),
            want,
            "engine windows on {day}"
        );
        ensure_eq!(
            oracle_windows(date(day), chicago).len(),
            want,
            "oracle windows on {day}"
        );
    }

    let mut fx = Fixture::new();
    let spring = date("2023-03-06");
    let fall = date("2023-10-30");
    fx.roster(&[
        Enrolled {
            team: "T01",
            id: "T01-P1",
            group: "A",
            start: spring,
            tz: "America/Chicago",
        },
        Enrolled {
            team: "T01",
            id: "T01-P2",
            group: "A",
            start: spring,
            tz: "America/Chicago",
        },
        Enrolled {
            team: "T02",
            id: "T02-P1",
            group: "B",
            start: fall,
            tz: "America/Chicago",
        },
        Enrolled {
            team: "T02",
            id: "T02-P2",
            group: "B",
            start: fall,
            tz: "America/Chicago",
        },
    ])?;
    let mut rng = ChaCha8Rng::seed_from_u64(0xD57);
    let mut rows = Vec::new();
    for (full, partial, start) in [("T01-P1", "T01-P2", spring), ("T02-P1", "T02-P2", fall)] {
        for i in 0..14 {
            let day = start + Duration::days(i);
            for (a, b) in oracle_windows(day, chicago) {
                rows.push((full, a + (b - a) / 2, 70));
                if rng.gen_bool(0.6) {
                    rows.push((partial, b - Duration::seconds(1), 70));
                }
            }
        }
    }
    fx.heart_rate(&rows)?;
    let as_of = fall + Duration::days(STUDY_DAYS - 1);
    let bundle = fx.export(as_of)?;
    let t = bundle_csv(&bundle, "wearable_all_previous.csv");
    let mut seen = Vec::new();
    for r in &t.rows {
        let pct: f64 = r[4]
            .parse()
            .map_err(|_| format!("unparsable pct {:?}", r[4]))?;
        ensure!(
            (0.0..=100.0).contains(&pct),
            "{} {} out of range: {}",
            r[0],
            r[1],
            r[4]
        );
        if let Some(want) = match r[1].as_str() {
            "2023-03-12" => Some(46),
            "2023-11-05" => Some(50),
            _ => None,
        } {
            ensure_eq!(r[3], want.to_string(), "{} windows_total on {}", r[0], r[1]);
            if r[0].ends_with("P1") {
                ensure_eq!(
                    (r[2].clone(), r[4].as_str()),
                    (want.to_string(), "100.0"),
                    "{} full day",
                    r[0]
                );
            }
            seen.push(format!("{}@{}={}/{}", r[0], r[1], r[2], r[3]));
        }
    }
    ensure_eq!(seen.len(), 4, "DST rows present");
    Ok(format!(
        "46 and 50 windows in America/Chicago, all values in [0,100]: {}",
        seen.join(" ")
    ))
}
