use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::Path;

use chrono::{NaiveDate, Utc};
use compliance_core::datagen::{generate, CohortPlan, CohortSpec, Scenario};
use compliance_core::export::{export, ExportBundle, Table, TableKind};
use compliance_core::{
    compute_all, parse_timezone, ComputeContext, Error, FileKind, Store, StudyConfig,
};
use compliance_server::{ColorBins, ServiceConfig};
use serde::Deserialize;

use crate::args::{
    AsOfArgs, CheckArgs, Cli, Command, ComputeArgs, ExportArgs, IngestArgs, ServeArgs, SimulateArgs,
};

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub const DATA: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const IO: u8 = 3;

    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: Self::USAGE,
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> Self {
        Failure {
            code: Self::IO,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Config(_) | Error::InvalidTimezone(_) | Error::UnknownTable(_) => Failure::USAGE,
            e if e.is_io() => Failure::IO,
            _ => Failure::DATA,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<(), Failure>;

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ConfigFile {
    study: StudyConfig,
    bins: ColorBins,
}

fn load_config(path: Option<&Path>) -> Result<ConfigFile, Failure> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::io(format!("reading {}: {e}", path.display())))?;
    let cfg: ConfigFile = toml::from_str(&text)
        .map_err(|e| Failure::usage(format!("invalid config {}: {e}", path.display())))?;
    cfg.study.validate()?;
    cfg.bins.validate().map_err(Failure::usage)?;
    Ok(cfg)
}

pub fn run(cli: Cli) -> Outcome {
    let config = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Ingest(a) => ingest(a, config.study),
        Command::Compute(a) => compute(a, config.study),
        Command::Export(a) => export_bundle(a, config.study),
        Command::Check(a) => check(a, &config.study),
        Command::Serve(a) => serve(a, config.bins),
        Command::Simulate(a) => simulate(a, config.study),
    }
}

fn stdout() -> std::io::StdoutLock<'static> {
    std::io::stdout().lock()
}

fn print(text: std::fmt::Arguments<'_>) -> Outcome {
    writeln!(stdout(), "{text}").map_err(|e| Failure::io(format!("writing output: {e}")))
}

fn ingest(a: IngestArgs, study: StudyConfig) -> Outcome {
    let mut inputs: Vec<(FileKind, &Path)> = Vec::new();
    inputs.extend(a.roster.as_deref().map(|p| (FileKind::Roster, p)));
    inputs.extend(a.hr.iter().map(|p| (FileKind::HeartRate, p.as_path())));
    inputs.extend(a.surveys.iter().map(|p| (FileKind::Survey, p.as_path())));
    inputs.extend(a.beacons.iter().map(|p| (FileKind::Beacon, p.as_path())));
    if inputs.is_empty() {
        return Err(Failure::usage(
            "nothing to ingest; pass --roster, --hr, --surveys or --beacons",
        ));
    }
    if let Some((_, missing)) = inputs.iter().find(|(_, p)| !p.is_file()) {
        return Err(Failure::io(format!(
            "{} is not a readable file",
            missing.display()
        )));
    }
    let store = Store::open(&a.store, study)?;
    for (kind, path) in inputs {
        let report = store.ingest_file(kind, path)?;
        print(format_args!("{}: {report}", path.display()))?;
    }
    Ok(())
}

fn resolve_as_of(a: &AsOfArgs) -> Result<NaiveDate, Failure> {
    let tz = parse_timezone(&a.tz)?;
    Ok(a.as_of
        .unwrap_or_else(|| Utc::now().with_timezone(&tz).date_naive()))
}

fn open_existing(dir: &Path, study: StudyConfig) -> Result<Store, Failure> {
    if !dir.is_dir() {
        return Err(Failure::io(format!(
            "store {} does not exist",
            dir.display()
        )));
    }
    Ok(Store::open(dir, study)?)
}

fn compute(a: ComputeArgs, study: StudyConfig) -> Outcome {
    let as_of = resolve_as_of(&a.as_of)?;
    let ctx = ComputeContext::new(as_of, study.clone())?;
    let ds = compute_all(&open_existing(&a.store, study)?.snapshot()?, &ctx);
    let mut out = stdout();
    let w = |out: &mut std::io::StdoutLock, line: String| {
        writeln!(out, "{line}").map_err(|e| Failure::io(format!("writing output: {e}")))
    };
    w(
        &mut out,
        format!(
            "as of {as_of}: {} scored participants",
            ds.participants.len()
        ),
    )?;
    w(
        &mut out,
        format!(
            "{:<12} {:<6} {:>8} {:>8} {:>12}",
            "participant", "team", "wearable", "survey", "beacon_days"
        ),
    )?;
    let render =
        |p: Option<compliance_core::Percent>| p.map(|p| p.render()).unwrap_or_else(|| "-".into());
    for p in &ds.participants {
        w(
            &mut out,
            format!(
                "{:<12} {:<6} {:>8} {:>8} {:>12}",
                p.entry.participant_id.as_str(),
                p.entry.team_id.as_str(),
                render(p.wearable_summary.mean_daily_pct),
                render(p.survey_summary.mean_daily_pct),
                p.beacon
                    .days_since
                    .map(|d| d.to_string())
                    .unwrap_or_else(|| "never".into()),
            ),
        )?;
    }
    for o in &ds.orphans {
        w(
            &mut out,
            format!(
                "warning: {} {} records for {} not on the roster",
                o.records, o.file_kind, o.participant_id
            ),
        )?;
    }
    Ok(())
}

fn export_bundle(a: ExportArgs, study: StudyConfig) -> Outcome {
    let as_of = resolve_as_of(&a.as_of)?;
    let ctx = ComputeContext::new(as_of, study.clone())?;
    let ds = compute_all(&open_existing(&a.store, study)?.snapshot()?, &ctx);
    let bundle = export(&ds, &a.out)?;
    print(format_args!(
        "wrote bundle for {} to {}",
        bundle.generated_at,
        bundle.dir.display()
    ))?;
    print(format_args!("digest {}", bundle.digest()?))
}

fn column(t: &Table, kind: TableKind, name: &str) -> Result<usize, Failure> {
    t.column(name).ok_or_else(|| Failure {
        code: Failure::DATA,
        message: format!("{} has no {name} column", kind.file_name()),
    })
}

/// Participants whose study period includes the bundle date; nobody else
/// can be nudged.
fn active_participants(bundle: &ExportBundle) -> Result<BTreeSet<String>, Failure> {
    let t = bundle.read_timeline()?;
    let col = |name: &str| {
        t.column(name).ok_or_else(|| Failure {
            code: Failure::DATA,
            message: format!("timeline has no {name} column"),
        })
    };
    let (pid, start, end) = (col("participant_id")?, col("start_date")?, col("end_date")?);
    let date = |s: &str| s.parse::<NaiveDate>().ok();
    Ok(t.rows
        .iter()
        .filter(|r| {
            date(&r[start]).is_some_and(|s| s <= bundle.generated_at)
                && date(&r[end]).is_none_or(|e| bundle.generated_at <= e)
        })
        .map(|r| r[pid].clone())
        .collect())
}

fn check(a: CheckArgs, study: &StudyConfig) -> Outcome {
    let stale_days = a.stale_days.unwrap_or(study.beacon_stale_days);
    let bundle = ExportBundle::open(&a.bundle)?;
    let active = active_participants(&bundle)?;
    let mut shortlist: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (kind, label) in [
        (TableKind::WearableSummary, "wearable"),
        (TableKind::SurveySummary, "survey"),
    ] {
        let t = bundle.read_table(kind)?;
        let (pid, mean, below) = (
            column(&t, kind, "participant_id")?,
            column(&t, kind, "mean_daily_pct")?,
            column(&t, kind, "below_threshold")?,
        );
        for r in t
            .rows
            .iter()
            .filter(|r| r[below] == "true" && active.contains(&r[pid]))
        {
            shortlist
                .entry(r[pid].clone())
                .or_default()
                .push(format!("{label} {}", r[mean]));
        }
    }
    let kind = TableKind::BeaconLastSighted;
    let t = bundle.read_table(kind)?;
    let (pid, last, since, never) = (
        column(&t, kind, "participant_id")?,
        column(&t, kind, "last_sighted_date")?,
        column(&t, kind, "days_since")?,
        column(&t, kind, "never_sighted")?,
    );
    for r in t.rows.iter().filter(|r| active.contains(&r[pid])) {
        if r[never] == "true" {
            shortlist
                .entry(r[pid].clone())
                .or_default()
                .push("beacon never sighted".into());
        } else if r[since].parse::<u32>().is_ok_and(|d| d > stale_days) {
            shortlist.entry(r[pid].clone()).or_default().push(format!(
                "beacon last sighted {} ({} days)",
                r[last], r[since]
            ));
        }
    }
    print(format_args!(
        "as of {}: {} of {} active participants need follow-up (threshold {}%, beacon stale after {stale_days} days)",
        bundle.generated_at,
        shortlist.len(),
        active.len(),
        study.threshold()
    ))?;
    for (id, reasons) in &shortlist {
        print(format_args!("{id}\t{}", reasons.join("; ")))?;
    }
    Ok(())
}

fn serve(a: ServeArgs, bins: ColorBins) -> Outcome {
    let mut config = ServiceConfig::from_env(SocketAddr::new(a.bind, a.port), &a.bundle)
        .map_err(|e| Failure::usage(e.to_string()))?;
    config.assets_dir = a.assets;
    config.bins = bins;
    if ExportBundle::open(&a.bundle).is_err() {
        tracing::warn!(bundle = %a.bundle.display(), "no bundle yet; data routes answer no_data until one is exported");
    }
    let runtime = tokio::runtime::Runtime::new()
        .map_err(|e| Failure::io(format!("starting runtime: {e}")))?;
    runtime
        .block_on(compliance_server::serve(config, async {
            let _ = tokio::signal::ctrl_c().await;
        }))
        .map_err(|e| Failure::io(format!("serving on {}:{}: {e}", a.bind, a.port)))
}

fn probability(name: &str, v: Option<f64>, slot: &mut f64) -> Outcome {
    if let Some(v) = v {
        if !(0.0..=1.0).contains(&v) {
            return Err(Failure::usage(format!(
                "--{name} must be within [0, 1], got {v}"
            )));
        }
        *slot = v;
    }
    Ok(())
}

fn simulate(a: SimulateArgs, study: StudyConfig) -> Outcome {
    if a.teams == 0 || a.cadence == 0 {
        return Err(Failure::usage("--teams and --cadence must be positive"));
    }
    let mut sc = if a.realistic {
        Scenario::realistic()
    } else {
        Scenario::default()
    };
    probability("night-nonwear", a.night_nonwear, &mut sc.night_nonwear)?;
    probability("sync-delay", a.sync_delay, &mut sc.sync_delay)?;
    probability("window-dropout", a.window_dropout, &mut sc.window_dropout)?;
    probability(
        "survey-completion",
        a.survey_completion,
        &mut sc.survey_completion,
    )?;
    probability(
        "beacon-sighting",
        a.beacon_sighting,
        &mut sc.beacon_sighting,
    )?;
    let counts = [
        (a.dead_devices, &mut sc.dead_devices),
        (a.dead_device_days, &mut sc.dead_device_days),
        (a.beacon_failures, &mut sc.beacon_failures),
        (a.never_sighted, &mut sc.never_sighted),
        (a.invalid_hr_rows, &mut sc.invalid_hr_rows),
        (a.pipeline_teams, &mut sc.pipeline_teams),
    ];
    for (v, slot) in counts {
        if let Some(v) = v {
            *slot = v;
        }
    }
    let spec = CohortSpec {
        seed: a.seed,
        num_teams: a.teams,
        first_start: a.start,
        stagger_days: a.stagger_days,
        as_of: a.as_of,
        cadence_secs: a.cadence,
        config: study,
        scenario: sc,
        ..CohortSpec::default()
    };
    let plan = CohortPlan::new(&spec);
    let files = generate(&plan, &a.out)?;
    let c = &files.counts;
    print(format_args!(
        "cohort seed {} as of {}: {} roster rows, {} heart-rate rows ({} invalid), {} survey rows, {} beacon rows",
        a.seed, plan.as_of, c.roster_rows, c.hr_valid_rows + c.hr_invalid_rows, c.hr_invalid_rows, c.survey_rows, c.beacon_rows
    ))?;
    print(format_args!("wrote {}", a.out.display()))
}
