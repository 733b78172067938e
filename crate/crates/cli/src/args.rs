use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "compliance-monitor",
    version,
    about = "Participant compliance monitoring for longitudinal studies"
)]
pub struct Cli {
    /// TOML file with `[study]` and `[bins]` tables.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Add raw CSV logs to a store.
    Ingest(IngestArgs),
    /// Compute compliance and print per-participant summaries.
    Compute(ComputeArgs),
    /// Compute compliance and write the report bundle.
    Export(ExportArgs),
    /// List participants below threshold and stale beacons from a bundle.
    Check(CheckArgs),
    /// Serve a bundle over the HTTP API.
    Serve(ServeArgs),
    /// Generate a synthetic cohort with ground truth.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub store: PathBuf,
    #[arg(long)]
    pub roster: Option<PathBuf>,
    #[arg(long)]
    pub hr: Vec<PathBuf>,
    #[arg(long)]
    pub surveys: Vec<PathBuf>,
    #[arg(long)]
    pub beacons: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AsOfArgs {
    /// Report date; defaults to today in `--tz`.
    #[arg(long, value_name = "YYYY-MM-DD")]
    pub as_of: Option<NaiveDate>,
    /// Study timezone used for the default report date.
    #[arg(long, value_name = "ZONE", default_value = "UTC")]
    pub tz: String,
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    #[arg(long)]
    pub store: PathBuf,
    #[command(flatten)]
    pub as_of: AsOfArgs,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub store: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub as_of: AsOfArgs,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    /// Overrides `beacon_stale_days` from the config.
    #[arg(long)]
    pub stale_days: Option<u32>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub bind: std::net::IpAddr,
    /// Built dashboard assets to serve at `/`.
    #[arg(long)]
    pub assets: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 15)]
    pub teams: u32,
    #[arg(long)]
    pub out: PathBuf,
    /// First team's start date.
    #[arg(long, default_value = "2023-01-09")]
    pub start: NaiveDate,
    #[arg(long, default_value_t = 3)]
    pub stagger_days: u32,
    /// Report date recorded in the manifest; defaults to the last team's end.
    #[arg(long)]
    pub as_of: Option<NaiveDate>,
    /// Seconds between heart-rate samples.
    #[arg(long, default_value_t = 15)]
    pub cadence: u32,
    /// Start from the realistic failure mix instead of a fully compliant cohort.
    #[arg(long)]
    pub realistic: bool,
    #[arg(long)]
    pub night_nonwear: Option<f64>,
    #[arg(long)]
    pub sync_delay: Option<f64>,
    #[arg(long)]
    pub window_dropout: Option<f64>,
    #[arg(long)]
    pub dead_devices: Option<u32>,
    #[arg(long)]
    pub dead_device_days: Option<u32>,
    #[arg(long)]
    pub survey_completion: Option<f64>,
    #[arg(long)]
    pub beacon_sighting: Option<f64>,
    #[arg(long)]
    pub beacon_failures: Option<u32>,
    #[arg(long)]
    pub never_sighted: Option<u32>,
    #[arg(long)]
    pub invalid_hr_rows: Option<u32>,
    #[arg(long)]
    pub pipeline_teams: Option<u32>,
}
