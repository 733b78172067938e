//! Seeded synthetic cohorts with known ground truth.
//!
//! A [`CohortPlan`] decides, for every participant-day, which windows the
//! wearable covers, whether the weekday survey was completed and when the
//! beacon was seen. [`generate`] renders the plan into the four raw input
//! files and a `manifest.json` of the values the engine must reproduce.

mod manifest;
mod plan;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub use manifest::{
    BeaconTruth, DayTruth, FileCounts, Manifest, MeanTruth, ParticipantTruth, SurveyTruth,
};
pub use plan::{CohortPlan, CohortSpec, DayPlan, ParticipantPlan, Scenario};

use crate::error::{Error, Result};
use crate::fsutil::write_atomic;

/// Paths written by [`generate`].
#[derive(Debug, Clone)]
pub struct GeneratedFiles {
    pub roster: PathBuf,
    pub heart_rate: PathBuf,
    pub surveys: PathBuf,
    pub beacons: PathBuf,
    pub manifest: PathBuf,
    pub counts: FileCounts,
}

pub fn generate(plan: &CohortPlan, out_dir: &Path) -> Result<GeneratedFiles> {
    fs::create_dir_all(out_dir)
        .map_err(|e| Error::io(format!("creating {}", out_dir.display()), e))?;
    let files = GeneratedFiles {
        roster: out_dir.join("roster.csv"),
        heart_rate: out_dir.join("hr.csv"),
        surveys: out_dir.join("surveys.csv"),
        beacons: out_dir.join("beacons.csv"),
        manifest: out_dir.join("manifest.json"),
        counts: FileCounts::default(),
    };
    let mut counts = FileCounts::default();
    write_atomic(&files.roster, |w| {
        plan.write_roster(w).map(|n| counts.roster_rows = n)
    })?;
    write_atomic(&files.heart_rate, |w| {
        plan.write_heart_rate(w).map(|(valid, invalid)| {
            counts.hr_valid_rows = valid;
            counts.hr_invalid_rows = invalid;
        })
    })?;
    write_atomic(&files.surveys, |w| {
        plan.write_surveys(w).map(|n| counts.survey_rows = n)
    })?;
    write_atomic(&files.beacons, |w| {
        plan.write_beacons(w).map(|n| counts.beacon_rows = n)
    })?;
    let mut manifest = plan.manifest();
    manifest.files = counts.clone();
    let json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    write_atomic(&files.manifest, |w| {
        w.write_all(&json)?;
        w.write_all(b"\n")
    })?;
    Ok(GeneratedFiles { counts, ..files })
}
