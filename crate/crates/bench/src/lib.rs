//! Fixtures for the pipeline benchmarks.

use compliance_core::datagen::{CohortPlan, CohortSpec, Scenario};
use compliance_core::ingest::parse_heart_rate_log;
use compliance_core::{StoreSnapshot, StudyConfig};

/// A generated cohort with its heart-rate file held in memory.
pub struct Fixture {
    pub plan: CohortPlan,
    pub heart_rate_csv: Vec<u8>,
}

pub fn fixture(teams: u32, cadence_secs: u32) -> Fixture {
    let spec = CohortSpec {
        seed: 42,
        num_teams: teams,
        cadence_secs,
        scenario: Scenario::realistic(),
        ..CohortSpec::default()
    };
    let plan = CohortPlan::new(&spec);
    let mut heart_rate_csv = Vec::new();
    plan.write_heart_rate(&mut heart_rate_csv)
        .expect("write to vec");
    Fixture {
        plan,
        heart_rate_csv,
    }
}

impl Fixture {
    pub fn snapshot(&self) -> StoreSnapshot {
        let (heart_rate, _) =
            parse_heart_rate_log(self.heart_rate_csv.as_slice(), &StudyConfig::default())
                .expect("generated file parses");
        StoreSnapshot {
            roster: self.plan.roster(),
            heart_rate,
            surveys: Vec::new(),
            beacons: Vec::new(),
        }
    }
}
