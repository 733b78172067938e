//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so each criterion reports its own
//! measurements. Pass a substring to run only matching criteria.

#[macro_use]
mod support;
mod engine;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

type Criterion = fn() -> Result<String, String>;

const CRITERIA: &[(&str, Criterion)] = &[
    ("formula fidelity", engine::formula_fidelity),
    ("ground-truth cohort", pipeline::ground_truth_cohort),
    ("threshold semantics", engine::threshold_semantics),
    ("survey rules", engine::survey_rules),
    ("beacon staleness", engine::beacon_staleness),
    (
        "idempotence and determinism",
        pipeline::idempotence_and_determinism,
    ),
    ("monotonicity", engine::monotonicity),
    ("api consistency", pipeline::api_consistency),
    ("dst correctness", engine::dst_correctness),
];

fn main() -> ExitCode {
    let filters: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    let mut ran = 0;
    for (name, check) in CRITERIA {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        let started = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(format!("panic: {msg}"))
        });
        let secs = started.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS  {name:<28} {detail} [{secs:.1}s]"),
            Err(reason) => {
                failed += 1;
                println!("FAIL  {name:<28} {reason} [{secs:.1}s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
