//! Configuration, orchestration, persistence and reporting for the kinetics
//! experiments.

pub mod config;
pub mod criteria;
pub mod error;
pub mod experiments;
pub mod output;
pub mod report;

use std::path::{Path, PathBuf};

use chrono::Utc;

pub use config::{parse_config, parse_config_str, ExperimentSpec, Kind};
pub use error::{HarnessError, Result};
pub use output::{Outcome, RunManifest};

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;

/// Result of one experiment written to disk.
pub struct RunRecord {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    pub outcome: Outcome,
}

/// Runs the experiment on a pool of `spec.workers` threads (rayon's default
/// when unset) and writes it under `out_root`.
pub fn run_experiment(spec: &ExperimentSpec, out_root: &Path) -> Result<RunRecord> {
    let started = Utc::now();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = spec.workers {
        pool = pool.num_threads(w);
    }
    let pool = pool.build().map_err(|e| HarnessError::Usage(e.to_string()))?;
    let outcome = pool.install(|| experiments::run_experiment(spec))?;
    let (dir, manifest) = output::write_run(out_root, spec, &outcome, started)?;
    Ok(RunRecord { dir, manifest, outcome })
}
