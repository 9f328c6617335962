//! Scenario runner for the `xikit` command line tool.

pub mod config;
pub mod error;
pub mod models;
pub mod report;
pub mod runners;

use std::path::{Path, PathBuf};

pub use config::{Kind, Scenario};
pub use error::{ConfigError, RunError};
pub use report::{Check, Report};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides `output_dir` from the scenario.
    pub out: Option<PathBuf>,
    /// Overrides `seed` from the scenario.
    pub seed: Option<u64>,
}

/// Loads a scenario, runs it and writes its outputs. Returns the report and
/// the directory it was written to.
pub fn run_scenario(path: &Path, opts: &RunOptions) -> Result<(Report, PathBuf), RunError> {
    let mut scenario = Scenario::load(path)?;
    if let Some(seed) = opts.seed {
        scenario.seed = seed;
    }
    let out = match &opts.out {
        Some(dir) => dir.clone(),
        None if scenario.output_dir.is_absolute() => scenario.output_dir.clone(),
        None => scenario.base_dir.join(&scenario.output_dir),
    };
    let report = runners::run(&scenario, &out)?;
    Ok((report, out))
}
