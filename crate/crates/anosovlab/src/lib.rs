//! Batch driver for `anosov-core` experiments.
//!
//! A run reads one [`ExperimentConfig`], dispatches on its experiment kind and
//! produces a [`Report`]: a set of named CSV/JSON files plus `manifest.json`,
//! which lists every file with its SHA-256. Reports never contain timestamps,
//! paths or worker counts, so identical configs give byte-identical output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod report;

use std::path::Path;

pub use config::ExperimentConfig;
pub use report::Report;

#[derive(Debug, Clone, PartialEq)]
pub enum LabError {
    ConfigInvalid(String),
    ExperimentFailed(String),
}

impl LabError {
    pub(crate) fn config(e: anosov_core::Error) -> Self {
        LabError::ConfigInvalid(e.to_string())
    }

    pub(crate) fn failed(e: anosov_core::Error) -> Self {
        LabError::ExperimentFailed(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::ExperimentFailed(_) => 1,
            LabError::ConfigInvalid(_) => 2,
        }
    }
}

impl std::fmt::Display for LabError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LabError::ConfigInvalid(m) => write!(f, "invalid config: {m}"),
            LabError::ExperimentFailed(m) => write!(f, "experiment failed: {m}"),
        }
    }
}

impl std::error::Error for LabError {}

/// Runs the experiment on a pool of `workers` threads (all available when `None`).
pub fn run_with_workers(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<Report, LabError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        if n == 0 {
            return Err(LabError::ConfigInvalid("workers must be positive".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| LabError::ExperimentFailed(e.to_string()))?;
    pool.install(|| experiments::run(cfg))
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report, LabError> {
    run_with_workers(cfg, None)
}

/// Loads `config`, applies the overrides, runs it and writes the report.
/// `subcommand` must match the configured experiment.
pub fn run_cli(
    subcommand: &str,
    config: &Path,
    out: Option<&Path>,
    seed: Option<u64>,
    workers: Option<usize>,
) -> Result<Report, LabError> {
    let mut cfg = ExperimentConfig::load(config)?;
    if cfg.experiment.name() != subcommand {
        return Err(LabError::ConfigInvalid(format!(
            "config describes a {} experiment, not {subcommand}",
            cfg.experiment.name()
        )));
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| Path::new("out").join(subcommand));
    let report = run_with_workers(&cfg, workers)?;
    report.write_to(&dir).map_err(|e| LabError::ExperimentFailed(format!("{}: {e}", dir.display())))?;
    Ok(report)
}
