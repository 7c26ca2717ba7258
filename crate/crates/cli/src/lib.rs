//! Configuration, experiment catalogue and output layer of the `rmtlab` command.

pub mod catalog;
pub mod config;
pub mod experiments;
pub mod output;

use std::path::Path;
use std::time::Instant;

use config::ExperimentConfig;
use output::{Outcome, RunSummary, Versions};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Core(#[from] rmtlab_core::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

/// Runs an experiment and writes its tables and `summary.json` into `dir`.
pub fn run_to_dir(cfg: &ExperimentConfig, threads: usize, dir: &Path) -> Result<(Outcome, RunSummary), RunError> {
    let start = Instant::now();
    let outcome = experiments::run(cfg, threads)?;
    let mut files: Vec<String> = outcome.tables.iter().map(|t| t.file.clone()).collect();
    files.push("summary.json".into());
    let summary = RunSummary {
        experiment: cfg.experiment.name().into(),
        config_hash: cfg.hash(),
        config: cfg.canonical(),
        passed: outcome.passed(),
        criteria: outcome.criteria.clone(),
        metrics: outcome.metrics.iter().map(|(k, v)| (k.clone(), v.is_finite().then_some(*v))).collect(),
        files,
        threads,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        versions: Versions { rmtlab: VERSION.into(), rmtlab_core: VERSION.into() },
    };
    output::write_all(dir, &outcome, &summary)?;
    Ok((outcome, summary))
}
