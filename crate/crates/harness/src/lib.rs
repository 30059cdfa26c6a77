//! Experiment driver for `epdiff-core`.
//!
//! Each experiment takes an [`ExperimentConfig`], sweeps its cases on a
//! worker pool and returns an [`ExperimentReport`] with tables, fitted
//! constants and pass/fail verdicts. [`run_to_dir`] also writes
//! `report.json`, one CSV per table and optional SVG plots.

pub mod config;
pub mod error;
pub mod experiments;
pub mod plot;
pub mod report;

use std::path::PathBuf;
use std::time::Instant;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
pub use report::ExperimentReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    Localize,
    Scaling,
    Separation,
    Nowhere,
    Inequalities,
    Converge,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Localize,
        Experiment::Scaling,
        Experiment::Separation,
        Experiment::Nowhere,
        Experiment::Inequalities,
        Experiment::Converge,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Localize => "localize",
            Experiment::Scaling => "scaling",
            Experiment::Separation => "separation",
            Experiment::Nowhere => "nowhere",
            Experiment::Inequalities => "inequalities",
            Experiment::Converge => "converge",
        }
    }

    pub fn plots(&self) -> &'static [plot::PlotSpec] {
        match self {
            Experiment::Localize => experiments::localize::PLOTS,
            Experiment::Scaling => experiments::scaling::PLOTS,
            Experiment::Separation => experiments::separation::PLOTS,
            Experiment::Nowhere => experiments::nowhere::PLOTS,
            Experiment::Inequalities => experiments::inequalities::PLOTS,
            Experiment::Converge => experiments::converge::PLOTS,
        }
    }
}

/// Runs one experiment on a pool of `cfg.threads` workers.
pub fn run(exp: Experiment, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    let start = Instant::now();
    let mut report = pool.install(|| match exp {
        Experiment::Localize => experiments::localize::run(cfg),
        Experiment::Scaling => experiments::scaling::run(cfg),
        Experiment::Separation => experiments::separation::run(cfg),
        Experiment::Nowhere => experiments::nowhere::run(cfg),
        Experiment::Inequalities => experiments::inequalities::run(cfg),
        Experiment::Converge => experiments::converge::run(cfg),
    })?;
    report.runtime.threads = pool.current_num_threads();
    report.runtime.elapsed_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Runs an experiment and writes its outputs to `cfg.output`.
pub fn run_to_dir(exp: Experiment, cfg: &ExperimentConfig) -> Result<(ExperimentReport, Vec<PathBuf>)> {
    let report = run(exp, cfg)?;
    let mut files = report.write(&cfg.output)?;
    if cfg.plots {
        files.extend(plot::emit(&report, &cfg.output, exp.plots())?);
    }
    Ok((report, files))
}
