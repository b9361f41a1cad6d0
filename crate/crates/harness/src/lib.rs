//! Experiment harness for the front-tracking stability laboratory: run
//! configurations, quantitative experiments, rate fits, and reports.

pub mod artifacts;
pub mod config;
pub mod experiments;
pub mod report;

pub use config::{ExperimentConfig, ExperimentKind, GeneratorSpec};
pub use report::{ExperimentReport, Status};

/// Execute one experiment and stamp its runtime.
pub fn run_experiment(config: &ExperimentConfig) -> anyhow::Result<ExperimentReport> {
    config.validate()?;
    let start = std::time::Instant::now();
    let mut report = experiments::dispatch(config)?;
    report.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}
