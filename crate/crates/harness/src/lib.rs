//! Experiment harness: run configuration, multi-seed training sweeps,
//! CSV metrics, binary checkpoints and checkpoint evaluation.

pub mod checkpoint;
pub mod config;
pub mod experiment;
pub mod metrics_io;

pub use checkpoint::Checkpoint;
pub use config::RunConfig;
pub use experiment::{evaluate, run_experiment, run_seed, EvalReport, ExperimentResult, SeedResult};
pub use metrics_io::AggregateRow;

use thiserror::Error;
use uavbs_core::baseline::BaselineError;
use uavbs_core::trpo::TrpoError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error("metrics error: {0}")]
    Metrics(String),
    #[error(transparent)]
    Core(#[from] TrpoError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
}

impl HarnessError {
    /// Process exit code: 1 for configuration problems, 2 for everything
    /// that fails at run time.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            _ => 2,
        }
    }
}
