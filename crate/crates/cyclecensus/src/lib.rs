//! Seeded Monte Carlo experiments on limit cycles of random planar vector
//! fields, built on `cyclecensus-core`.
//!
//! A run is described by an [`ExperimentConfig`], executed by
//! [`run_experiment`] and written with [`emit_report`].

pub mod config;
pub mod report;
pub mod runner;

use std::path::PathBuf;

pub use config::{Epsilon, EpsilonSchedule, ExperimentConfig, ExperimentKind};
pub use report::{
    emit_report, AggregateRow, ExperimentReport, Format, ParameterPoint, TrialRecord, TrialStatus,
};
pub use runner::{run_experiment, RunOptions};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("run error: {0}")]
    Run(String),
}

impl HarnessError {
    /// Process exit code: 2 for configuration problems, 3 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Io { .. } | Self::Run(_) => 3,
        }
    }
}
