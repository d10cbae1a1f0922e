//! Scenario runner, benchmark harness and on-disk state for the `spot` tool.

pub mod bench;
pub mod engine;
pub mod scenario;
pub mod store;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error(transparent)]
    Protocol(#[from] spot_core::Error),
    #[error("missing state: {0}")]
    MissingState(String),
    #[error("malformed {path}: {reason}")]
    Malformed { path: String, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub use bench::{run_bench, BenchOptions, BenchReport, Variant};
pub use engine::{run_scenario, Report, RunOptions};
pub use scenario::Scenario;
