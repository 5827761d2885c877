//! Experiment harness: grid execution, verification, and report
//! aggregation over the solver library.

pub mod config;
pub mod grid;
pub mod io;
pub mod report;

use thiserror::Error;

/// Harness-level failures, mapped onto process exit codes by the CLI.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration (exit 2).
    #[error("config error: {0}")]
    Config(String),
    /// A run aborted (exit 3).
    #[error("run error: {0}")]
    Run(String),
    /// Report inputs missing or inconsistent (exit 2).
    #[error("report error: {0}")]
    Report(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Report(_) => 2,
            CliError::Run(_) => 3,
        }
    }
}
