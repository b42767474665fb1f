//! Experiment runner: presets, run orchestration, persistence and verdicts.

pub mod cli;
pub mod config;
pub mod diagnose;
pub mod manifest;
pub mod output;
pub mod run;
pub mod sweep;

use nls_core::NlsError;

/// Overrides the default output directory.
pub const OUTPUT_DIR_ENV: &str = "NLSLAB_OUTPUT_DIR";
/// Worker count for sweeps.
pub const THREADS_ENV: &str = "NLSLAB_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Solver(#[from] NlsError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Data(String),
}

impl LabError {
    /// 2 for usage errors, 1 for everything that went wrong at runtime.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            _ => 1,
        }
    }
}

impl From<csv::Error> for LabError {
    fn from(e: csv::Error) -> Self {
        Self::Data(format!("csv: {e}"))
    }
}

impl From<serde_json::Error> for LabError {
    fn from(e: serde_json::Error) -> Self {
        Self::Data(format!("json: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
