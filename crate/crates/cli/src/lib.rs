//! Orchestration behind the `skyforge` binary: configuration, ingestion,
//! search, result manifests and brute-force verification.

pub mod app;
pub mod config;
pub mod manifest;

pub use app::{prepare, run_command, verify_command, Prepared, RunResult, VerifyReport};
pub use config::{Overrides, RunConfig};
pub use manifest::Manifest;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const INVALID_CONFIG: i32 = 2;
    pub const ESTIMATOR: i32 = 3;
    pub const EMPTY_SKYLINE: i32 = 4;
    pub const CAP_EXCEEDED: i32 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error(transparent)]
    Core(#[from] skyforge_core::Error),
    #[error("estimator failed; partial manifest written to {manifest}: {reason}")]
    Estimator { manifest: String, reason: String },
    #[error("no dataset satisfies the measure bounds; manifest written to {0}")]
    EmptySkyline(String),
    #[error("verification failed with {0} violation(s)")]
    Violations(usize),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use skyforge_core::Error as E;
        match self {
            CliError::Config(_) => exit::INVALID_CONFIG,
            CliError::Core(E::Config(_) | E::SchemaConflict { .. }) => exit::INVALID_CONFIG,
            CliError::Core(E::EnumerationCap { .. }) => exit::CAP_EXCEEDED,
            CliError::Core(E::Estimator { .. }) | CliError::Estimator { .. } => exit::ESTIMATOR,
            CliError::EmptySkyline(_) => exit::EMPTY_SKYLINE,
            _ => exit::FAILURE,
        }
    }
}
