//! Command-line front end for `xxz-core`: configuration, sweeps over
//! anisotropy and field, CSV/JSON output and the self-check suite.

pub mod config;
pub mod output;
pub mod run;
pub mod verify;

use thiserror::Error;

/// Environment variable capping the number of worker threads.
pub const WORKERS_ENV: &str = "XXZ_WORKERS";

#[derive(Debug, Clone, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn config(e: impl std::fmt::Display) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Config(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

impl From<xxz_core::Error> for CliError {
    fn from(e: xxz_core::Error) -> Self {
        match e {
            xxz_core::Error::Capacity { .. } | xxz_core::Error::Parse { .. } | xxz_core::Error::InvalidSpec(_) => {
                CliError::Config(e.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}
