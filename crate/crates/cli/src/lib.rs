//! Library side of the `volkov` command: configuration, grid evaluation and
//! the verification suites, kept here so integration tests can call them
//! without spawning the binary.

pub mod commands;
pub mod config;
pub mod suites;

use thiserror::Error;

pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("evaluation failed: {0}")]
    Core(#[from] volkov_core::Error),

    #[error("output error: {0}")]
    Output(String),

    #[error("{0} verification suite(s) failed")]
    VerifyFailed(usize),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::VerifyFailed(_) => 1,
            CliError::Config(_) | CliError::Output(_) => 2,
            CliError::Core(volkov_core::Error::Quadrature { .. }) => 4,
            CliError::Core(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Output(e.to_string())
    }
}
