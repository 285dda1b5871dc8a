//! Subcommands behind the `phonodrift` binary.

pub mod commands;
pub mod config;
pub mod output;

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or config. Exit code 1.
    #[error("{0}")]
    Usage(String),
    /// Unreadable or inconsistent input data. Exit code 2.
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Data(format!("{}: {err}", path.display()))
    }
}

impl From<config::ConfigFileError> for CliError {
    fn from(e: config::ConfigFileError) -> Self {
        CliError::Usage(format!("config: {e}"))
    }
}
