//! Library side of the `burgers` command: configuration, artifact writers
//! and the subcommand drivers. `main.rs` only parses arguments.

pub mod commands;
pub mod config;
pub mod output;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("comparison failed: {0}")]
    Comparison(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Comparison(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}
