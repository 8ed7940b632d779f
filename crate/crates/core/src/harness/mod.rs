//! Batch front end: instance files, random instances, reports, verification
//! sweeps and the subcommand implementations used by the CLI.

pub mod commands;
pub mod generate;
pub mod instance;
pub mod report;
pub mod verify;

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: parse error: {msg}")]
    Parse { path: PathBuf, msg: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error(transparent)]
    Core(#[from] crate::error::Error),
}

impl HarnessError {
    /// Process exit code for this error: 3 for an exceeded search budget,
    /// 2 for every other input problem.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Core(crate::error::Error::BudgetExceeded { .. }) => 3,
            _ => 2,
        }
    }
}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;
