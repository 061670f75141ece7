//! CLI failure classes, one per exit code, so harness scripts can tell bad
//! invocations (2) from IO and parse problems (3), solver failures (4), and
//! over-cap exports (5).

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid flags or flag combinations. Exit 2.
    #[error("{0}")]
    Usage(String),
    /// File IO or parse failures, including data inconsistent with its
    /// manifest. Exit 3.
    #[error("{0}")]
    Io(String),
    /// The solver or pipeline failed on well-formed input. Exit 4.
    #[error("{0}")]
    Solver(String),
    /// An export would exceed a hard size cap. Exit 5.
    #[error("{0}")]
    TooLarge(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Solver(_) => 4,
            CliError::TooLarge(_) => 5,
        }
    }

    /// An IO-class error prefixed with the file it concerns.
    pub fn io(path: &Path, detail: impl std::fmt::Display) -> CliError {
        CliError::Io(format!("{}: {detail}", path.display()))
    }
}
