//! Exit-code contract: 0 success, 1 parse/validation, 2 solver failure,
//! 3 I/O failure.

use thiserror::Error;

pub const EXIT_PARSE: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Solver(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn parse(msg: impl Into<String>) -> Self {
        CliError::Parse(msg.into())
    }

    pub fn io(msg: impl Into<String>) -> Self {
        CliError::Io(msg.into())
    }

    pub fn from_parse(e: impl std::fmt::Display) -> Self {
        CliError::Parse(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Solver(_) => EXIT_SOLVER,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<mtc_core::SolveError> for CliError {
    fn from(e: mtc_core::SolveError) -> Self {
        match e {
            // Scenario binding problems are configuration mistakes.
            mtc_core::SolveError::Scenario(inner) => CliError::Parse(inner.to_string()),
            other => CliError::Solver(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
