use std::fmt;
use std::process::ExitCode;

use quasiknow::error::QkError;

/// Failure classes with their exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Malformed or unreadable input: exit 2.
    Input(String),
    /// Well-formed input the mathematics rejects: exit 1.
    Domain(String),
    /// Interrupted: exit 130.
    Cancelled,
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Domain(_) => 1,
            CliError::Cancelled => 130,
        }
    }

    pub fn report(&self) -> ExitCode {
        eprintln!("error: {self}");
        ExitCode::from(self.code())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Domain(m) => f.write_str(m),
            CliError::Cancelled => f.write_str("cancelled"),
        }
    }
}

impl From<QkError> for CliError {
    fn from(e: QkError) -> Self {
        match e {
            QkError::Cancelled => CliError::Cancelled,
            e if e.is_input_error() => CliError::Input(e.to_string()),
            e => CliError::Domain(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn domain(msg: impl Into<String>) -> CliError {
    CliError::Domain(msg.into())
}

pub fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}
