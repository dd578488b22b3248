//! Process-level errors: anything that stops a run from producing reports.
//! Failed numeric gates are not errors; they land in the report and drive
//! the exit status instead.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Configuration problem tied to a line of the INI file.
    #[error("config line {line}: {msg}")]
    ConfigAt { line: usize, msg: String },
    /// Configuration or invocation problem without a useful line number.
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Engine(#[from] wick_core::Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
}

/// Line-anchored config error; line 0 means "no line to point at".
pub fn config_err(line: usize, msg: String) -> CliError {
    if line == 0 {
        CliError::Config(msg)
    } else {
        CliError::ConfigAt { line, msg }
    }
}
