//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-range caller input (bad file, bad dimension, bad parameter).
    #[error("invalid input: {0}")]
    Input(String),

    /// A documented precondition of an operation was violated.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Input is structurally valid but the requested quantity is undefined on it
    /// (constant vectors, all positions tied, covariate fully explaining a variable).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A computation produced non-finite or inconsistent numbers.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// CSV that could not be parsed; carries the 1-based line number.
    #[error("csv parse error at line {line}: {msg}")]
    CsvParse { line: u64, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for input/usage problems, 3 for numeric failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Numeric(_) => 3,
            _ => 2,
        }
    }
}
