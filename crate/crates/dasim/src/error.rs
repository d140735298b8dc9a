//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by simulation, estimation and persistence stages.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or configuration value is outside its contract.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A run would exceed the configured resource budget.
    #[error("resource budget exceeded: {0}")]
    BudgetExceeded(String),

    /// A binary or CSV file does not match the expected layout.
    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    Config(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
