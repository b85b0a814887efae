use thiserror::Error;

use crate::metric::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Matrix shape does not match the label list, or a tree is malformed.
    #[error("structural error: {0}")]
    Structural(String),
    /// NaN, infinite or negative entries.
    #[error("value error: {0}")]
    Value(String),
    #[error("invalid metric: {}", .0.summary())]
    InvalidMetric(ValidationReport),
    #[error("argument error: {0}")]
    Argument(String),
    /// A precondition on the inputs of a construction does not hold.
    #[error("contract error: {0}")]
    Contract(String),
    /// A property that holds by construction was observed to fail.
    #[error("internal invariant error: {0}")]
    Invariant(String),
    #[error("capacity error: {what} has {size} points, exact cap is {cap}; {hint}")]
    Capacity { what: &'static str, size: usize, cap: usize, hint: &'static str },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Structural(_) => "structural",
            Error::Value(_) => "value",
            Error::InvalidMetric(_) => "invalid_metric",
            Error::Argument(_) => "argument",
            Error::Contract(_) => "contract",
            Error::Invariant(_) => "invariant",
            Error::Capacity { .. } => "capacity",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
