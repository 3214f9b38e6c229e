use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Structural problems in a characteristic table (missing coalitions,
    /// negative costs, out-of-range members). Every offender is listed.
    #[error("invalid characteristic table: {}", .0.join("; "))]
    Table(Vec<String>),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("scale limit exceeded: {what} = {value} (max {max})")]
    ScaleLimit {
        what: &'static str,
        value: usize,
        max: usize,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Invariant violated inside the staged driver. Not user-recoverable.
    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
