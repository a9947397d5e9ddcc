use thiserror::Error;

/// Errors raised by the selection library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A caller broke an operation's contract (e.g. adding an element already present).
    #[error("contract violation: {0}")]
    Contract(String),
    /// Malformed input data.
    #[error("format error at row {row}, column {column}: {message}")]
    Format { row: usize, column: usize, message: String },
    /// A numerical routine could not maintain its invariants.
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
