use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of a function (e.g. a Hankel
    /// function evaluated at the origin).
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid or inconsistent input data.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Not enough samples/microphones/directions for the requested order.
    #[error("insufficient data: {0}")]
    Insufficient(String),

    /// A linear system that had to be inverted is singular.
    #[error("singular system: {0}")]
    Singular(String),

    /// A series did not converge within its order cap.
    #[error("series did not converge: {0}")]
    NonConvergent(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
