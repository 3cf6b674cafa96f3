use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// The isotonic fit has too many degrees of freedom for the requested estimator.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    /// Tied samples pooled into a zero-width spacing, so the density is unbounded.
    #[error("degenerate spacings: {0}")]
    DegenerateSpacings(String),
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
