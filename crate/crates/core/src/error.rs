use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Channel dimensions or other parameters outside their valid range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// An operation was called outside its precondition.
    #[error("contract violation: {0}")]
    Contract(String),
    /// A numerical routine failed or produced a non-finite value.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by the caller's input rather than arithmetic.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::InvalidParameter(_) | Error::Contract(_))
    }
}
