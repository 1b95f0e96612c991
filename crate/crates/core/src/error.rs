use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Arguments outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Argument beyond the range covered by a precomputed table or sieve.
    #[error("{what} = {value} exceeds the available range (limit {limit})")]
    OutOfRange {
        what: &'static str,
        value: u64,
        limit: u64,
    },
    /// Allocation or work budget exceeded.
    #[error("resource error: {0}")]
    Resource(String),
    /// Requested accuracy is finer than what the truncation can certify.
    #[error("tolerance {requested:e} is below the certified tail budget {budget:e}")]
    Tolerance { requested: f64, budget: f64 },
    #[error("malformed cache file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
