use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A point was outside the region where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Boundary values came too close to zero for the argument principle.
    #[error("ill-conditioned boundary: min |f| = {min:e}, max |f| = {max:e}")]
    IllConditioned { min: f64, max: f64 },

    #[error("factorization failed: {0}")]
    FactorizationFailed(String),

    #[error("corrupt stream at byte {offset}: {reason}")]
    CorruptStream { offset: usize, reason: String },

    #[error("encoder error: {0}")]
    Encoder(String),

    #[error("record format error: {0}")]
    Format(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn corrupt(offset: usize, reason: impl Into<String>) -> Self {
        Error::CorruptStream {
            offset,
            reason: reason.into(),
        }
    }
}
