use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// `p0 + p1 = 1`: input and output are independent.
    #[error("channel ({p0}, {p1}) has zero capacity")]
    ZeroCapacity { p0: f64, p1: f64 },

    /// A documented precondition of an algorithm was not met by the caller.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Floating-point breakdown (underflowed normalizer, tiny pivot).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Something the theory rules out happened; treated as a bug signal.
    #[error("internal error: {0}")]
    Internal(String),

    /// A session hit its `max_steps` cap before the stopping rule fired.
    #[error("{count} session(s) exceeded the step cap of {max_steps}")]
    CapExceeded { count: u64, max_steps: u64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
