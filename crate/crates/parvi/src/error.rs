use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A scalar or array argument failed validation.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two arrays that must agree in shape do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The particle configuration makes a required quantity meaningless,
    /// e.g. the median pairwise distance is zero so no bandwidth exists.
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),

    /// A numerical routine produced a non-finite value.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// The proximal inner solver could not decrease its objective.
    #[error("inner solver stalled: {0}")]
    StalledInnerSolver(String),

    /// Rejection sampling could not find acceptable proposals.
    #[error("proposal failure: {0}")]
    ProposalFailure(String),

    /// A linear solve met a matrix that is not positive definite.
    #[error("linear solve failed: {0}")]
    LinearSolveFailure(String),

    /// Config file or dataset file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn mismatch(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}
