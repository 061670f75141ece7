use thiserror::Error;

/// Errors shared by every module in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("bad labels: {0}")]
    BadLabels(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(
        "view {view} has {dim} feature rows but the projection basis needs at least k = {k}; \
         supply more features for this view or lower k"
    )]
    RankDeficientView { view: usize, dim: usize, k: usize },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("state invariant violated: {0}")]
    InvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
