use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("empty domain")]
    EmptyDomain,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("incompatible grids: {0}")]
    Incompatible(String),
    #[error("invalid exponent: {0}")]
    InvalidExponent(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("band exceeds Nyquist: K = {k_max} but at most {limit} bands fit")]
    BandExceedsNyquist { k_max: usize, limit: i64 },
    #[error("dimension mismatch: family built for {expected} cells, function has {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("moment system is singular")]
    SingularMoments,
    #[error("infeasible grid: {required} cells required, cap is {cap}")]
    Infeasible { required: u64, cap: u64 },
    #[error("embedding not claimed")]
    EmbeddingNotClaimed,
    #[error("embedding holds, no counterexample family applies")]
    EmbeddingHolds,
    #[error("ordering violation: {0}")]
    Ordering(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
