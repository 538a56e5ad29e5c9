use thiserror::Error;

/// Errors raised by the cone-geometry routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CopoError {
    #[error("order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },
    #[error("zero matrix has no direction")]
    ZeroMatrix,
    #[error("eigensolver did not converge within {sweeps} sweeps")]
    ConvergenceFailure { sweeps: usize },
    #[error("nonfinite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("invalid matrix order {0}")]
    InvalidOrder(usize),
    #[error("expected {expected} upper-triangle entries, got {got}")]
    BadLength { expected: usize, got: usize },
    #[error("unsupported order {order} (supported: {supported})")]
    UnsupportedOrder { order: usize, supported: &'static str },
    #[error("diagonal entry {index} is not strictly positive")]
    NonpositiveDiagonal { index: usize },
    #[error("negative diagonal entry {index} = {value:e}")]
    NonnegativeDiagonalViolated { index: usize, value: f64 },
    #[error("simplex lattice of {points} points exceeds the cap of {cap}")]
    ResourceCap { points: u128, cap: u128 },
    #[error("off-diagonal sign pattern not supported: {0}")]
    SignPatternError(String),
    #[error("argument out of domain: {0}")]
    DomainError(String),
    #[error("cone projection vanishes")]
    ZeroProjection,
}

pub type Result<T> = std::result::Result<T, CopoError>;
