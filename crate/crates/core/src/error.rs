use num_complex::Complex64;
use thiserror::Error;

/// Failures surfaced by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("operator is not a contraction (norm {norm:.3e})")]
    NotAContraction { norm: f64 },

    #[error("point {lambda} lies outside the open unit disk")]
    DomainError { lambda: Complex64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("constraint Z(λ)|_F = ω violated (residual {residual:.3e})")]
    ConstraintViolated { residual: f64 },

    #[error("resolvent is numerically singular (condition {condition:.3e})")]
    SingularResolvent { condition: f64 },

    #[error("input does not solve the interpolation problem: {0}")]
    NotASolution(String),

    #[error("W(0) deviates from the identity by {error:.3e}")]
    WNotNormalizedAtZero { error: f64 },

    #[error("generator least squares left residual {residual:.3e}")]
    InconsistentGenerators { residual: f64 },

    #[error("truncation degree {degree} too small, need at least {required}")]
    DegreeTooSmall { degree: usize, required: usize },

    #[error("state matrix has spectral radius >= 1, Gramian series diverges")]
    Unstable,

    #[error("parameter function is outside the admissible set (residual {residual:.3e})")]
    NotInParameterSet { residual: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
