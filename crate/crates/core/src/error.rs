//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation received an argument outside its domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The Green kernel is singular on the diagonal.
    #[error("green kernel evaluated at coincident points")]
    CoincidentPoints,

    /// Vector/matrix shapes do not agree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// An adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature did not converge: estimated error {estimated:.3e} exceeds tolerance {tolerance:.3e}")]
    QuadratureNonConvergence { estimated: f64, tolerance: f64 },

    /// Dense linear solve failed (singular or ill-conditioned Jacobian).
    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    /// An iterative method ran out of iterations before reaching its
    /// tolerance.
    #[error("{what} exhausted its iteration budget, last residual {residual:.3e}")]
    IterationLimit { what: String, residual: f64 },

    /// Requested functionality exists in the model but has no numerical
    /// backend in this build (e.g. operator assembly outside the plane).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A system description failed validation.
    #[error("invalid system spec: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
