//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised by the symbolic layers and the reduction pipeline.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Incompatible operands (dimension or delay-basis mismatch).
    #[error("domain error: {0}")]
    Domain(String),

    /// Division by the zero polynomial or the zero field element.
    #[error("division by zero: {0}")]
    DivisionByZero(String),

    /// A documented operation precondition does not hold.
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    /// Degree of the zero polynomial was requested.
    #[error("degree of zero polynomial is undefined")]
    DegreeOfZero,

    /// A matrix column is identically zero where a leading coefficient is needed.
    #[error("degenerate matrix: {0}")]
    DegenerateMatrix(String),

    /// The input matrix is not of the expected structural class.
    #[error("structure violation: {0}")]
    StructureViolation(String),

    /// The shift reduction did not converge within the pass budget.
    #[error("reduction diverged: {0}")]
    ReductionDiverged(String),

    /// The leading coefficient matrix stays rank deficient.
    #[error("not reducible: {0}")]
    NotReducible(String),

    /// The pair (F, B) is not controllable; carries the achieved rank.
    #[error("pair (F, B) not controllable: rank {rank} of {dim}")]
    NotControllable { rank: usize, dim: usize },

    /// The pole-removal certificate exceeded its tolerance.
    #[error("entirety check failed: {0}")]
    EntiretyCheckFailed(String),

    /// A rational-coefficient polynomial could not be cast down to the
    /// polynomial layer.
    #[error("cannot cast to polynomial coefficients: {0}")]
    CastDown(String),

    /// A sample point fell too close to a recorded denominator root.
    #[error("sample point too close to a pole: {0}")]
    PolePoint(String),

    /// Input document violates the schema.
    #[error("invalid input: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;
