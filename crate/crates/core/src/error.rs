use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input failed a structural check (Hermiticity, trace preservation, shape).
    #[error("validation error: {0}")]
    Validation(String),

    /// A numeric argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Singular values fall too close to the classification threshold.
    #[error("ambiguous classification: singular values {singular_values:?}")]
    AmbiguousClassification { singular_values: [f64; 3] },

    /// The operation's hypothesis does not hold for this input.
    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// A pure Bloch vector whose derivative points out of the sphere.
    #[error("inconsistent derivative: v.dv = {overlap:e} on a pure state")]
    InconsistentDerivative { overlap: f64 },

    /// An optimizer hit its iteration cap without certifying its value.
    #[error("no convergence: best value {best}, gap estimate {gap:e}")]
    NonConvergence { best: f64, gap: f64 },

    /// Two objects that must agree in size do not.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
