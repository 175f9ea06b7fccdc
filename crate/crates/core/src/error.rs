//! Error types shared across the crate.

/// Crate-wide error type.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Dimensions of two objects that must agree do not.
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// A parameter is outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),
    /// Non-finite values or other numerical breakdown.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// A linear system is singular or a point sits on the spectrum.
    #[error("singularity: {0}")]
    Singular(String),
    /// An adaptive quadrature hit its refinement cap before reaching the
    /// requested tolerance. Carries the error actually achieved.
    #[error("quadrature did not converge: achieved {achieved:.3e}, requested {requested:.3e}")]
    QuadratureNoConvergence { achieved: f64, requested: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
