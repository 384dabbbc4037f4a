use thiserror::Error;

/// Crate-wide error type; each variant names the numerical gate that failed.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A weight evaluation left the representable exponent range; the caller
    /// should truncate its domain instead of pushing further out.
    #[error("overflow domain: {0}")]
    OverflowDomain(String),

    /// An operation that is undefined at x = 0 was asked to evaluate there.
    #[error("singular point: {0}")]
    SingularPoint(String),

    /// The root bracketing loop ran out of exponent budget.
    #[error("bracket failure: {0}")]
    BracketFailure(String),

    /// A quadrature-backed gate (orthonormality residual, Bessel check)
    /// exceeded its tolerance.
    #[error("quadrature underresolved: {0}")]
    QuadratureUnderresolved(String),

    /// A sum of squared weighted polynomial values underflowed to zero.
    #[error("degenerate sum: {0}")]
    DegenerateSum(String),

    /// The Gram solve in the Christoffel oracle lost too many digits.
    #[error("ill-conditioned solve: {0}")]
    IllConditioned(String),

    /// A sampler handed non-finite values to a norm computation.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// Requested (theorem, p) combination is outside the theorem's range.
    #[error("theorem range violation: {0}")]
    TheoremRangeViolation(String),

    /// A documented precondition was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
