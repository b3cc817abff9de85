use thiserror::Error;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The argument lies outside the domain where the requested branch is valid.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iteration failed to converge, or produced a non-finite value.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// Newton converged to the removable zero at the origin.
    #[error("spurious root: iteration converged to |lambda| = {modulus:.3e} < 0.5")]
    SpuriousRoot { modulus: f64 },

    /// A contour passes too close to a zero of the integrand.
    #[error("contour too close to a root: |F| = {min_modulus:.3e} on the boundary")]
    BoundaryTooClose { min_modulus: f64 },
}

impl Error {
    /// True for the errors the CLI reports as numerical failures (exit code 3).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NumericalFailure(_) | Error::SpuriousRoot { .. } | Error::BoundaryTooClose { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
