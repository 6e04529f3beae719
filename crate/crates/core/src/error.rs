//! Crate-wide error type.
//!
//! The numerical routines are contracts: each one states a validated range
//! and a target accuracy, and anything outside that range is a loud error,
//! never a silently wrong number.

/// Errors reported by the verification routines.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// The Satake parameters collide, so the Weyl character formula for the
    /// Fourier coefficients divides by a (near-)vanishing Vandermonde
    /// determinant. Callers holding a non-cuspidal form should use its
    /// closed coefficient formula instead.
    #[error("degenerate Satake parameters: |Vandermonde| = {vandermonde_abs:.3e} < 1e-8")]
    DegenerateSatake { vandermonde_abs: f64 },

    /// The argument lies outside the range in which the implementation can
    /// certify its stated accuracy.
    #[error("{what}: argument outside validated range ({detail})")]
    RangeUnsupported { what: &'static str, detail: String },

    /// Evaluation was requested too close to a pole of the function.
    #[error("{what}: within {distance:.3e} of a pole at {location}")]
    NearPole {
        what: &'static str,
        location: String,
        distance: f64,
    },

    /// A mathematical precondition on the inputs is violated.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative or adaptive procedure exhausted its budget before
    /// reaching the requested tolerance.
    #[error("{what}: achieved {achieved:.3e}, wanted {wanted:.3e}")]
    Convergence {
        what: &'static str,
        achieved: f64,
        wanted: f64,
    },

    /// Failure reading or writing the on-disk coefficient memo.
    #[error("coefficient memo: {0}")]
    Memo(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Error {
        Error::Domain(msg.into())
    }
}
