//! Error type shared by every module of the crate.

use num_complex::Complex64;
use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes of the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the requested function.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative or adaptive scheme failed to reach its tolerance.
    #[error("convergence failure in {context}: best estimate {estimate}, error bound {error_bound:e}")]
    Convergence {
        context: String,
        estimate: Complex64,
        error_bound: f64,
    },

    /// A point lies on a branch cut and no side was requested.
    #[error("point {0} lies on a branch cut; request a boundary side explicitly")]
    OnCut(Complex64),

    /// A denominator or Jacobian vanished.
    #[error("singularity: {0}")]
    Singular(String),

    /// Invalid user-facing input (partition, grid shapes and so on).
    #[error("invalid input: {0}")]
    Input(String),

    /// Spectral root isolation failed.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// A contour tracer hit a critical point of the phase.
    #[error("saddle encountered at {0} while tracing a level curve")]
    Saddle(Complex64),

    /// A quadrature path would cross a branch cut.
    #[error("path error: {0}")]
    Path(String),

    /// A root search failed to bracket its target.
    #[error("search error: {0}")]
    Search(String),

    /// The point lies in a space-time region the operation does not cover.
    #[error("region error: {0}")]
    Region(String),

    /// A limiting configuration makes a formula degenerate.
    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    /// Internal consistency check failed (reality, residual, radicand).
    #[error("consistency error: {0}")]
    Consistency(String),

    /// Theta denominator vanished.
    #[error("theta function denominator vanished at {0}")]
    ThetaZero(Complex64),

    /// Direct solver lost norm or produced non-finite values.
    #[error("solver instability at t = {t}: {reason}")]
    Instability { t: f64, reason: String },

    /// Configuration file problems.
    #[error("config error: {0}")]
    Config(String),
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
