//! Crate-wide error type.

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by simulation, estimation and experiment drivers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A scalar or structural argument is outside its documented domain.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The circulant embedding produced an eigenvalue below the negative
    /// tolerance, so the requested covariance cannot be sampled exactly.
    #[error("circulant embedding eigenvalue {min_eig:.3e} below tolerance {tol:.3e}")]
    NegativeEigenvalue { min_eig: f64, tol: f64 },

    /// Cholesky factorization of the target covariance failed.
    #[error("covariance not positive definite: pivot {pivot:.3e} at index {index}")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    /// A drift name not known to the builtin catalog.
    #[error("unknown drift `{0}` (expected `fou` or `double_well`)")]
    UnknownDrift(String),

    /// Integration produced a NaN or infinite state.
    #[error("non-finite state at step {step}")]
    NonFinite { step: usize },

    /// An operation that needs samples received an empty trajectory.
    #[error("empty trajectory")]
    EmptyTrajectory,

    /// A rate formula was asked for outside its regime of validity.
    #[error("invalid rate regime: {0}")]
    InvalidRegime(String),

    /// Log-log slope fitting needs at least three points.
    #[error("slope fit needs at least 3 points, got {0}")]
    InsufficientPoints(usize),

    /// Log-log slope fitting is only defined for positive values.
    #[error("slope fit requires positive values, got {value:.3e} at index {index}")]
    NonPositiveValue { index: usize, value: f64 },

    /// The oracle budget is too small for the requested accuracy: the
    /// split-half self-consistency difference exceeded the tolerance.
    #[error("oracle budget too small: split-half difference {observed:.3e} > tolerance {tolerance:.3e}")]
    BudgetTooSmall { observed: f64, tolerance: f64 },

    /// The contraction ODE failed to reach zero by the terminal time.
    #[error("control ODE did not contract: |rho(1)| = {rho_final:.3e} > {tolerance:.3e}")]
    Nonconvergence { rho_final: f64, tolerance: f64 },

    /// Malformed configuration file or inconsistent settings.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Shorthand for [`Error::InvalidParameter`].
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
