use thiserror::Error;

/// Errors for Gaussian-state and protocol computations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("matrix is not symplectic (defect {0:.3e})")]
    NotSymplectic(f64),

    #[error("covariance matrix violates the uncertainty principle (min eigenvalue of V + iJ/2 is {0:.3e})")]
    Unphysical(f64),

    #[error("invalid mode index {index} for a {n_modes}-mode state")]
    InvalidMode { index: usize, n_modes: usize },

    #[error("cannot measure away the only remaining mode")]
    EmptyState,

    #[error("numerical domain error: {0}")]
    NumericalDomain(String),

    #[error("normal-form reduction failed (residual {0:.3e})")]
    ReductionFailure(f64),

    #[error("degenerate Bell measurement: {0}")]
    DegenerateMeasurement(String),

    #[error("three-mode covariance matrix violates the sideband block structure (defect {0:.3e})")]
    StructureViolation(f64),

    #[error("model inconsistency: {0}")]
    ModelInconsistency(String),

    #[error("state is not entangled (eta_minus = {0}), lifetime undefined")]
    NotEntangled(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
