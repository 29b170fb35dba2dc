use thiserror::Error;

/// Errors raised by the graph signal processing routines.
#[derive(Debug, Error)]
pub enum GspError {
    /// Input violates a structural invariant (symmetry, sign, shape).
    #[error("validation failed: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    /// A scalar parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A filter or recursion would diverge.
    #[error("unstable filter: {0}")]
    Instability(String),

    /// A transfer function was evaluated on one of its poles.
    #[error("singularity: {0}")]
    Singularity(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The sampling set does not satisfy the rank condition.
    #[error("sampling set violates the rank condition rank(Phi U_k) = k (sigma_min = {sigma_min:e}, k = {k})")]
    RankDeficient { sigma_min: f64, k: usize },

    #[error("problem is under-determined: {0}")]
    Underdetermined(String),

    #[error("insufficient calibration data: {found} signals, need at least {required}")]
    InsufficientCalibration { found: usize, required: usize },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, GspError>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(GspError::Dimension { expected, found })
    }
}
