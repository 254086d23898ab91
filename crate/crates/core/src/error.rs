use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's precondition (shape, space tag, range).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Input data are unusable (non-finite norms, bad files).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The smallness gate `c_delta |t-s|^theta ||V|| <= target` failed.
    #[error("smallness gate violated: measured {measured:.6e} > target {target:.6e}")]
    SmallnessViolation { measured: f64, target: f64 },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("oracle failed to converge after {halvings} step halvings (last change {last_change:.3e})")]
    OracleFailure { halvings: usize, last_change: f64 },

    #[error("contraction failure at iteration {iteration}: ratio {ratio:.4}")]
    ContractionFailure { iteration: usize, ratio: f64 },

    #[error("fixed point did not converge in {iterations} iterations (relative change {change:.3e})")]
    NonConvergence { iterations: usize, change: f64 },

    #[error("gluing failure at t = {time}: seam jump {jump:.3e}")]
    GluingFailure { time: f64, jump: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
