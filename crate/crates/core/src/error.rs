use thiserror::Error;

use crate::picard_solver::ContractionReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite position for particle {particle} at t = {time}")]
    BlowUp { particle: usize, time: f64 },

    #[error("support size {n} exceeds the exact-assignment cap {cap}; use w1_exact_1d for d = 1 or subsample")]
    SupportTooLarge { n: usize, cap: usize },

    #[error("uncovered case: {0}")]
    UncoveredCase(String),

    #[error("Picard iteration did not converge after {} iterations", .0.distances.len())]
    NotConverged(Box<ContractionReport>),

    #[error("{aborted} of {total} replications blew up (limit 5%)")]
    TooManyBlowUps { aborted: usize, total: usize },

    #[error("malformed event log: {0}")]
    EventLog(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
