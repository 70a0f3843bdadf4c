use thiserror::Error;

use crate::net::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network: {0}")]
    InvalidNetwork(ValidationReport),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("joint distribution has {cells} cells, above the cap of {cap}")]
    JointTooLarge { cells: u128, cap: u64 },

    #[error("evidence has zero probability under the network")]
    InconsistentEvidence,

    #[error("invalid evidence: {0}")]
    InvalidEvidence(String),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("runtime estimate exceeds 2^63 state-space cells")]
    EstimateOverflow,

    #[error("t_r = {t_r} is not interior to the family grid")]
    BoundaryPoint { t_r: f64 },

    #[error("no t_r on the grid places the target inside any execution-time bin")]
    NoFeasibleTarget,

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("observed reduction ratio {rho} > 1: best-so-far estimate worsened")]
    RatioAboveOne { rho: f64 },

    #[error("trial on network {network} failed: {message}")]
    TrialFailed { network: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(format!("line {} column {}: {}", e.line(), e.column(), e))
    }
}
