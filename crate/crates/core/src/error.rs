use std::path::PathBuf;

use thiserror::Error;

use crate::data::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dataset: {}", format_violations(.0))]
    InvalidDataset(Vec<Violation>),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("bandwidth must be positive and finite, got {0}")]
    InvalidBandwidth(f64),

    #[error("invalid network configuration: {0}")]
    InvalidTrainConfig(String),

    #[error("training loss became non-finite at epoch {epoch}; the learning rate is probably too high")]
    NonFiniteLoss { epoch: usize },

    #[error("non-finite nonconformity score")]
    NonFiniteScore,

    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),

    #[error("probability must lie in (0, 1), got {0}")]
    InvalidProbability(f64),

    #[error("invalid grid: {0}")]
    EmptyGrid(String),

    #[error("no grid value was accepted by the conformal test")]
    EmptyAcceptedSet,

    #[error("split point {m} must lie in [1, {}]", .n.saturating_sub(1))]
    InvalidSplit { m: usize, n: usize },

    #[error("fitted value {center} lies outside the arm interval [{lo}, {hi}]")]
    CoverViolation { lo: f64, hi: f64, center: f64 },

    #[error("covariance matrix is not positive definite (rho = {rho}, d = {d})")]
    NotPositiveDefinite { rho: f64, d: usize },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("{path}: line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
