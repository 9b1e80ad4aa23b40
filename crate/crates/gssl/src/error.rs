//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("sample count must be at least 1")]
    EmptySample,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("indicator must be binary (0/1), found {0} at index {1}")]
    NonBinaryIndicator(f64, usize),

    #[error("matrix is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive semidefinite (eigenvalue {0:.3e})")]
    NotPositiveSemidefinite(f64),

    #[error("signal is zero")]
    ZeroSignal,

    #[error("label index {0} out of range for {1} nodes")]
    LabelOutOfRange(usize, usize),

    #[error("band is empty: theta {theta:.3e} is below the smallest eigenvalue {lambda_min:.3e}")]
    EmptyBand { theta: f64, lambda_min: f64 },

    #[error("all nodes are labeled; unlabeled error is undefined")]
    NoUnlabeledNodes,

    #[error("cut quadratic-form cross check failed: direct {direct:.12e} vs n*f'Lf {quadratic:.12e}")]
    CutCrossCheck { direct: f64, quadratic: f64 },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("experiment failed: {failed} of {total} repetitions errored")]
    TooManyFailedRepetitions { failed: usize, total: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
