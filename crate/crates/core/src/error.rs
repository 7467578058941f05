use thiserror::Error;

/// Errors raised by the quantization library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AqError {
    #[error("empty sample")]
    EmptySample,

    #[error("non-finite datum")]
    NonFinite,

    #[error("cannot fit empty cluster")]
    EmptyCluster,

    #[error("unranked input: value {0} outside [0, 1]")]
    UnrankedInput(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("family mismatch: {0}")]
    FamilyMismatch(String),

    #[error("more clusters than points ({clusters} clusters, {points} points)")]
    TooFewPoints { clusters: usize, points: usize },

    #[error("merge explosion: {clusters} clusters exceeds the limit of {limit}")]
    MergeExplosion { clusters: usize, limit: usize },

    #[error("invalid clustering: {0}")]
    InvalidClustering(String),
}

pub type Result<T> = std::result::Result<T, AqError>;
