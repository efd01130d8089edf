use thiserror::Error;

use crate::providers::ProviderError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot parse statement: {text:?}")]
    Parse { text: String },

    #[error("candidate chain has no steps")]
    EmptyCandidate,

    #[error("no candidates supplied to the gate")]
    NoCandidates,

    #[error("context window has {rows} embedding rows; at least 2 are required")]
    DegenerateContext { rows: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error("invalid NLI distribution: entailment={entailment}, neutral={neutral}, contradiction={contradiction}")]
    InvalidDistribution {
        entailment: f64,
        neutral: f64,
        contradiction: f64,
    },

    #[error("percentile of an empty sample")]
    EmptySample,

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("distractor pool exhausted for category {category:?} after all backoff levels")]
    PoolExhausted { category: String },

    #[error("generation stalled: {emitted} of {requested} samples after {draws} draws ({skipped} skipped)")]
    GenerationStalled {
        requested: usize,
        emitted: usize,
        draws: usize,
        skipped: usize,
    },

    #[error("unknown method {0:?}")]
    UnknownMethod(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid pool data at line {line}: {reason}")]
    PoolFormat { line: usize, reason: String },

    #[error(transparent)]
    Provider(#[from] ProviderError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
