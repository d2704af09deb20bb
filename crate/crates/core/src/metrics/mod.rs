//! Similarity scores, hard and soft agreement rates, the one-hot reduction
//! and the eta interpretation.
//!
//! Everything here is a pure function of its inputs.

mod grouping;
mod rate;
mod similarity;
mod vector;

use thiserror::Error;

pub use grouping::{one_hot_embed, EquivalenceGrouping};
pub use rate::{agreement_rate, eta, overall_soft_agreement, soft_agreement_rate, RateKind, RateValue};
pub use similarity::{cosine_similarity, jaccard_similarity, SimilarityKind};
pub use vector::DescriptionVector;

pub(crate) use rate::{packed_sar, CompensatedSum};
pub(crate) use vector::words_for;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("flag at index {index} is {value}, expected 0 or 1")]
    NonBinary { index: usize, value: u8 },
    #[error("index {index} out of range for {dims} dimensions")]
    IndexOutOfRange { index: usize, dims: usize },
    #[error("expected {expected} packed words, got {actual}")]
    WordCount { expected: usize, actual: usize },
    #[error("pairwise agreement needs at least 2 proposals, got {0}")]
    TooFewProposals(usize),
    #[error("invalid grouping: {0}")]
    InvalidGrouping(String),
    #[error("inconsistent assignment: {0}")]
    InvalidAssignment(String),
    #[error("rate {0} outside [0, 1]")]
    RateOutOfRange(f64),
    #[error("expected {expected} rates, got {actual}")]
    KindMismatch { expected: RateKind, actual: RateKind },
    #[error("empty input")]
    Empty,
    #[error("unknown similarity '{0}' (expected jaccard or cosine)")]
    UnknownSimilarity(String),
}
