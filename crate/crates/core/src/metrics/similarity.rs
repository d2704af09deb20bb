use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{DescriptionVector, MetricsError};

/// Pairwise similarity used inside the soft agreement rate.
///
/// Hamming similarity is intentionally absent: it counts shared absence as
/// agreement.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilarityKind {
    #[default]
    Jaccard,
    Cosine,
}

impl SimilarityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SimilarityKind::Jaccard => "jaccard",
            SimilarityKind::Cosine => "cosine",
        }
    }

    pub fn compute(
        self,
        a: &DescriptionVector,
        b: &DescriptionVector,
    ) -> Result<f64, MetricsError> {
        match self {
            SimilarityKind::Jaccard => jaccard_similarity(a, b),
            SimilarityKind::Cosine => cosine_similarity(a, b),
        }
    }

    /// Similarity from the three popcounts `|a|`, `|b|`, `|a AND b|`.
    pub(crate) fn of_counts(self, ones_a: u32, ones_b: u32, both: u32) -> f64 {
        match self {
            SimilarityKind::Jaccard => jaccard_from_counts(ones_a, ones_b, both),
            SimilarityKind::Cosine => cosine_from_counts(ones_a, ones_b, both),
        }
    }
}

impl fmt::Display for SimilarityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SimilarityKind {
    type Err = MetricsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jaccard" => Ok(SimilarityKind::Jaccard),
            "cosine" => Ok(SimilarityKind::Cosine),
            other => Err(MetricsError::UnknownSimilarity(other.to_string())),
        }
    }
}

/// For binary vectors `a.b = |a AND b|` and `|a|^2 = popcount(a)`, so the
/// algebraic form `a.b / (|a|^2 + |b|^2 - a.b)` and `|a AND b| / |a OR b|`
/// share one integer numerator and denominator.
#[inline]
pub(crate) fn jaccard_from_counts(ones_a: u32, ones_b: u32, both: u32) -> f64 {
    let union = ones_a + ones_b - both;
    if union == 0 {
        0.0
    } else {
        both as f64 / union as f64
    }
}

#[inline]
pub(crate) fn cosine_from_counts(ones_a: u32, ones_b: u32, both: u32) -> f64 {
    if ones_a == 0 || ones_b == 0 {
        0.0
    } else if ones_a == ones_b && both == ones_a {
        1.0
    } else {
        both as f64 / ((ones_a as f64).sqrt() * (ones_b as f64).sqrt())
    }
}

#[inline]
pub(crate) fn and_count(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum()
}

/// Jaccard similarity with the zero-vector case defined as 0.
pub fn jaccard_similarity(a: &DescriptionVector, b: &DescriptionVector) -> Result<f64, MetricsError> {
    a.check_dims(b)?;
    Ok(jaccard_from_counts(
        a.count_ones(),
        b.count_ones(),
        and_count(a.words(), b.words()),
    ))
}

/// Cosine similarity, 0 when either vector is all-zero.
pub fn cosine_similarity(a: &DescriptionVector, b: &DescriptionVector) -> Result<f64, MetricsError> {
    a.check_dims(b)?;
    Ok(cosine_from_counts(
        a.count_ones(),
        b.count_ones(),
        and_count(a.words(), b.words()),
    ))
}
