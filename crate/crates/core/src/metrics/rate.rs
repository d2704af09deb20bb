use std::fmt;

use serde::{Deserialize, Serialize};

use super::similarity::and_count;
use super::{DescriptionVector, EquivalenceGrouping, MetricsError, SimilarityKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RateKind {
    /// Hard agreement rate over equivalence classes.
    #[serde(rename = "ar")]
    Ar,
    /// Soft agreement rate over description vectors.
    #[serde(rename = "sar")]
    Sar,
}

impl fmt::Display for RateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RateKind::Ar => "AR",
            RateKind::Sar => "SAR",
        })
    }
}

/// An agreement rate in `[0, 1]`, tagged with how it was computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateValue {
    value: f64,
    kind: RateKind,
}

impl RateValue {
    pub fn new(value: f64, kind: RateKind) -> Result<Self, MetricsError> {
        if !(0.0..=1.0).contains(&value) {
            return Err(MetricsError::RateOutOfRange(value));
        }
        Ok(Self { value, kind })
    }

    pub fn value(self) -> f64 {
        self.value
    }

    pub fn kind(self) -> RateKind {
        self.kind
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn total(self) -> f64 {
        self.sum + self.carry
    }
}

/// Hard agreement rate: `sum |P_i|(|P_i| - 1) / (N(N - 1))`.
///
/// Computed in integers with a single final division.
pub fn agreement_rate(grouping: &EquivalenceGrouping) -> Result<RateValue, MetricsError> {
    let n = grouping.n_total() as u128;
    if n < 2 {
        return Err(MetricsError::TooFewProposals(grouping.n_total()));
    }
    let agreeing: u128 = grouping
        .group_sizes()
        .iter()
        .map(|&s| s as u128 * (s as u128 - 1))
        .sum();
    RateValue::new(agreeing as f64 / (n * (n - 1)) as f64, RateKind::Ar)
}

/// Mean pairwise similarity over all unordered pairs of proposals.
pub fn soft_agreement_rate(
    vectors: &[DescriptionVector],
    sim: SimilarityKind,
) -> Result<RateValue, MetricsError> {
    if vectors.len() < 2 {
        return Err(MetricsError::TooFewProposals(vectors.len()));
    }
    let dims = vectors[0].dims();
    if let Some(bad) = vectors.iter().find(|v| v.dims() != dims) {
        return Err(MetricsError::DimensionMismatch {
            left: dims,
            right: bad.dims(),
        });
    }
    let stride = vectors[0].words().len();
    let mut words = Vec::with_capacity(stride * vectors.len());
    for v in vectors {
        words.extend_from_slice(v.words());
    }
    let ones: Vec<u32> = vectors.iter().map(DescriptionVector::count_ones).collect();
    let value = packed_sar(&words, stride, &ones, sim);
    RateValue::new(value.min(1.0), RateKind::Sar)
}

/// SAR over `ones.len()` vectors stored back to back in `words`, `stride`
/// words each. `ones[k]` must be the popcount of vector `k`.
pub(crate) fn packed_sar(words: &[u64], stride: usize, ones: &[u32], sim: SimilarityKind) -> f64 {
    let n = ones.len();
    debug_assert!(n >= 2);
    debug_assert_eq!(words.len(), stride * n);
    let mut acc = CompensatedSum::default();
    for k in 0..n {
        let wk = &words[k * stride..(k + 1) * stride];
        for j in k + 1..n {
            let wj = &words[j * stride..(j + 1) * stride];
            acc.add(sim.of_counts(ones[k], ones[j], and_count(wk, wj)));
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    acc.total() / pairs
}

/// Unweighted mean of per-referent soft agreement rates.
pub fn overall_soft_agreement(per_referent: &[RateValue]) -> Result<f64, MetricsError> {
    if per_referent.is_empty() {
        return Err(MetricsError::Empty);
    }
    if let Some(r) = per_referent.iter().find(|r| r.kind() != RateKind::Sar) {
        return Err(MetricsError::KindMismatch {
            expected: RateKind::Sar,
            actual: r.kind(),
        });
    }
    let mut acc = CompensatedSum::default();
    for r in per_referent {
        acc.add(r.value());
    }
    Ok(acc.total() / per_referent.len() as f64)
}

/// Approximate percentage of participants in agreement: `100 * sqrt(rate)`.
pub fn eta(rate: RateValue) -> f64 {
    100.0 * rate.value().sqrt()
}
