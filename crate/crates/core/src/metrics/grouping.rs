use serde::{Deserialize, Serialize};

use super::{DescriptionVector, MetricsError};

/// Partition of one referent's proposals into classes of identical proposals.
///
/// Only the class sizes matter for the hard agreement rate; `n_total` is
/// their sum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct EquivalenceGrouping {
    group_sizes: Vec<usize>,
    n_total: usize,
}

impl EquivalenceGrouping {
    pub fn new(group_sizes: Vec<usize>) -> Result<Self, MetricsError> {
        if group_sizes.is_empty() {
            return Err(MetricsError::InvalidGrouping("no groups".into()));
        }
        if let Some(i) = group_sizes.iter().position(|&s| s == 0) {
            return Err(MetricsError::InvalidGrouping(format!("group {i} is empty")));
        }
        let n_total = group_sizes.iter().sum();
        Ok(Self { group_sizes, n_total })
    }

    /// Derives class sizes from a per-proposal class index. Class indices
    /// must be dense: every index in `0..=max` is used at least once.
    pub fn from_assignment(assignment: &[usize]) -> Result<Self, MetricsError> {
        let groups = assignment.iter().max().map_or(0, |m| m + 1);
        let mut sizes = vec![0usize; groups];
        for &g in assignment {
            sizes[g] += 1;
        }
        Self::new(sizes)
    }

    pub fn group_sizes(&self) -> &[usize] {
        &self.group_sizes
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    /// Number of distinct proposals (u_r).
    pub fn unique_count(&self) -> usize {
        self.group_sizes.len()
    }
}

impl TryFrom<Vec<usize>> for EquivalenceGrouping {
    type Error = MetricsError;

    fn try_from(sizes: Vec<usize>) -> Result<Self, Self::Error> {
        Self::new(sizes)
    }
}

impl From<EquivalenceGrouping> for Vec<usize> {
    fn from(g: EquivalenceGrouping) -> Self {
        g.group_sizes
    }
}

/// Encodes each proposal as the one-hot vector of its class.
///
/// `assignment[j]` is the class of proposal `j`; class `i` must appear
/// exactly `group_sizes[i]` times.
pub fn one_hot_embed(
    grouping: &EquivalenceGrouping,
    assignment: &[usize],
) -> Result<Vec<DescriptionVector>, MetricsError> {
    let dims = grouping.unique_count();
    if assignment.len() != grouping.n_total() {
        return Err(MetricsError::InvalidAssignment(format!(
            "{} proposals assigned, grouping holds {}",
            assignment.len(),
            grouping.n_total()
        )));
    }
    let mut seen = vec![0usize; dims];
    for (j, &g) in assignment.iter().enumerate() {
        if g >= dims {
            return Err(MetricsError::InvalidAssignment(format!(
                "proposal {j} assigned to group {g}, only {dims} groups exist"
            )));
        }
        seen[g] += 1;
    }
    if let Some(i) = (0..dims).find(|&i| seen[i] != grouping.group_sizes()[i]) {
        return Err(MetricsError::InvalidAssignment(format!(
            "group {i} assigned {} proposals, expected {}",
            seen[i],
            grouping.group_sizes()[i]
        )));
    }
    assignment
        .iter()
        .map(|&g| DescriptionVector::from_indices(dims, &[g]))
        .collect()
}
