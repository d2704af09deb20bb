use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{syntax_error, StudyError};
use crate::metrics::DescriptionVector;

const BUNDLED_FG2020: &str = include_str!("../../fixtures/taxonomy_fg2020.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Movement,
    Orientation,
    HandState,
    Other,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::Movement,
        Category::Orientation,
        Category::HandState,
        Category::Other,
    ];
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::Movement => "movement",
            Category::Orientation => "orientation",
            Category::HandState => "hand_state",
            Category::Other => "other",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hand {
    Dominant,
    NonDominant,
    Both,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Descriptor {
    pub id: String,
    pub label: String,
    pub category: Category,
    pub hand: Hand,
}

/// Ordered descriptor list. Position `i` in `descriptors` is bit `i` of every
/// description vector built against this taxonomy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DescriptorTaxonomy {
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
    pub descriptors: Vec<Descriptor>,
}

impl DescriptorTaxonomy {
    /// The 54-descriptor gesture taxonomy shipped with the crate.
    pub fn bundled_fg2020() -> Self {
        parse_taxonomy(BUNDLED_FG2020).expect("bundled taxonomy is valid")
    }

    pub fn dims(&self) -> usize {
        self.descriptors.len()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.descriptors.iter().position(|d| d.id == id)
    }

    /// Marks the named descriptors present. On failure returns every
    /// unknown id, in input order.
    pub fn vector_from_ids<S: AsRef<str>>(&self, ids: &[S]) -> Result<DescriptionVector, Vec<String>> {
        let mut indices = Vec::with_capacity(ids.len());
        let mut unknown = Vec::new();
        for id in ids {
            match self.index_of(id.as_ref()) {
                Some(i) => indices.push(i),
                None => unknown.push(id.as_ref().to_string()),
            }
        }
        if !unknown.is_empty() {
            return Err(unknown);
        }
        Ok(DescriptionVector::from_indices(self.dims(), &indices).expect("indices come from the taxonomy"))
    }

    /// Ids of the descriptors set in `v`.
    pub fn ids_of(&self, v: &DescriptionVector) -> Vec<&str> {
        v.ones()
            .filter_map(|i| self.descriptors.get(i).map(|d| d.id.as_str()))
            .collect()
    }

    pub fn validate(&self) -> Result<(), StudyError> {
        let mut seen: HashMap<&str, usize> = HashMap::new();
        for (i, d) in self.descriptors.iter().enumerate() {
            if d.id.trim().is_empty() {
                return Err(StudyError::invalid(format!("descriptors[{i}].id"), "empty id"));
            }
            if let Some(first) = seen.insert(d.id.as_str(), i) {
                return Err(StudyError::invalid(
                    format!("descriptors[{i}].id"),
                    format!("duplicate id '{}' (first used at descriptors[{first}])", d.id),
                ));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("taxonomy serializes") + "\n"
    }
}

pub fn parse_taxonomy(text: &str) -> Result<DescriptorTaxonomy, StudyError> {
    let taxonomy: DescriptorTaxonomy = serde_json::from_str(text).map_err(syntax_error)?;
    taxonomy.validate()?;
    Ok(taxonomy)
}
