use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{syntax_error, DescriptorTaxonomy, StudyError};
use crate::metrics::{DescriptionVector, EquivalenceGrouping};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Referent {
    pub id: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Proposal {
    pub id: String,
    pub referent_id: String,
    pub participant_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub media_ref: Option<String>,
}

/// On-disk `study.json` layout, before cross-reference checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyDocument {
    pub taxonomy_version: String,
    pub referents: Vec<Referent>,
    pub participants: Vec<String>,
    pub proposals: Vec<Proposal>,
    #[serde(default)]
    pub annotations: BTreeMap<String, DescriptionVector>,
    /// Referent id to a partition of its proposal ids.
    #[serde(default)]
    pub groupings: BTreeMap<String, Vec<Vec<String>>>,
}

/// A study document that passed validation against a taxonomy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StudyDataset {
    doc: StudyDocument,
    proposals_per_referent: usize,
}

fn check_unique<'a>(ids: impl Iterator<Item = &'a str>, what: &str) -> Result<(), StudyError> {
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for (i, id) in ids.enumerate() {
        if id.trim().is_empty() {
            return Err(StudyError::invalid(format!("{what}[{i}]"), "empty id"));
        }
        if let Some(first) = seen.insert(id, i) {
            return Err(StudyError::invalid(
                format!("{what}[{i}]"),
                format!("duplicate id '{id}' (first used at {what}[{first}])"),
            ));
        }
    }
    Ok(())
}

impl StudyDataset {
    pub fn validate(doc: StudyDocument, taxonomy: &DescriptorTaxonomy) -> Result<Self, StudyError> {
        if doc.taxonomy_version != taxonomy.version {
            return Err(StudyError::invalid(
                "taxonomy_version",
                format!(
                    "dataset targets taxonomy '{}' but '{}' was supplied",
                    doc.taxonomy_version, taxonomy.version
                ),
            ));
        }
        check_unique(doc.referents.iter().map(|r| r.id.as_str()), "referents")?;
        check_unique(doc.participants.iter().map(String::as_str), "participants")?;
        check_unique(doc.proposals.iter().map(|p| p.id.as_str()), "proposals")?;

        let referents: HashSet<&str> = doc.referents.iter().map(|r| r.id.as_str()).collect();
        let participants: HashSet<&str> = doc.participants.iter().map(String::as_str).collect();
        let mut per_referent: HashMap<&str, usize> = HashMap::new();
        for (i, p) in doc.proposals.iter().enumerate() {
            if !referents.contains(p.referent_id.as_str()) {
                return Err(StudyError::invalid(
                    format!("proposals[{i}].referent_id"),
                    format!("unknown referent '{}'", p.referent_id),
                ));
            }
            if !participants.contains(p.participant_id.as_str()) {
                return Err(StudyError::invalid(
                    format!("proposals[{i}].participant_id"),
                    format!("unknown participant '{}'", p.participant_id),
                ));
            }
            *per_referent.entry(p.referent_id.as_str()).or_default() += 1;
        }

        // Every referent must carry the same number of proposals N.
        let mut expected: Option<(&str, usize)> = None;
        for (i, r) in doc.referents.iter().enumerate() {
            let n = per_referent.get(r.id.as_str()).copied().unwrap_or(0);
            match expected {
                None => expected = Some((r.id.as_str(), n)),
                Some((first, m)) if m != n => {
                    return Err(StudyError::invalid(
                        format!("referents[{i}]"),
                        format!(
                            "referent '{}' has {n} proposals but '{first}' has {m}; \
                             every referent needs the same number of proposals",
                            r.id
                        ),
                    ));
                }
                Some(_) => {}
            }
        }

        let proposal_referent: HashMap<&str, &str> = doc
            .proposals
            .iter()
            .map(|p| (p.id.as_str(), p.referent_id.as_str()))
            .collect();
        for (pid, v) in &doc.annotations {
            if !proposal_referent.contains_key(pid.as_str()) {
                return Err(StudyError::invalid(
                    format!("annotations.{pid}"),
                    "unknown proposal",
                ));
            }
            if v.dims() != taxonomy.dims() {
                return Err(StudyError::invalid(
                    format!("annotations.{pid}"),
                    format!("vector has {} entries, taxonomy has {} descriptors", v.dims(), taxonomy.dims()),
                ));
            }
        }

        for (rid, groups) in &doc.groupings {
            if !referents.contains(rid.as_str()) {
                return Err(StudyError::invalid(format!("groupings.{rid}"), "unknown referent"));
            }
            let mut covered = HashSet::new();
            for (g, group) in groups.iter().enumerate() {
                if group.is_empty() {
                    return Err(StudyError::invalid(format!("groupings.{rid}[{g}]"), "empty group"));
                }
                for pid in group {
                    match proposal_referent.get(pid.as_str()) {
                        None => {
                            return Err(StudyError::invalid(
                                format!("groupings.{rid}[{g}]"),
                                format!("unknown proposal '{pid}'"),
                            ))
                        }
                        Some(owner) if *owner != rid => {
                            return Err(StudyError::invalid(
                                format!("groupings.{rid}[{g}]"),
                                format!("proposal '{pid}' belongs to referent '{owner}'"),
                            ))
                        }
                        Some(_) => {}
                    }
                    if !covered.insert(pid.as_str()) {
                        return Err(StudyError::invalid(
                            format!("groupings.{rid}[{g}]"),
                            format!("proposal '{pid}' appears in more than one group"),
                        ));
                    }
                }
            }
            let n = per_referent.get(rid.as_str()).copied().unwrap_or(0);
            if covered.len() != n {
                return Err(StudyError::invalid(
                    format!("groupings.{rid}"),
                    format!("partition covers {} of the referent's {n} proposals", covered.len()),
                ));
            }
        }

        let proposals_per_referent = expected.map_or(0, |(_, n)| n);
        Ok(Self {
            doc,
            proposals_per_referent,
        })
    }

    pub fn document(&self) -> &StudyDocument {
        &self.doc
    }

    pub fn into_document(self) -> StudyDocument {
        self.doc
    }

    /// N, shared by every referent.
    pub fn proposals_per_referent(&self) -> usize {
        self.proposals_per_referent
    }

    pub fn referents(&self) -> &[Referent] {
        &self.doc.referents
    }

    pub fn proposals(&self) -> &[Proposal] {
        &self.doc.proposals
    }

    pub fn referent(&self, id: &str) -> Option<&Referent> {
        self.doc.referents.iter().find(|r| r.id == id)
    }

    pub fn proposal(&self, id: &str) -> Option<&Proposal> {
        self.doc.proposals.iter().find(|p| p.id == id)
    }

    /// The referent's proposals in document order.
    pub fn proposals_for<'a>(&'a self, referent_id: &'a str) -> impl Iterator<Item = &'a Proposal> + 'a {
        self.doc.proposals.iter().filter(move |p| p.referent_id == referent_id)
    }

    pub fn annotation(&self, proposal_id: &str) -> Option<&DescriptionVector> {
        self.doc.annotations.get(proposal_id)
    }

    /// The referent's grouping with the class index of each of its
    /// proposals, in document order.
    pub fn grouping_for(&self, referent_id: &str) -> Option<(EquivalenceGrouping, Vec<usize>)> {
        let groups = self.doc.groupings.get(referent_id)?;
        let class_of: HashMap<&str, usize> = groups
            .iter()
            .enumerate()
            .flat_map(|(g, ids)| ids.iter().map(move |id| (id.as_str(), g)))
            .collect();
        let assignment: Vec<usize> = self
            .proposals_for(referent_id)
            .map(|p| class_of[p.id.as_str()])
            .collect();
        let grouping = EquivalenceGrouping::new(groups.iter().map(Vec::len).collect())
            .expect("validated partition has non-empty groups");
        Some((grouping, assignment))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.doc).expect("dataset serializes") + "\n"
    }
}

pub fn parse_dataset(text: &str, taxonomy: &DescriptorTaxonomy) -> Result<StudyDataset, StudyError> {
    let doc: StudyDocument = serde_json::from_str(text).map_err(syntax_error)?;
    StudyDataset::validate(doc, taxonomy)
}
