//! Annotation store: the study definition plus a JSON-lines journal of
//! submissions, last write wins per (proposal, annotator).
//!
//! Layout of the data directory:
//!
//! * `taxonomy.json`: descriptor taxonomy
//! * `study.json`: referents, participants, proposals, groupings. Compaction
//!   rewrites its `annotations` with the majority-vote vectors.
//! * `annotations.jsonl`: one [`Submission`] per line, append-only between
//!   compactions.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use consensus_core::metrics::{DescriptionVector, SimilarityKind};
use consensus_core::study::{
    build_report, load_dataset, load_taxonomy, write_atomic, AgreementReport, DescriptorTaxonomy,
    ReportOptions, StudyDataset, StudyError,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const TAXONOMY_FILE: &str = "taxonomy.json";
pub const STUDY_FILE: &str = "study.json";
pub const JOURNAL_FILE: &str = "annotations.jsonl";

/// Annotator id given to annotations found in `study.json` when the
/// journal is empty.
pub const IMPORTED_ANNOTATOR: &str = "imported";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error(transparent)]
    Study(#[from] StudyError),
    #[error("{path}: {error}")]
    Io { path: PathBuf, error: io::Error },
    #[error("{path}:{line}: {message}")]
    Journal {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

#[derive(Debug, Error)]
pub enum SubmitError {
    #[error("unknown proposal '{0}'")]
    UnknownProposal(String),
    #[error("unknown descriptor ids: {}", .0.join(", "))]
    UnknownDescriptors(Vec<String>),
    #[error("{0}")]
    Invalid(String),
    #[error("failed to persist annotation: {0}")]
    Io(#[from] io::Error),
}

/// One annotator's descriptor set for one proposal, as journaled.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Submission {
    pub proposal_id: String,
    pub annotator_id: String,
    /// Present descriptors, in taxonomy order.
    pub descriptor_ids: Vec<String>,
    /// RFC 3339 timestamp.
    pub submitted_at: String,
}

/// How per-annotator vectors are merged into one vector per proposal.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Aggregation {
    /// A descriptor is present when more than half of the proposal's
    /// annotators marked it; ties count as absent.
    #[default]
    Majority,
    /// Use only this annotator's vectors.
    Annotator(String),
}

pub struct Store {
    dir: PathBuf,
    taxonomy: DescriptorTaxonomy,
    dataset: StudyDataset,
    submissions: BTreeMap<(String, String), (Submission, DescriptionVector)>,
    journal: File,
    dirty: bool,
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |error| StoreError::Io {
        path: path.to_path_buf(),
        error,
    }
}

fn journal_line(s: &Submission) -> String {
    serde_json::to_string(s).expect("submission serializes") + "\n"
}

impl Store {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let dir = dir.into();
        let taxonomy = load_taxonomy(&dir.join(TAXONOMY_FILE))?;
        let dataset = load_dataset(&dir.join(STUDY_FILE), &taxonomy)?;
        let journal_path = dir.join(JOURNAL_FILE);

        let mut store = Self {
            journal: open_append(&journal_path)?,
            dir,
            taxonomy,
            dataset,
            submissions: BTreeMap::new(),
            dirty: false,
        };
        let entries = store.replay_journal(&journal_path)?;
        if entries == 0 && !store.dataset.document().annotations.is_empty() {
            store.import_dataset_annotations()?;
        }
        Ok(store)
    }

    fn replay_journal(&mut self, path: &Path) -> Result<usize, StoreError> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let mut offset = 0usize;
        let mut entries = 0;
        let mut segments = text.split_inclusive('\n').enumerate().peekable();
        while let Some((i, segment)) = segments.next() {
            let line = segment.trim_end_matches('\n');
            let complete = segment.ends_with('\n');
            if !line.trim().is_empty() {
                let parsed = serde_json::from_str::<Submission>(line)
                    .map_err(|e| e.to_string())
                    .and_then(|s| self.resolve(&s).map(|v| (s, v)).map_err(|e| e.to_string()));
                match parsed {
                    Ok((s, v)) => {
                        self.submissions
                            .insert((s.proposal_id.clone(), s.annotator_id.clone()), (s, v));
                        entries += 1;
                    }
                    // A write cut short by a crash: drop the partial tail.
                    Err(message) if !complete && segments.peek().is_none() => {
                        tracing::warn!(line = i + 1, %message, "discarding truncated journal tail");
                        self.journal.set_len(offset as u64).map_err(io_err(path))?;
                        break;
                    }
                    Err(message) => {
                        return Err(StoreError::Journal {
                            path: path.to_path_buf(),
                            line: i + 1,
                            message,
                        })
                    }
                }
            }
            offset += segment.len();
        }
        Ok(entries)
    }

    fn import_dataset_annotations(&mut self) -> Result<(), StoreError> {
        let now = chrono::Utc::now().to_rfc3339();
        let mut batch = String::new();
        let imported: Vec<_> = self
            .dataset
            .document()
            .annotations
            .iter()
            .map(|(pid, v)| Submission {
                proposal_id: pid.clone(),
                annotator_id: IMPORTED_ANNOTATOR.into(),
                descriptor_ids: self.taxonomy.ids_of(v).into_iter().map(String::from).collect(),
                submitted_at: now.clone(),
            })
            .collect();
        for s in imported {
            batch.push_str(&journal_line(&s));
            let v = self.resolve(&s).expect("dataset annotations match the taxonomy");
            self.submissions
                .insert((s.proposal_id.clone(), s.annotator_id.clone()), (s, v));
        }
        let path = self.dir.join(JOURNAL_FILE);
        self.journal.write_all(batch.as_bytes()).map_err(io_err(&path))?;
        self.journal.sync_data().map_err(io_err(&path))?;
        Ok(())
    }

    fn resolve(&self, s: &Submission) -> Result<DescriptionVector, SubmitError> {
        if self.dataset.proposal(&s.proposal_id).is_none() {
            return Err(SubmitError::UnknownProposal(s.proposal_id.clone()));
        }
        if s.annotator_id.trim().is_empty() {
            return Err(SubmitError::Invalid("annotator_id must not be empty".into()));
        }
        self.taxonomy
            .vector_from_ids(&s.descriptor_ids)
            .map_err(SubmitError::UnknownDescriptors)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn taxonomy(&self) -> &DescriptorTaxonomy {
        &self.taxonomy
    }

    pub fn dataset(&self) -> &StudyDataset {
        &self.dataset
    }

    /// Validates, journals (fsync) and applies a submission. Replaces any
    /// earlier submission by the same annotator for the same proposal.
    pub fn submit(
        &mut self,
        proposal_id: &str,
        annotator_id: &str,
        descriptor_ids: &[String],
        submitted_at: Option<String>,
    ) -> Result<(Submission, DescriptionVector), SubmitError> {
        let submitted_at = match submitted_at {
            Some(ts) => chrono::DateTime::parse_from_rfc3339(&ts)
                .map(|_| ts)
                .map_err(|e| SubmitError::Invalid(format!("submitted_at: {e}")))?,
            None => chrono::Utc::now().to_rfc3339(),
        };
        let draft = Submission {
            proposal_id: proposal_id.into(),
            annotator_id: annotator_id.into(),
            descriptor_ids: descriptor_ids.to_vec(),
            submitted_at,
        };
        let vector = self.resolve(&draft)?;
        let submission = Submission {
            descriptor_ids: self.taxonomy.ids_of(&vector).into_iter().map(String::from).collect(),
            ..draft
        };
        self.journal.write_all(journal_line(&submission).as_bytes())?;
        self.journal.sync_data()?;
        self.submissions.insert(
            (submission.proposal_id.clone(), submission.annotator_id.clone()),
            (submission.clone(), vector.clone()),
        );
        self.dirty = true;
        Ok((submission, vector))
    }

    pub fn get(&self, proposal_id: &str, annotator_id: &str) -> Option<&(Submission, DescriptionVector)> {
        self.submissions
            .get(&(proposal_id.to_string(), annotator_id.to_string()))
    }

    /// Annotators who have annotated `proposal_id`, sorted.
    pub fn annotators_for(&self, proposal_id: &str) -> Vec<&str> {
        self.submissions
            .range((proposal_id.to_string(), String::new())..)
            .take_while(|((pid, _), _)| pid == proposal_id)
            .map(|((_, a), _)| a.as_str())
            .collect()
    }

    pub fn submission_count(&self) -> usize {
        self.submissions.len()
    }

    /// One vector per annotated proposal under `agg`.
    pub fn aggregate(&self, agg: &Aggregation) -> BTreeMap<String, DescriptionVector> {
        match agg {
            Aggregation::Annotator(who) => self
                .submissions
                .iter()
                .filter(|((_, a), _)| a == who)
                .map(|((pid, _), (_, v))| (pid.clone(), v.clone()))
                .collect(),
            Aggregation::Majority => {
                let dims = self.taxonomy.dims();
                let mut votes: BTreeMap<&str, (usize, Vec<usize>)> = BTreeMap::new();
                for ((pid, _), (_, v)) in &self.submissions {
                    let (n, counts) = votes.entry(pid.as_str()).or_insert_with(|| (0, vec![0; dims]));
                    *n += 1;
                    for i in v.ones() {
                        counts[i] += 1;
                    }
                }
                votes
                    .into_iter()
                    .map(|(pid, (n, counts))| {
                        let bits: Vec<bool> = counts.iter().map(|&c| 2 * c > n).collect();
                        (pid.to_string(), DescriptionVector::from_bools(&bits))
                    })
                    .collect()
            }
        }
    }

    /// The study with its annotations replaced by the aggregated vectors.
    pub fn export(&self, agg: &Aggregation) -> StudyDataset {
        let mut doc = self.dataset.document().clone();
        doc.annotations = self.aggregate(agg);
        StudyDataset::validate(doc, &self.taxonomy).expect("store contents validate")
    }

    pub fn report(&self, agg: &Aggregation, similarity: SimilarityKind) -> AgreementReport {
        let opts = ReportOptions {
            similarity,
            ..Default::default()
        };
        build_report(&self.export(agg), &opts)
    }

    pub fn is_dirty(&self) -> bool {
        self.dirty
    }

    /// Writes the majority-vote study to `study.json` and rewrites the
    /// journal down to one line per (proposal, annotator). Both files are
    /// replaced atomically.
    pub fn compact(&mut self) -> Result<(), StoreError> {
        let study_path = self.dir.join(STUDY_FILE);
        let exported = self.export(&Aggregation::Majority);
        write_atomic(&study_path, exported.to_json().as_bytes()).map_err(io_err(&study_path))?;

        let journal_path = self.dir.join(JOURNAL_FILE);
        let lines: String = self.submissions.values().map(|(s, _)| journal_line(s)).collect();
        write_atomic(&journal_path, lines.as_bytes()).map_err(io_err(&journal_path))?;
        self.journal = open_append(&journal_path)?;
        self.dirty = false;
        Ok(())
    }
}

fn open_append(path: &Path) -> Result<File, StoreError> {
    OpenOptions::new()
        .create(true)
        .append(true)
        .read(true)
        .open(path)
        .map_err(io_err(path))
}
