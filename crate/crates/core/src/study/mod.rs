//! Study files: descriptor taxonomies, datasets and agreement reports.
//!
//! All formats are UTF-8 JSON with snake_case field names; reports can also
//! be written as CSV or a markdown table.

mod dataset;
mod report;
mod taxonomy;

use std::io;
use std::path::Path;

use thiserror::Error;

pub use dataset::{parse_dataset, Proposal, Referent, StudyDataset, StudyDocument};
pub use report::{
    build_report, mean_std, parse_report_csv, parse_report_json, write_report, AgreementMode,
    AgreementReport, ColumnStats, ReportFormat, ReportOptions, ReportRow, ReportSummary,
    ReportTable, ReportWarning, StdKind, TableRow, WriteOptions, MEAN_ROW, STD_ROW,
};
pub use taxonomy::{parse_taxonomy, Category, Descriptor, DescriptorTaxonomy, Hand};

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("csv: {0}")]
    Csv(String),
    #[error("{path}: {error}")]
    Io { path: String, error: io::Error },
}

impl StudyError {
    pub(crate) fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        StudyError::Invalid {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub(crate) fn syntax_error(e: serde_json::Error) -> StudyError {
    StudyError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

pub fn read_to_string(path: &Path) -> Result<String, StudyError> {
    std::fs::read_to_string(path).map_err(|error| StudyError::Io {
        path: path.display().to_string(),
        error,
    })
}

pub fn load_taxonomy(path: &Path) -> Result<DescriptorTaxonomy, StudyError> {
    parse_taxonomy(&read_to_string(path)?)
}

pub fn load_dataset(path: &Path, taxonomy: &DescriptorTaxonomy) -> Result<StudyDataset, StudyError> {
    parse_dataset(&read_to_string(path)?, taxonomy)
}

/// Writes `contents` to a temporary file next to `path`, syncs it and
/// renames it into place. Readers see the old file or the new one, never a
/// prefix.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    use std::io::Write;

    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
