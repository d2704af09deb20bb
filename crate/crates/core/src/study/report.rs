use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{syntax_error, StudyDataset, StudyError};
use crate::metrics::{agreement_rate, eta, soft_agreement_rate, CompensatedSum, SimilarityKind};

const CSV_HEADER: [&str; 5] = ["referent", "ar", "eta_ar", "sar", "eta_sar"];
pub const MEAN_ROW: &str = "__mean__";
pub const STD_ROW: &str = "__std__";

/// Which agreement columns to compute.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgreementMode {
    Hard,
    Soft,
    #[default]
    Both,
}

impl AgreementMode {
    fn hard(self) -> bool {
        matches!(self, AgreementMode::Hard | AgreementMode::Both)
    }

    fn soft(self) -> bool {
        matches!(self, AgreementMode::Soft | AgreementMode::Both)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StdKind {
    /// Divides by n - 1; undefined for a single value.
    #[default]
    Sample,
    Population,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReportOptions {
    pub similarity: SimilarityKind,
    pub mode: AgreementMode,
    pub std_kind: StdKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub referent_id: String,
    pub referent: String,
    pub ar: Option<f64>,
    pub eta_ar: Option<f64>,
    pub sar: Option<f64>,
    pub eta_sar: Option<f64>,
}

/// One value per report column; `None` when no row has that column.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub ar: Option<f64>,
    pub eta_ar: Option<f64>,
    pub sar: Option<f64>,
    pub eta_sar: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub mean: ColumnStats,
    pub std: ColumnStats,
    pub std_kind: StdKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportWarning {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub referent_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proposal_id: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub similarity: SimilarityKind,
    pub mode: AgreementMode,
    pub rows: Vec<ReportRow>,
    pub summary: ReportSummary,
    pub warnings: Vec<ReportWarning>,
}

/// Mean and standard deviation of `values`.
pub fn mean_std(values: &[f64], kind: StdKind) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mut sum = CompensatedSum::default();
    values.iter().for_each(|&v| sum.add(v));
    let mean = sum.total() / n;
    let denom = match kind {
        StdKind::Sample if values.len() < 2 => return (Some(mean), None),
        StdKind::Sample => n - 1.0,
        StdKind::Population => n,
    };
    let mut ss = CompensatedSum::default();
    values.iter().for_each(|&v| ss.add((v - mean) * (v - mean)));
    (Some(mean), Some((ss.total() / denom).sqrt()))
}

fn summarize(rows: &[ReportRow], kind: StdKind) -> ReportSummary {
    let column = |f: fn(&ReportRow) -> Option<f64>| {
        let values: Vec<f64> = rows.iter().filter_map(f).collect();
        mean_std(&values, kind)
    };
    let (ar_m, ar_s) = column(|r| r.ar);
    let (ear_m, ear_s) = column(|r| r.eta_ar);
    let (sar_m, sar_s) = column(|r| r.sar);
    let (esar_m, esar_s) = column(|r| r.eta_sar);
    ReportSummary {
        mean: ColumnStats { ar: ar_m, eta_ar: ear_m, sar: sar_m, eta_sar: esar_m },
        std: ColumnStats { ar: ar_s, eta_ar: ear_s, sar: sar_s, eta_sar: esar_s },
        std_kind: kind,
    }
}

/// Per-referent AR / SAR with eta columns and a mean / std summary.
///
/// A proposal without an annotation is left out of its referent's SAR. A
/// referent for which nothing could be computed is reported as a warning
/// instead of a row.
pub fn build_report(ds: &StudyDataset, opts: &ReportOptions) -> AgreementReport {
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    let warn = |warnings: &mut Vec<ReportWarning>, rid: &str, pid: Option<&str>, msg: String| {
        warnings.push(ReportWarning {
            referent_id: Some(rid.to_string()),
            proposal_id: pid.map(str::to_string),
            message: msg,
        })
    };

    for referent in ds.referents() {
        let rid = referent.id.as_str();
        let mut row = ReportRow {
            referent_id: referent.id.clone(),
            referent: referent.label.clone(),
            ar: None,
            eta_ar: None,
            sar: None,
            eta_sar: None,
        };

        if opts.mode.hard() {
            match ds.grouping_for(rid) {
                None => warn(&mut warnings, rid, None, "no equivalence grouping; AR not computed".into()),
                Some((grouping, _)) => match agreement_rate(&grouping) {
                    Ok(rate) => {
                        row.ar = Some(rate.value());
                        row.eta_ar = Some(eta(rate));
                    }
                    Err(e) => warn(&mut warnings, rid, None, format!("AR not computed: {e}")),
                },
            }
        }

        if opts.mode.soft() {
            let mut vectors = Vec::new();
            for p in ds.proposals_for(rid) {
                match ds.annotation(&p.id) {
                    Some(v) => vectors.push(v.clone()),
                    None => warn(
                        &mut warnings,
                        rid,
                        Some(&p.id),
                        "proposal has no annotation; excluded from SAR".into(),
                    ),
                }
            }
            if vectors.len() < 2 {
                warn(
                    &mut warnings,
                    rid,
                    None,
                    format!("{} annotated proposals; SAR needs at least 2", vectors.len()),
                );
            } else {
                match soft_agreement_rate(&vectors, opts.similarity) {
                    Ok(rate) => {
                        row.sar = Some(rate.value());
                        row.eta_sar = Some(eta(rate));
                    }
                    Err(e) => warn(&mut warnings, rid, None, format!("SAR not computed: {e}")),
                }
            }
        }

        if row.ar.is_some() || row.sar.is_some() {
            rows.push(row);
        } else {
            warn(&mut warnings, rid, None, "referent has no computable agreement; omitted".into());
        }
    }

    let summary = summarize(&rows, opts.std_kind);
    AgreementReport {
        similarity: opts.similarity,
        mode: opts.mode,
        rows,
        summary,
        warnings,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(format!("unknown report format '{other}' (csv, json, markdown)")),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
            ReportFormat::Markdown => "markdown",
        })
    }
}

/// Display precision. `None` writes full round-trip precision; markdown
/// falls back to 2 decimals.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WriteOptions {
    pub rate_decimals: Option<usize>,
    pub eta_decimals: Option<usize>,
}

fn fmt_value(v: Option<f64>, decimals: Option<usize>) -> String {
    match (v, decimals) {
        (None, _) => String::new(),
        (Some(x), None) => x.to_string(),
        (Some(x), Some(d)) => format!("{x:.d$}"),
    }
}

pub fn write_report(report: &AgreementReport, format: ReportFormat, opts: &WriteOptions) -> String {
    match format {
        ReportFormat::Json => serde_json::to_string_pretty(report).expect("report serializes") + "\n",
        ReportFormat::Csv => write_csv(report, opts),
        ReportFormat::Markdown => write_markdown(report, opts),
    }
}

fn stats_record(label: &str, s: &ColumnStats, opts: &WriteOptions) -> [String; 5] {
    [
        label.to_string(),
        fmt_value(s.ar, opts.rate_decimals),
        fmt_value(s.eta_ar, opts.eta_decimals),
        fmt_value(s.sar, opts.rate_decimals),
        fmt_value(s.eta_sar, opts.eta_decimals),
    ]
}

fn write_csv(report: &AgreementReport, opts: &WriteOptions) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in &report.rows {
        w.write_record([
            r.referent.clone(),
            fmt_value(r.ar, opts.rate_decimals),
            fmt_value(r.eta_ar, opts.eta_decimals),
            fmt_value(r.sar, opts.rate_decimals),
            fmt_value(r.eta_sar, opts.eta_decimals),
        ])
        .expect("in-memory write");
    }
    if !report.rows.is_empty() {
        w.write_record(stats_record(MEAN_ROW, &report.summary.mean, opts))
            .expect("in-memory write");
        w.write_record(stats_record(STD_ROW, &report.summary.std, opts))
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

fn write_markdown(report: &AgreementReport, opts: &WriteOptions) -> String {
    let rd = Some(opts.rate_decimals.unwrap_or(2));
    let ed = Some(opts.eta_decimals.unwrap_or(2));
    let cell = |v: Option<f64>, d| match v {
        None => "n/a".to_string(),
        some => fmt_value(some, d),
    };
    let pm = |m: Option<f64>, s: Option<f64>, d| match (m, s) {
        (None, _) => "n/a".to_string(),
        (m, None) => cell(m, d),
        (m, s) => format!("{} ± {}", cell(m, d), cell(s, d)),
    };

    let mut out = String::new();
    out.push_str("| Referent | AR | η^AR (%) | SAR | η^SAR (%) |\n");
    out.push_str("|---|---|---|---|---|\n");
    for r in &report.rows {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} |",
            r.referent.replace('|', "\\|"),
            cell(r.ar, rd),
            cell(r.eta_ar, ed),
            cell(r.sar, rd),
            cell(r.eta_sar, ed)
        );
    }
    if !report.rows.is_empty() {
        let (m, s) = (&report.summary.mean, &report.summary.std);
        let _ = writeln!(
            out,
            "| **Mean ± Std** | {} | {} | {} | {} |",
            pm(m.ar, s.ar, rd),
            pm(m.eta_ar, s.eta_ar, ed),
            pm(m.sar, s.sar, rd),
            pm(m.eta_sar, s.eta_sar, ed)
        );
    }
    if !report.warnings.is_empty() {
        out.push_str("\nWarnings:\n\n");
        for w in &report.warnings {
            let scope = match (&w.referent_id, &w.proposal_id) {
                (Some(r), Some(p)) => format!("{r}/{p}: "),
                (Some(r), None) => format!("{r}: "),
                (None, Some(p)) => format!("{p}: "),
                (None, None) => String::new(),
            };
            let _ = writeln!(out, "- {scope}{}", w.message);
        }
    }
    out
}

/// Row of the CSV export. Carries only what `report.csv` stores.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub referent: String,
    pub ar: Option<f64>,
    pub eta_ar: Option<f64>,
    pub sar: Option<f64>,
    pub eta_sar: Option<f64>,
}

/// The tabular part of a report: what survives a CSV round trip.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportTable {
    pub rows: Vec<TableRow>,
    pub mean: ColumnStats,
    pub std: ColumnStats,
}

impl AgreementReport {
    pub fn table(&self) -> ReportTable {
        ReportTable {
            rows: self
                .rows
                .iter()
                .map(|r| TableRow {
                    referent: r.referent.clone(),
                    ar: r.ar,
                    eta_ar: r.eta_ar,
                    sar: r.sar,
                    eta_sar: r.eta_sar,
                })
                .collect(),
            mean: self.summary.mean,
            std: self.summary.std,
        }
    }
}

pub fn parse_report_json(text: &str) -> Result<AgreementReport, StudyError> {
    serde_json::from_str(text).map_err(syntax_error)
}

pub fn parse_report_csv(text: &str) -> Result<ReportTable, StudyError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| StudyError::Csv(e.to_string()))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(StudyError::invalid(
            "line 1",
            format!("expected header '{}'", CSV_HEADER.join(",")),
        ));
    }
    let mut table = ReportTable {
        rows: Vec::new(),
        mean: ColumnStats::default(),
        std: ColumnStats::default(),
    };
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| StudyError::Csv(e.to_string()))?;
        let field = |k: usize| -> Result<Option<f64>, StudyError> {
            let raw = record.get(k).unwrap_or("");
            if raw.is_empty() {
                return Ok(None);
            }
            raw.parse().map(Some).map_err(|_| {
                StudyError::invalid(format!("line {line}, column {}", CSV_HEADER[k]), format!("not a number: '{raw}'"))
            })
        };
        let stats = ColumnStats {
            ar: field(1)?,
            eta_ar: field(2)?,
            sar: field(3)?,
            eta_sar: field(4)?,
        };
        match &record[0] {
            MEAN_ROW => table.mean = stats,
            STD_ROW => table.std = stats,
            label => table.rows.push(TableRow {
                referent: label.to_string(),
                ar: stats.ar,
                eta_ar: stats.eta_ar,
                sar: stats.sar,
                eta_sar: stats.eta_sar,
            }),
        }
    }
    Ok(table)
}
