use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use consensus_core::metrics::SimilarityKind;
use consensus_core::study::{
    build_report, load_dataset, load_taxonomy, write_atomic, write_report, AgreementMode, AgreementReport,
    DescriptorTaxonomy, ReportFormat, ReportOptions, StdKind, WriteOptions,
};

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Hard,
    Soft,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SimilarityArg {
    Jaccard,
    Cosine,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
    #[value(alias = "md")]
    Markdown,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StdArg {
    Sample,
    Population,
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    /// Study dataset (JSON).
    #[arg(long)]
    pub dataset: PathBuf,
    /// Descriptor taxonomy (JSON); the bundled 54-descriptor taxonomy when omitted.
    #[arg(long)]
    pub taxonomy: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "both")]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value = "jaccard")]
    pub similarity: SimilarityArg,
    /// Report destination; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Defaults to the extension of --out, else csv.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Decimals for rate columns (full precision by default; markdown uses 2).
    #[arg(long)]
    pub decimals: Option<usize>,
    /// Decimals for eta columns.
    #[arg(long)]
    pub eta_decimals: Option<usize>,
    /// Standard deviation in the summary rows.
    #[arg(long = "std", value_enum, default_value = "sample")]
    pub std_kind: StdArg,
}

fn format_for(args: &ComputeArgs) -> ReportFormat {
    match args.format {
        Some(FormatArg::Csv) => ReportFormat::Csv,
        Some(FormatArg::Json) => ReportFormat::Json,
        Some(FormatArg::Markdown) => ReportFormat::Markdown,
        None => args
            .out
            .as_deref()
            .and_then(Path::extension)
            .and_then(|e| e.to_str())
            .and_then(|e| e.parse().ok())
            .unwrap_or(ReportFormat::Csv),
    }
}

fn summary_line(report: &AgreementReport) -> String {
    let mean = &report.summary.mean;
    let mut parts = vec![format!("{} referents", report.rows.len())];
    if let (Some(ar), Some(eta)) = (mean.ar, mean.eta_ar) {
        parts.push(format!("mean AR {ar:.4} (eta {eta:.2}%)"));
    }
    if let (Some(sar), Some(eta)) = (mean.sar, mean.eta_sar) {
        parts.push(format!("mean SAR {sar:.4} (eta {eta:.2}%) [{}]", report.similarity));
    }
    if !report.warnings.is_empty() {
        parts.push(format!("{} warnings", report.warnings.len()));
    }
    parts.join(", ")
}

pub fn run(args: ComputeArgs) -> Result<()> {
    let taxonomy = match &args.taxonomy {
        Some(path) => load_taxonomy(path).context("cannot load taxonomy")?,
        None => DescriptorTaxonomy::bundled_fg2020(),
    };
    let dataset = load_dataset(&args.dataset, &taxonomy).context("invalid dataset")?;
    let opts = ReportOptions {
        similarity: match args.similarity {
            SimilarityArg::Jaccard => SimilarityKind::Jaccard,
            SimilarityArg::Cosine => SimilarityKind::Cosine,
        },
        mode: match args.mode {
            ModeArg::Hard => AgreementMode::Hard,
            ModeArg::Soft => AgreementMode::Soft,
            ModeArg::Both => AgreementMode::Both,
        },
        std_kind: match args.std_kind {
            StdArg::Sample => StdKind::Sample,
            StdArg::Population => StdKind::Population,
        },
    };
    let report = build_report(&dataset, &opts);
    for w in &report.warnings {
        let at = w.proposal_id.as_deref().or(w.referent_id.as_deref()).unwrap_or("study");
        eprintln!("warning: {at}: {}", w.message);
    }

    let write_opts = WriteOptions {
        rate_decimals: args.decimals,
        eta_decimals: args.eta_decimals,
    };
    let text = write_report(&report, format_for(&args), &write_opts);
    match &args.out {
        Some(path) => {
            write_atomic(path, text.as_bytes()).with_context(|| format!("cannot write {}", path.display()))?;
            println!("{}", summary_line(&report));
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            eprintln!("{}", summary_line(&report));
        }
    }
    Ok(())
}
