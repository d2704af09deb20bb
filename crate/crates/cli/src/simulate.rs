use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};

use anyhow::{bail, Context, Result};
use clap::Args;
use consensus_core::nullsim::{simulate_with, NullModelParams, SimOptions, DEFAULT_BINS};
use consensus_core::study::write_atomic;

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Number of subjects per simulated referent.
    #[arg(short = 'S', long)]
    pub subjects: usize,
    /// Description vector length.
    #[arg(short = 'd', long)]
    pub dims: usize,
    /// Probability that a descriptor is present.
    #[arg(short = 'p', long)]
    pub prob: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub iters: u64,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    pub bins: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Report P(SAR <= t); repeatable.
    #[arg(long = "cdf-at", value_name = "T")]
    pub cdf_at: Vec<f64>,
    /// Histogram CSV destination. Without it only the summary is printed.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary JSON destination; defaults to --out with a .json extension.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Suppress progress output.
    #[arg(short, long)]
    pub quiet: bool,
    /// Worker threads (0 = all cores).
    #[arg(long, env = "CONSENSUS_KIT_THREADS", default_value_t = 0)]
    pub threads: usize,
}

pub fn run(args: SimulateArgs) -> Result<()> {
    let params = NullModelParams::new(args.subjects, args.dims, args.prob, args.iters, args.seed).with_bins(args.bins);
    params.validate()?;
    if let Some(t) = args.cdf_at.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        bail!("--cdf-at {t} is outside [0, 1]");
    }
    let summary_path = args
        .summary
        .clone()
        .or_else(|| args.out.as_ref().map(|p| p.with_extension("json")));
    if args.out.is_some() && summary_path == args.out {
        bail!("--summary and --out name the same file");
    }

    let last_decile = AtomicU64::new(0);
    let report = |done: u64, total: u64| {
        let decile = done * 10 / total;
        if decile > last_decile.fetch_max(decile, Ordering::Relaxed) {
            eprintln!("simulate: {:>3}% ({done}/{total})", decile * 10);
        }
    };
    let opts = SimOptions {
        threads: args.threads,
        progress: if args.quiet { None } else { Some(&report) },
    };
    let dist = simulate_with(&params, &opts)?;
    let summary = dist.summary(&args.cdf_at)?;
    let summary_json = serde_json::to_string_pretty(&summary)? + "\n";

    if let Some(out) = &args.out {
        let mut csv = Vec::new();
        dist.write_histogram_csv(&mut csv)?;
        write_atomic(out, &csv).with_context(|| format!("cannot write {}", out.display()))?;
    }
    match &summary_path {
        Some(path) => {
            write_atomic(path, summary_json.as_bytes()).with_context(|| format!("cannot write {}", path.display()))?;
            let mode = &summary.mode_bin;
            let mut line = format!("mean SAR {:.4}, mode bin [{}, {})", summary.mean, mode.lo, mode.hi);
            for c in &summary.cdf {
                line.push_str(&format!(", P(SAR <= {}) = {:.4}", c.threshold, c.probability));
            }
            println!("{line}");
        }
        None => print!("{summary_json}"),
    }
    Ok(())
}
