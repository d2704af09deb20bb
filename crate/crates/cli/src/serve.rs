use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::Args;
use consensus_service::{serve, shared, shutdown_signal, ServeOptions, Store};

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Port to listen on; 0 picks a free one.
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Directory holding taxonomy.json and study.json.
    #[arg(long)]
    pub data_dir: PathBuf,
    /// Built UI bundle to serve at `/`.
    #[arg(long)]
    pub ui_dir: Option<PathBuf>,
    /// Seconds between background compactions of the annotation journal.
    #[arg(long)]
    pub compact_interval: Option<u64>,
}

pub fn run(args: ServeArgs) -> Result<()> {
    let _ = tracing_subscriber::fmt().with_writer(std::io::stderr).try_init();
    let store = Store::open(&args.data_dir).with_context(|| format!("cannot open {}", args.data_dir.display()))?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let addr = format!("{}:{}", args.host, args.port);
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .with_context(|| format!("cannot bind {addr}"))?;
        let shutdown = shutdown_signal().context("cannot install signal handlers")?;
        println!("listening on http://{}", listener.local_addr()?);
        std::io::stdout().flush()?;
        let opts = ServeOptions {
            ui_dir: args.ui_dir,
            compact_every: args.compact_interval.filter(|&s| s > 0).map(Duration::from_secs),
        };
        serve(listener, shared(store), opts, shutdown).await?;
        Ok(())
    })
}
