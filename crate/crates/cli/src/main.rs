//! `consensus-kit`: agreement reports, null-distribution simulation and the
//! annotation service from one binary.
//!
//! Exit status is 0 on success, 1 on validation or runtime failure and 2 on
//! usage errors (clap's default).

mod compute;
mod serve;
mod simulate;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "consensus-kit", version, about = "Agreement rates for gesture-elicitation studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute per-referent AR/SAR and eta for a study dataset.
    Compute(compute::ComputeArgs),
    /// Simulate the SAR distribution of random description vectors.
    Simulate(simulate::SimulateArgs),
    /// Run the annotation service over a data directory.
    Serve(serve::ServeArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compute(args) => compute::run(args),
        Command::Simulate(args) => simulate::run(args),
        Command::Serve(args) => serve::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
