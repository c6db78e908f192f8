//! Batch front end: `sigma-vqls --config run.json [--seed N] [--shots N] [--out DIR]`.
//!
//! Exit codes: 0 when the command's checks pass, 1 on a failed check or a
//! runtime error, 2 on a configuration error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use crate::commands::{execute, Failure};
use crate::config::{Overrides, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "sigma-vqls", version, about = "Sigma-basis decomposition and variational linear solves")]
struct Cli {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured shot count (0 = exact).
    #[arg(long)]
    shots: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let mut cfg = match RunConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    cfg.apply(&Overrides {
        seed: cli.seed,
        shots: cli.shots,
        out: cli.out,
    });
    match execute(&cfg) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("{}: checks failed", cfg.command.name());
            ExitCode::from(1)
        }
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
