//! Command-line driver for the hisa indexers: `bench`, `niah` and `audit`.

pub mod audit_cmd;
pub mod bench_cmd;
pub mod niah_cmd;
pub mod output;
pub mod settings;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "hisa", version, about = "Hierarchical sparse-attention indexer benchmarks and audits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Indexer latency and dot-product counts across sequence lengths.
    Bench(bench_cmd::BenchArgs),
    /// Needle-in-a-haystack recall grid.
    Niah(niah_cmd::NiahArgs),
    /// Randomized equivalence and subset-chain checks; optional ablation.
    Audit(audit_cmd::AuditArgs),
}

/// Exit codes: 0 success, 1 runtime or infeasible-config error,
/// 2 bad flags (from clap), 3 audit property failure.
pub fn run(cli: Cli) -> ExitCode {
    configure_threads();
    let result = match &cli.command {
        Command::Bench(args) => bench_cmd::run(args).map(|_| true),
        Command::Niah(args) => niah_cmd::run(args).map(|_| true),
        Command::Audit(args) => audit_cmd::run(args),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Caps rayon workers at `HISA_THREADS` when set.
fn configure_threads() {
    if let Some(n) = std::env::var("HISA_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}
