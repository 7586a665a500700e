//! `hisa bench`: indexer latency and dot-product counts across lengths.

use anyhow::bail;
use clap::{Args, ValueEnum};
use hisa_core::bench::{measure, BenchOptions, BenchRecord, BenchWorkload, Placement};
use hisa_core::config::matched_block_budget;
use hisa_core::{HisaConfig, HisaError, Strategy};
use serde::Serialize;

use crate::output::{write_dat, write_rows};
use crate::settings::{CommonArgs, Format, Infeasible, Settings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Fixed block budget m at every length.
    FixedBudget,
    /// m recomputed per length to hold M:m = ratio:1.
    Ratio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlacementArg {
    Spread,
    Last,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value = "fixed-budget")]
    pub mode: Mode,
    /// Compression ratio M:m for `--mode ratio`.
    #[arg(long)]
    pub ratio: Option<usize>,
    /// `lo..hi` (doubling) or a comma-separated list.
    #[arg(long)]
    pub lengths: Option<String>,
    /// Comma-separated subset of dsa,hisa,block.
    #[arg(long)]
    pub strategies: Option<String>,
    /// Queries per measurement.
    #[arg(long, default_value_t = 256)]
    pub queries: usize,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long, default_value_t = 1)]
    pub warmup: usize,
    #[arg(long, value_enum, default_value = "spread")]
    pub placement: PlacementArg,
}

/// One row of the bench CSV.
#[derive(Debug, Serialize)]
struct BenchRow {
    strategy: Strategy,
    #[serde(rename = "L")]
    len: usize,
    #[serde(rename = "B")]
    block_size: usize,
    m: usize,
    k: usize,
    #[serde(rename = "H")]
    heads: usize,
    d: usize,
    wall_ns_median: u64,
    wall_ns_p10: u64,
    wall_ns_p90: u64,
    dot_products: u64,
    analytic_bound: u64,
}

impl From<&BenchRecord> for BenchRow {
    fn from(r: &BenchRecord) -> Self {
        Self {
            strategy: r.strategy,
            len: r.len,
            block_size: r.block_size,
            m: r.m,
            k: r.k,
            heads: r.heads,
            d: r.d,
            wall_ns_median: r.wall_ns_median,
            wall_ns_p10: r.wall_ns_p10,
            wall_ns_p90: r.wall_ns_p90,
            dot_products: r.dot_products,
            analytic_bound: r.analytic_bound,
        }
    }
}

/// Config used for `strategy` at length `len`.
pub fn bench_config(
    base: &HisaConfig,
    strategy: Strategy,
    mode: Mode,
    ratio: usize,
    len: usize,
) -> Result<HisaConfig, HisaError> {
    let b = base.block_size();
    match strategy {
        Strategy::Dsa => Ok(*base),
        Strategy::BlockSparse => base.with_block_budget(matched_block_budget(base.token_budget(), b)),
        Strategy::Hisa => match mode {
            Mode::FixedBudget => Ok(*base),
            Mode::Ratio => base.with_block_budget(len.div_ceil(b).div_ceil(ratio).max(1)),
        },
    }
}

pub fn run(args: &BenchArgs) -> anyhow::Result<()> {
    let settings = Settings::resolve(&args.common)?;
    let lengths = settings.lengths(args.lengths.as_deref(), "8192..65536")?;
    let strategies = settings.strategies(args.strategies.as_deref())?;
    let ratio = args.ratio.or(settings.file.ratio).unwrap_or(4);
    if ratio == 0 {
        bail!("--ratio must be positive");
    }
    if args.queries == 0 {
        bail!("--queries must be positive");
    }
    let base = settings.base;

    // Validate every (strategy, length) config before spending time measuring.
    for &len in &lengths {
        for &s in &strategies {
            bench_config(&base, s, args.mode, ratio, len).map_err(|e| match e {
                e @ HisaError::InfeasibleConfig { .. } => anyhow::Error::new(Infeasible(e)),
                e => anyhow::Error::new(e),
            })?;
        }
    }

    let opts = BenchOptions {
        warmup: args.warmup,
        repetitions: args.reps.max(1),
        placement: match args.placement {
            PlacementArg::Spread => Placement::Spread,
            PlacementArg::Last => Placement::Last,
        },
    };

    let mut records = Vec::new();
    for &len in &lengths {
        let workload = BenchWorkload::generate(&base, len, args.queries, settings.seed, opts.placement)?;
        for &s in &strategies {
            let cfg = bench_config(&base, s, args.mode, ratio, len)?;
            records.push(measure(&workload, &cfg, s, &opts)?);
        }
    }

    let out = &settings.out_dir;
    let path = match settings.format {
        Format::Csv => {
            let rows: Vec<BenchRow> = records.iter().map(BenchRow::from).collect();
            write_rows(out, "bench", Format::Csv, &rows)?
        }
        Format::Json => write_rows(out, "bench", Format::Json, &records)?,
    };

    let mut header = vec!["L".to_string()];
    header.extend(strategies.iter().map(|s| format!("{}_ms", s.name())));
    let dat: Vec<Vec<String>> = lengths
        .iter()
        .map(|&len| {
            let mut row = vec![len.to_string()];
            for &s in &strategies {
                let r = records.iter().find(|r| r.len == len && r.strategy == s).unwrap();
                row.push(format!("{:.6}", r.wall_ns_median as f64 / 1e6));
            }
            row
        })
        .collect();
    write_dat(&out.join("bench.dat"), &header, &dat)?;

    print_summary(&records, &lengths);
    println!("wrote {}", path.display());
    Ok(())
}

fn print_summary(records: &[BenchRecord], lengths: &[usize]) {
    println!(
        "{:>8} {:>12} {:>12} {:>12} {:>9} {:>10} {:>10}",
        "L", "dsa_ms", "hisa_ms", "block_ms", "speedup", "dot_ratio", "build_ms"
    );
    let find = |len: usize, s: Strategy| records.iter().find(|r| r.len == len && r.strategy == s);
    let ms = |r: Option<&BenchRecord>| {
        r.map(|r| format!("{:.3}", r.wall_ns_median as f64 / 1e6))
            .unwrap_or_else(|| "-".into())
    };
    for &len in lengths {
        let (dsa, hisa, block) = (
            find(len, Strategy::Dsa),
            find(len, Strategy::Hisa),
            find(len, Strategy::BlockSparse),
        );
        let (speedup, ratio) = match (dsa, hisa) {
            (Some(d), Some(h)) => (
                format!("{:.2}x", d.wall_ns_median as f64 / h.wall_ns_median as f64),
                format!("{:.4}", h.dot_products as f64 / d.dot_products as f64),
            ),
            _ => ("-".into(), "-".into()),
        };
        let build = records
            .iter()
            .find(|r| r.len == len)
            .map(|r| format!("{:.3}", r.build_ns as f64 / 1e6))
            .unwrap_or_default();
        println!(
            "{:>8} {:>12} {:>12} {:>12} {:>9} {:>10} {:>10}",
            len,
            ms(dsa),
            ms(hisa),
            ms(block),
            speedup,
            ratio,
            build
        );
    }
}
