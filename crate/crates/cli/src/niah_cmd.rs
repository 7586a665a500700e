//! `hisa niah`: needle recall over a (length × depth × seed) grid.

use std::collections::BTreeMap;

use anyhow::bail;
use clap::Args;
use hisa_core::niah::{evaluate_instance, generate_niah_with, NiahParams, NiahRecord};
use hisa_core::{HisaConfig, Strategy};
use rayon::prelude::*;

use crate::output::{write_dat, write_rows};
use crate::settings::{parse_depths, CommonArgs, Settings};

pub const DEFAULT_LENGTHS: &str = "1024,2048,4096,8192,16384,32768";
pub const DEFAULT_DEPTHS: &str = "0,0.25,0.5,0.75,1";

#[derive(Debug, Clone, Args)]
pub struct NiahArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub lengths: Option<String>,
    /// Comma-separated needle depths in [0, 1].
    #[arg(long)]
    pub depths: Option<String>,
    /// Seeds per cell; instance seeds are `seed, seed+1, ...`.
    #[arg(long)]
    pub seeds: Option<u64>,
    #[arg(long)]
    pub strategies: Option<String>,
    /// Compression ratio M:m for the hierarchical indexer.
    #[arg(long)]
    pub ratio: Option<usize>,
    /// Needle score above the haystack mean, in haystack standard deviations.
    #[arg(long)]
    pub margin: Option<f64>,
    /// Print an ASCII heatmap of mean recall per strategy.
    #[arg(long)]
    pub heatmap: bool,
}

/// Runs every cell of the grid; records are ordered by (L, depth, seed, strategy).
pub fn run_grid(
    base: &HisaConfig,
    params: &NiahParams,
    lengths: &[usize],
    depths: &[f64],
    first_seed: u64,
    seeds: u64,
    strategies: &[Strategy],
    ratio: usize,
) -> anyhow::Result<Vec<NiahRecord>> {
    let cells: Vec<(usize, f64, u64)> = lengths
        .iter()
        .flat_map(|&len| {
            depths
                .iter()
                .flat_map(move |&d| (0..seeds).map(move |i| (len, d, first_seed + i)))
        })
        .collect();
    let per_cell: Vec<Vec<NiahRecord>> = cells
        .par_iter()
        .map(|&(len, depth, seed)| {
            let inst = generate_niah_with(params, len, depth, seed, base);
            evaluate_instance(&inst, depth, base, strategies, ratio)
        })
        .collect::<Result<_, _>>()?;
    Ok(per_cell.into_iter().flatten().collect())
}

/// Mean recall per (L, depth) for one strategy.
pub fn cell_means(records: &[NiahRecord], strategy: Strategy) -> BTreeMap<(usize, u64), f64> {
    let mut acc: BTreeMap<(usize, u64), (f64, usize)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.strategy == strategy) {
        let e = acc.entry((r.len, r.depth.to_bits())).or_default();
        e.0 += r.recall;
        e.1 += 1;
    }
    acc.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()
}

pub fn run(args: &NiahArgs) -> anyhow::Result<()> {
    let settings = Settings::resolve(&args.common)?;
    let lengths = settings.lengths(args.lengths.as_deref(), DEFAULT_LENGTHS)?;
    let depths = parse_depths(args.depths.as_deref().unwrap_or(DEFAULT_DEPTHS))?;
    let strategies = settings.strategies(args.strategies.as_deref())?;
    let seeds = args.seeds.or(settings.file.seeds).unwrap_or(100);
    let ratio = args.ratio.or(settings.file.ratio).unwrap_or(4);
    if seeds == 0 || ratio == 0 {
        bail!("--seeds and --ratio must be positive");
    }
    let params = NiahParams {
        margin_sigma: args.margin.unwrap_or(NiahParams::default().margin_sigma),
    };

    let records = run_grid(
        &settings.base,
        &params,
        &lengths,
        &depths,
        settings.seed,
        seeds,
        &strategies,
        ratio,
    )?;

    for &s in &strategies {
        let rows: Vec<&NiahRecord> = records.iter().filter(|r| r.strategy == s).collect();
        let path = write_rows(&settings.out_dir, &format!("niah_{}", s.name()), settings.format, &rows)?;
        let means = cell_means(&records, s);
        let mut header = vec!["depth".to_string()];
        header.extend(lengths.iter().map(|l| l.to_string()));
        let dat: Vec<Vec<String>> = depths
            .iter()
            .map(|&d| {
                let mut row = vec![format!("{d}")];
                row.extend(lengths.iter().map(|&l| format!("{:.4}", means[&(l, d.to_bits())])));
                row
            })
            .collect();
        write_dat(&settings.out_dir.join(format!("niah_{}.dat", s.name())), &header, &dat)?;

        let overall = means.values().sum::<f64>() / means.len() as f64;
        println!("{:<12} mean recall {:.4}  -> {}", s.to_string(), overall, path.display());
        if args.heatmap {
            print_heatmap(&means, &lengths, &depths);
        }
    }
    Ok(())
}

fn print_heatmap(means: &BTreeMap<(usize, u64), f64>, lengths: &[usize], depths: &[f64]) {
    const SHADES: [char; 5] = [' ', '.', ':', '*', '#'];
    print!("{:>7} ", "depth");
    for l in lengths {
        print!("{:>7}", l);
    }
    println!();
    for &d in depths {
        print!("{:>6.0}% ", d * 100.0);
        for &l in lengths {
            let v = means[&(l, d.to_bits())];
            let shade = SHADES[((v * 4.0).round() as usize).min(4)];
            print!("{:>4} {}{}", format!("{:.2}", v), shade, shade);
        }
        println!();
    }
}
