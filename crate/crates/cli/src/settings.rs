//! Flag / config-file / default resolution shared by all subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use hisa_core::{ForcedBudget, HisaConfig, HisaError, Strategy};
use serde::Deserialize;

pub const DEFAULT_B: usize = 128;
pub const DEFAULT_M: usize = 64;
pub const DEFAULT_K: usize = 2048;
pub const DEFAULT_H: usize = 4;
pub const DEFAULT_D: usize = 64;
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Flags common to every subcommand.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Block size B.
    #[arg(long = "B")]
    pub block_size: Option<usize>,
    /// Block budget m.
    #[arg(long = "m")]
    pub block_budget: Option<usize>,
    /// Token budget k.
    #[arg(long = "k")]
    pub token_budget: Option<usize>,
    /// Indexer heads H.
    #[arg(long = "H")]
    pub heads: Option<usize>,
    /// Indexer dimension d.
    #[arg(long = "d")]
    pub dim: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON file with any of: B, m, k, H, d, seed, lengths, ratio, seeds, strategies, format.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "out-dir", default_value = "results")]
    pub out_dir: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Count the forced first/last blocks inside the block budget m.
    #[arg(long = "forced-in-budget")]
    pub forced_in_budget: bool,
}

/// Optional values read from `--config`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(rename = "B")]
    pub block_size: Option<usize>,
    pub m: Option<usize>,
    pub k: Option<usize>,
    #[serde(rename = "H")]
    pub heads: Option<usize>,
    pub d: Option<usize>,
    pub seed: Option<u64>,
    pub lengths: Option<Vec<usize>>,
    pub ratio: Option<usize>,
    pub seeds: Option<u64>,
    pub strategies: Option<Vec<String>>,
    pub format: Option<Format>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Error for configurations violating `mB >= k`; mapped to exit code 1.
#[derive(Debug)]
pub struct Infeasible(pub HisaError);

impl std::fmt::Display for Infeasible {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for Infeasible {}

/// Resolved settings: flags over file over defaults.
#[derive(Debug, Clone)]
pub struct Settings {
    pub base: HisaConfig,
    pub seed: u64,
    pub format: Format,
    pub out_dir: PathBuf,
    pub file: FileConfig,
}

impl Settings {
    pub fn resolve(args: &CommonArgs) -> anyhow::Result<Self> {
        let file = match &args.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let b = args.block_size.or(file.block_size).unwrap_or(DEFAULT_B);
        let m = args.block_budget.or(file.m).unwrap_or(DEFAULT_M);
        let k = args.token_budget.or(file.k).unwrap_or(DEFAULT_K);
        let h = args.heads.or(file.heads).unwrap_or(DEFAULT_H);
        let d = args.dim.or(file.d).unwrap_or(DEFAULT_D);
        let forced = if args.forced_in_budget {
            ForcedBudget::WithinBudget
        } else {
            ForcedBudget::Additional
        };
        let base = HisaConfig::builder(b, m, k)
            .heads(h)
            .dim(d)
            .forced_budget(forced)
            .build()
            .map_err(|e| match e {
                e @ HisaError::InfeasibleConfig { .. } => anyhow::Error::new(Infeasible(e)),
                e => anyhow::Error::new(e),
            })?;
        Ok(Self {
            base,
            seed: args.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            format: args.format.or(file.format).unwrap_or(Format::Csv),
            out_dir: args.out_dir.clone(),
            file,
        })
    }

    pub fn lengths(&self, flag: Option<&str>, default: &str) -> anyhow::Result<Vec<usize>> {
        match (flag, &self.file.lengths) {
            (Some(spec), _) => parse_lengths(spec),
            (None, Some(list)) => Ok(list.clone()),
            (None, None) => parse_lengths(default),
        }
    }

    pub fn strategies(&self, flag: Option<&str>) -> anyhow::Result<Vec<Strategy>> {
        let names: Vec<String> = match (flag, &self.file.strategies) {
            (Some(list), _) => list.split(',').map(|s| s.trim().to_string()).collect(),
            (None, Some(list)) => list.clone(),
            (None, None) => return Ok(Strategy::ALL.to_vec()),
        };
        let mut out = Vec::new();
        for name in names.iter().filter(|n| !n.is_empty()) {
            let s: Strategy = name.parse().map_err(anyhow::Error::msg)?;
            if !out.contains(&s) {
                out.push(s);
            }
        }
        if out.is_empty() {
            bail!("no strategies selected");
        }
        out.sort();
        Ok(out)
    }
}

/// `8192..65536` doubles from the lower to the upper bound; otherwise a
/// comma-separated list. Values accept a `K` suffix (`32K` = 32768).
pub fn parse_lengths(spec: &str) -> anyhow::Result<Vec<usize>> {
    let value = |s: &str| -> anyhow::Result<usize> {
        let s = s.trim();
        let v = match s.strip_suffix(['K', 'k']) {
            Some(n) => n.parse::<usize>().map(|n| n * 1024),
            None => s.parse::<usize>(),
        }
        .with_context(|| format!("invalid length `{s}`"))?;
        if v == 0 {
            bail!("lengths must be positive");
        }
        Ok(v)
    };
    if let Some((lo, hi)) = spec.split_once("..") {
        let (mut l, hi) = (value(lo)?, value(hi)?);
        if l > hi {
            bail!("empty length range `{spec}`");
        }
        let mut out = Vec::new();
        while l <= hi {
            out.push(l);
            l *= 2;
        }
        return Ok(out);
    }
    spec.split(',').map(value).collect()
}

pub fn parse_depths(spec: &str) -> anyhow::Result<Vec<f64>> {
    spec.split(',')
        .map(|s| {
            let d: f64 = s.trim().parse().with_context(|| format!("invalid depth `{s}`"))?;
            if !(0.0..=1.0).contains(&d) {
                bail!("depth {d} outside [0, 1]");
            }
            Ok(d)
        })
        .collect()
}
