//! Dot-product accounting and wall-clock measurement of the indexers.
//!
//! Each measurement runs an instrumented pass (exact per-query operation
//! counts) separately from the timed passes, which use [`NoCount`] and run
//! single-threaded: one warm-up, then the median of the repetitions.

use std::hint::black_box;
use std::time::Instant;

use serde::Serialize;

use crate::cache::{build_block_summaries, BlockSummaryCache};
use crate::config::{ForcedBudget, HisaConfig};
use crate::counter::{NoCount, OpCounter};
use crate::error::Result;
use crate::inputs::IndexerInputs;
use crate::strategy::Strategy;
use crate::synth::{random_inputs, spread_positions};

/// Per-query dot-product bound for a prefix of `len` tokens.
///
/// Flat: `H·L`. Hierarchical: `H·(ceil(L/B) + min(L, (m+2)·B))`, with `m+2`
/// replaced by `max(m, 2)` when forced blocks count inside the budget.
/// Block-only: `H·ceil(L/B)`.
pub fn analytic_cost(cfg: &HisaConfig, len: usize, strategy: Strategy) -> u64 {
    let h = cfg.num_heads() as u64;
    let blocks = len.div_ceil(cfg.block_size()) as u64;
    let pool_blocks = match (cfg.force_first_last(), cfg.forced_budget()) {
        (false, _) => cfg.block_budget(),
        (true, ForcedBudget::Additional) => cfg.block_budget() + 2,
        (true, ForcedBudget::WithinBudget) => cfg.block_budget().max(2),
    };
    match strategy {
        Strategy::Dsa => h * len as u64,
        Strategy::Hisa => h * (blocks + len.min(pool_blocks * cfg.block_size()) as u64),
        Strategy::BlockSparse => h * blocks,
    }
}

/// Where the benchmarked queries sit in the sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Placement {
    /// Evenly spread over `[0, L)`, the last one at `L - 1`.
    #[default]
    Spread,
    /// All at `L - 1`, as in decoding right after a long prefill.
    Last,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchOptions {
    pub warmup: usize,
    pub repetitions: usize,
    pub placement: Placement,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            warmup: 1,
            repetitions: 5,
            placement: Placement::Spread,
        }
    }
}

/// Synthetic inputs and their block summaries, shared by all strategies
/// measured at one length.
#[derive(Debug, Clone)]
pub struct BenchWorkload {
    pub inputs: IndexerInputs,
    pub cache: BlockSummaryCache,
    /// Time to build the block summaries, kept out of the indexer timings.
    pub build_ns: u64,
}

impl BenchWorkload {
    pub fn generate(
        cfg: &HisaConfig,
        len: usize,
        num_queries: usize,
        seed: u64,
        placement: Placement,
    ) -> Result<Self> {
        let positions = match placement {
            Placement::Spread => spread_positions(len, num_queries),
            Placement::Last => vec![len - 1; num_queries],
        };
        let inputs = random_inputs(len, cfg.num_heads(), cfg.index_dim(), &positions, seed);
        let start = Instant::now();
        let cache = build_block_summaries(&inputs, cfg.block_size())?;
        let build_ns = start.elapsed().as_nanos() as u64;
        Ok(Self {
            inputs,
            cache,
            build_ns,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub strategy: Strategy,
    #[serde(rename = "L")]
    pub len: usize,
    #[serde(rename = "B")]
    pub block_size: usize,
    pub m: usize,
    pub k: usize,
    #[serde(rename = "H")]
    pub heads: usize,
    pub d: usize,
    pub wall_ns_median: u64,
    pub wall_ns_p10: u64,
    pub wall_ns_p90: u64,
    pub dot_products: u64,
    /// `queries * analytic_cost(cfg, L, strategy)`.
    pub analytic_bound: u64,
    pub queries: usize,
    pub build_ns: u64,
    #[serde(skip)]
    pub query_positions: Vec<usize>,
    #[serde(skip)]
    pub per_query_dots: Vec<u64>,
}

impl BenchRecord {
    /// Whether every query stayed within the bound for its own prefix length.
    pub fn within_per_query_bounds(&self, cfg: &HisaConfig) -> bool {
        self.query_positions
            .iter()
            .zip(&self.per_query_dots)
            .all(|(&t, &dots)| dots <= analytic_cost(cfg, t + 1, self.strategy))
    }
}

/// Nearest-rank percentile of ascending `sorted`.
fn percentile(sorted: &[u64], p: f64) -> u64 {
    let rank = (p * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

fn median(sorted: &[u64]) -> u64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2
    }
}

/// Measures one strategy on a prepared workload.
pub fn measure(
    workload: &BenchWorkload,
    cfg: &HisaConfig,
    strategy: Strategy,
    opts: &BenchOptions,
) -> Result<BenchRecord> {
    let BenchWorkload { inputs, cache, .. } = workload;
    let rows = inputs.num_queries();

    let mut per_query_dots = Vec::with_capacity(rows);
    let mut total = OpCounter::new();
    for row in 0..rows {
        let mut counter = OpCounter::new();
        strategy.select(inputs, cache, cfg, row, &mut counter)?;
        per_query_dots.push(counter.dot_products);
        total.merge(&counter);
    }

    let timed = || -> Result<u64> {
        let start = Instant::now();
        for row in 0..rows {
            black_box(strategy.select(inputs, cache, cfg, row, &mut NoCount)?);
        }
        Ok(start.elapsed().as_nanos().max(1) as u64)
    };
    for _ in 0..opts.warmup {
        timed()?;
    }
    let mut samples = (0..opts.repetitions.max(1))
        .map(|_| timed())
        .collect::<Result<Vec<u64>>>()?;
    samples.sort_unstable();

    Ok(BenchRecord {
        strategy,
        len: inputs.seq_len(),
        block_size: cfg.block_size(),
        m: cfg.block_budget(),
        k: cfg.token_budget(),
        heads: cfg.num_heads(),
        d: cfg.index_dim(),
        wall_ns_median: median(&samples),
        wall_ns_p10: percentile(&samples, 0.10),
        wall_ns_p90: percentile(&samples, 0.90),
        dot_products: total.dot_products,
        analytic_bound: rows as u64 * analytic_cost(cfg, inputs.seq_len(), strategy),
        queries: rows,
        build_ns: workload.build_ns,
        query_positions: inputs.query_positions().to_vec(),
        per_query_dots,
    })
}

/// Generates a workload and measures one strategy on it.
pub fn run_bench(
    cfg: &HisaConfig,
    len: usize,
    num_queries: usize,
    seed: u64,
    strategy: Strategy,
    opts: &BenchOptions,
) -> Result<BenchRecord> {
    let workload = BenchWorkload::generate(cfg, len, num_queries, seed, opts.placement)?;
    measure(&workload, cfg, strategy, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> BenchOptions {
        BenchOptions {
            warmup: 0,
            repetitions: 1,
            placement: Placement::Last,
        }
    }

    #[test]
    fn analytic_examples() {
        let cfg = HisaConfig::new(128, 64, 2048, 1, 64).unwrap();
        assert_eq!(analytic_cost(&cfg, 65536, Strategy::Hisa), 512 + 66 * 128);
        assert_eq!(analytic_cost(&cfg, 65536, Strategy::Dsa), 65536);
        assert_eq!(analytic_cost(&cfg, 65536, Strategy::BlockSparse), 512);
        // m >= ceil(L/B): block scores plus the whole prefix
        assert_eq!(analytic_cost(&cfg, 4096, Strategy::Hisa), 32 + 4096);
        let unit = HisaConfig::new(1, 16, 16, 3, 8).unwrap();
        assert_eq!(analytic_cost(&unit, 1000, Strategy::Hisa), 3 * (1000 + 16 + 2));
        let within = HisaConfig::builder(128, 64, 2048)
            .heads(1)
            .forced_budget(ForcedBudget::WithinBudget)
            .build()
            .unwrap();
        assert_eq!(analytic_cost(&within, 65536, Strategy::Hisa), 512 + 64 * 128);
    }

    #[test]
    fn flat_count_is_exact() {
        let cfg = HisaConfig::new(16, 4, 32, 2, 8).unwrap();
        let rec = run_bench(&cfg, 1000, 3, 1, Strategy::Dsa, &quick()).unwrap();
        assert_eq!(rec.dot_products, 3 * 2 * 1000);
        assert_eq!(rec.dot_products, rec.analytic_bound);
        assert!(rec.wall_ns_median > 0);
    }

    #[test]
    fn hierarchical_count_within_bound() {
        let cfg = HisaConfig::new(16, 4, 32, 2, 8).unwrap();
        for placement in [Placement::Last, Placement::Spread] {
            let opts = BenchOptions { placement, ..quick() };
            for strategy in Strategy::ALL {
                let rec = run_bench(&cfg, 2000, 8, 2, strategy, &opts).unwrap();
                assert!(rec.dot_products <= rec.analytic_bound);
                assert!(rec.within_per_query_bounds(&cfg));
            }
        }
    }

    #[test]
    fn percentiles() {
        let s = [1, 2, 3, 4, 5];
        assert_eq!(median(&s), 3);
        assert_eq!(percentile(&s, 0.1), 1);
        assert_eq!(percentile(&s, 0.9), 5);
        assert_eq!(median(&[2, 4]), 3);
    }
}
