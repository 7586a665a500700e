//! `hisa audit`: randomized property checks of the hierarchical indexer
//! against the flat one, and the block-size / block-budget ablation.

use clap::Args;
use hisa_core::bench::BenchWorkload;
use hisa_core::bench::Placement;
use hisa_core::niah::selection_overlap;
use hisa_core::synth::{quantized_inputs, random_inputs, rng};
use hisa_core::{build_block_summaries, candidate_union, dsa_select, hisa_select, HisaConfig, IndexerInputs, NoCount, TieBreak};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::output::write_rows;
use crate::settings::{CommonArgs, Settings};

#[derive(Debug, Clone, Args)]
pub struct AuditArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Randomized instances to check.
    #[arg(long, default_value_t = 1000)]
    pub instances: u64,
    /// Debug: run the hierarchical side with the opposite tie-break rule.
    #[arg(long = "inject-tie-mismatch")]
    pub inject_tie_mismatch: bool,
    /// Also sweep (B, m) pairs with a fixed candidate pool mB.
    #[arg(long)]
    pub ablation: bool,
    /// Ablation sequence lengths.
    #[arg(long)]
    pub lengths: Option<String>,
    /// Ablation queries per length.
    #[arg(long, default_value_t = 32)]
    pub queries: usize,
}

/// One randomized audit instance.
#[derive(Debug, Clone)]
pub struct AuditCase {
    pub index: u64,
    pub cfg: HisaConfig,
    pub inputs: IndexerInputs,
    /// Rows whose query satisfies `t + 1 <= mB`.
    pub regime_rows: Vec<usize>,
}

/// Draws instance `index` of the suite seeded by `seed`. Half the instances
/// use small-integer values so that exact score ties are common.
pub fn audit_case(seed: u64, index: u64) -> AuditCase {
    let mut r = rng(seed, 1 << 32 | index);
    let b = r.random_range(1..=16usize);
    let m = r.random_range(1..=8usize);
    let capacity = m * b;
    let k = r.random_range(1..=capacity);
    let h = r.random_range(1..=4usize);
    let d = r.random_range(1..=8usize);
    let len = r.random_range(1..=2 * capacity + b);
    let tie = if r.random_bool(0.5) {
        TieBreak::SmallestIndex
    } else {
        TieBreak::LargestIndex
    };
    let cfg = HisaConfig::builder(b, m, k)
        .heads(h)
        .dim(d)
        .tie_break(tie)
        .force_first_last(r.random_bool(0.8))
        .build()
        .expect("k <= mB by construction");

    let regime_end = len.min(capacity);
    let mut positions: Vec<usize> = (0..4).map(|_| r.random_range(0..regime_end)).collect();
    positions.extend((0..2).map(|_| r.random_range(0..len)));
    let regime_rows = (0..4).collect();
    let inputs = if index.is_multiple_of(2) {
        quantized_inputs(len, h, d, &positions, seed ^ index)
    } else {
        random_inputs(len, h, d, &positions, seed ^ index)
    };
    AuditCase {
        index,
        cfg,
        inputs,
        regime_rows,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub check: &'static str,
    pub seed: u64,
    pub instance: u64,
    pub row: usize,
    pub query_position: usize,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuditReport {
    pub instances: u64,
    /// (inputs, cfg, query) triples checked for exact equivalence.
    pub equivalence_checks: u64,
    pub subset_checks: u64,
    pub failures: Vec<Counterexample>,
}

/// Checks one case: exact equivalence on regime rows, subset chain
/// `T ⊆ Ω ⊆ [0, t]` on every row.
pub fn check_case(seed: u64, case: &AuditCase, inject_tie_mismatch: bool) -> AuditReport {
    let mut report = AuditReport {
        instances: 1,
        ..Default::default()
    };
    let inputs = &case.inputs;
    let flat_cfg = case.cfg;
    let hier_cfg = if inject_tie_mismatch {
        flat_cfg.with_tie_break(match flat_cfg.tie_break() {
            TieBreak::SmallestIndex => TieBreak::LargestIndex,
            TieBreak::LargestIndex => TieBreak::SmallestIndex,
        })
    } else {
        flat_cfg
    };
    let cache = build_block_summaries(inputs, flat_cfg.block_size()).expect("non-empty inputs");
    let fail = |check, row: usize, detail: String| Counterexample {
        check,
        seed,
        instance: case.index,
        row,
        query_position: inputs.query_position(row),
        detail,
    };

    for row in 0..inputs.num_queries() {
        let t = inputs.query_position(row);
        let hier = hisa_select(inputs, &cache, &hier_cfg, row, &mut NoCount).expect("valid case");
        let pool = candidate_union(&hier.selected_blocks, flat_cfg.block_size(), t, inputs.seq_len());
        report.subset_checks += 1;
        let in_pool = hier.token_indices.iter().all(|s| pool.binary_search(s).is_ok());
        let causal = pool.last().is_none_or(|&s| s <= t);
        let sized = hier.len() == flat_cfg.token_budget().min(pool.len()) && pool.len() == hier.candidate_size;
        if !(in_pool && causal && sized) {
            report.failures.push(fail(
                "subset-chain",
                row,
                format!("|T|={} |Ω|={} in_pool={in_pool} causal={causal}", hier.len(), pool.len()),
            ));
        }
        if case.regime_rows.contains(&row) {
            report.equivalence_checks += 1;
            let flat = dsa_select(inputs, &flat_cfg, row, &mut NoCount).expect("valid case");
            if flat.token_indices != hier.token_indices {
                let first_diff = flat
                    .token_indices
                    .iter()
                    .zip(&hier.token_indices)
                    .position(|(a, b)| a != b)
                    .unwrap_or(flat.len().min(hier.len()));
                report.failures.push(fail(
                    "regime-equivalence",
                    row,
                    format!(
                        "B={} m={} k={} L={}: flat and hierarchical differ at rank {first_diff}",
                        flat_cfg.block_size(),
                        flat_cfg.block_budget(),
                        flat_cfg.token_budget(),
                        inputs.seq_len()
                    ),
                ));
            }
        }
    }
    report
}

pub fn run_suite(seed: u64, instances: u64, inject_tie_mismatch: bool) -> AuditReport {
    let reports: Vec<AuditReport> = (0..instances)
        .into_par_iter()
        .map(|i| check_case(seed, &audit_case(seed, i), inject_tie_mismatch))
        .collect();
    let mut total = AuditReport::default();
    for r in reports {
        total.instances += r.instances;
        total.equivalence_checks += r.equivalence_checks;
        total.subset_checks += r.subset_checks;
        total.failures.extend(r.failures);
    }
    total
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    #[serde(rename = "B")]
    pub block_size: usize,
    pub m: usize,
    pub k: usize,
    #[serde(rename = "L")]
    pub len: usize,
    pub queries: usize,
    pub mean_overlap_vs_dsa: f64,
    pub min_overlap_vs_dsa: f64,
}

/// Pairs sharing a candidate pool of 8192 tokens.
pub const ABLATION_PAIRS: [(usize, usize); 3] = [(64, 128), (128, 64), (256, 32)];

pub fn run_ablation(base: &HisaConfig, lengths: &[usize], queries: usize, seed: u64) -> anyhow::Result<Vec<AblationRow>> {
    let mut rows = Vec::new();
    for &len in lengths {
        let workload = BenchWorkload::generate(base, len, queries, seed, Placement::Spread)?;
        let inputs = &workload.inputs;
        for (b, m) in ABLATION_PAIRS {
            let cfg = HisaConfig::builder(b, m, base.token_budget())
                .heads(base.num_heads())
                .dim(base.index_dim())
                .forced_budget(base.forced_budget())
                .build()?;
            let cache = build_block_summaries(inputs, b)?;
            let overlaps: Vec<f64> = (0..inputs.num_queries())
                .into_par_iter()
                .map(|row| -> anyhow::Result<f64> {
                    let flat = dsa_select(inputs, &cfg, row, &mut NoCount)?;
                    let hier = hisa_select(inputs, &cache, &cfg, row, &mut NoCount)?;
                    Ok(selection_overlap(&hier, &flat)?)
                })
                .collect::<anyhow::Result<_>>()?;
            rows.push(AblationRow {
                block_size: b,
                m,
                k: cfg.token_budget(),
                len,
                queries: overlaps.len(),
                mean_overlap_vs_dsa: overlaps.iter().sum::<f64>() / overlaps.len() as f64,
                min_overlap_vs_dsa: overlaps.iter().copied().fold(f64::INFINITY, f64::min),
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Serialize)]
struct SummaryRow {
    check: &'static str,
    instances: u64,
    checks: u64,
    failures: usize,
}

/// Returns whether every property held.
pub fn run(args: &AuditArgs) -> anyhow::Result<bool> {
    let settings = Settings::resolve(&args.common)?;
    let report = run_suite(settings.seed, args.instances, args.inject_tie_mismatch);
    let count = |name: &str| report.failures.iter().filter(|f| f.check == name).count();
    let summary = [
        SummaryRow {
            check: "regime-equivalence",
            instances: report.instances,
            checks: report.equivalence_checks,
            failures: count("regime-equivalence"),
        },
        SummaryRow {
            check: "subset-chain",
            instances: report.instances,
            checks: report.subset_checks,
            failures: count("subset-chain"),
        },
    ];
    for s in &summary {
        println!(
            "{:<20} {:>8} checks over {:>6} instances: {}",
            s.check,
            s.checks,
            s.instances,
            if s.failures == 0 { "PASS".to_string() } else { format!("FAIL ({})", s.failures) }
        );
    }
    write_rows(&settings.out_dir, "audit", settings.format, &summary)?;
    if let Some(c) = report.failures.first() {
        println!(
            "counterexample: check={} seed={} instance={} query_row={} t={} ({})",
            c.check, c.seed, c.instance, c.row, c.query_position, c.detail
        );
        write_rows(&settings.out_dir, "audit_failures", settings.format, &report.failures)?;
    }

    if args.ablation {
        let lengths = settings.lengths(args.lengths.as_deref(), "32768")?;
        let rows = run_ablation(&settings.base, &lengths, args.queries.max(1), settings.seed)?;
        println!("{:>6} {:>6} {:>6} {:>8} {:>12} {:>12}", "B", "m", "k", "L", "mean_iou", "min_iou");
        for r in &rows {
            println!(
                "{:>6} {:>6} {:>6} {:>8} {:>12.4} {:>12.4}",
                r.block_size, r.m, r.k, r.len, r.mean_overlap_vs_dsa, r.min_overlap_vs_dsa
            );
        }
        write_rows(&settings.out_dir, "ablation", settings.format, &rows)?;
    }
    Ok(report.failures.is_empty())
}
