//! Synthetic needle-in-a-haystack instances and selection-quality metrics.
//!
//! A haystack of isotropic Gaussian keys is scored against one final query.
//! A single needle key is planted along the gate-weighted query direction,
//! scaled so its indexer score sits `margin_sigma` standard deviations above
//! the haystack mean. The flat indexer always retrieves it; a block-level
//! filter only does if the needle lifts its block's pooled score far enough.

use std::collections::BTreeSet;

use rand::Rng;
use serde::Serialize;

use crate::cache::build_block_summaries;
use crate::config::{matched_block_budget, ratio_block_budget, HisaConfig};
use crate::counter::NoCount;
use crate::dsa::token_score;
use crate::error::{HisaError, Result};
use crate::inputs::IndexerInputs;
use crate::selection::SelectionResult;
use crate::strategy::Strategy;
use crate::synth::{normal_vec, rng};

/// Generator knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NiahParams {
    /// Needle score above the haystack mean, in haystack standard deviations.
    pub margin_sigma: f64,
}

impl Default for NiahParams {
    fn default() -> Self {
        Self { margin_sigma: 50.0 }
    }
}

#[derive(Debug, Clone)]
pub struct NiahInstance {
    pub inputs: IndexerInputs,
    pub needle_positions: Vec<usize>,
    pub haystack_seed: u64,
}

/// Needle position for a depth in `[0, 1]`: `floor(depth * (L - 1))`.
pub fn needle_position(len: usize, depth: f64) -> usize {
    ((depth.clamp(0.0, 1.0) * (len - 1) as f64).floor() as usize).min(len - 1)
}

pub fn generate_niah(len: usize, depth: f64, seed: u64, cfg: &HisaConfig) -> NiahInstance {
    generate_niah_with(&NiahParams::default(), len, depth, seed, cfg)
}

pub fn generate_niah_with(
    params: &NiahParams,
    len: usize,
    depth: f64,
    seed: u64,
    cfg: &HisaConfig,
) -> NiahInstance {
    assert!(len >= 1, "needle-in-a-haystack needs at least one token");
    let (heads, dim) = (cfg.num_heads(), cfg.index_dim());
    let stream = ((len as u64) << 16) ^ (depth.clamp(0.0, 1.0) * 10_000.0).round() as u64;
    let mut rng = rng(seed, stream);
    let mut keys = normal_vec(&mut rng, len * dim);
    let queries = normal_vec(&mut rng, heads * dim);
    let gates: Vec<f32> = (0..heads).map(|_| rng.random_range(0.5f32..1.5)).collect();
    let needle = needle_position(len, depth);

    let haystack = IndexerInputs::new(heads, dim, keys.clone(), queries.clone(), gates.clone(), vec![len - 1])
        .expect("generated haystack is well-formed");
    let (mean, std) = haystack_moments(&haystack, needle);

    // u = normalize(Σ_j w_j q_j); every head's ReLU is then active along u
    // in practice, so the score is linear in the needle's length.
    let mut dir = vec![0.0f64; dim];
    for (q, &w) in queries.chunks_exact(dim).zip(&gates) {
        for (d, &v) in dir.iter_mut().zip(q) {
            *d += w as f64 * v as f64;
        }
    }
    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    dir.iter_mut().for_each(|v| *v /= norm);
    let unit_score: f64 = queries
        .chunks_exact(dim)
        .zip(&gates)
        .map(|(q, &w)| {
            let d: f64 = q.iter().zip(&dir).map(|(&a, b)| a as f64 * b).sum();
            w as f64 * d.max(0.0)
        })
        .sum();
    let target = mean + params.margin_sigma * std;
    let alpha = target.max(0.0) / unit_score;
    for (k, d) in keys[needle * dim..(needle + 1) * dim].iter_mut().zip(&dir) {
        *k = (alpha * d) as f32;
    }

    let inputs = IndexerInputs::new(heads, dim, keys, queries, gates, vec![len - 1])
        .expect("generated instance is well-formed");
    NiahInstance {
        inputs,
        needle_positions: vec![needle],
        haystack_seed: seed,
    }
}

/// Mean and standard deviation of the final query's scores over every
/// haystack token other than `skip`.
fn haystack_moments(inputs: &IndexerInputs, skip: usize) -> (f64, f64) {
    let n = inputs.seq_len();
    if n <= 1 {
        return (0.0, 1.0);
    }
    let scores: Vec<f64> = (0..n)
        .filter(|&s| s != skip)
        .map(|s| token_score(inputs, 0, s))
        .collect();
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    let var = scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / scores.len() as f64;
    (mean, var.sqrt().max(f64::MIN_POSITIVE))
}

/// Intersection over union of two selected token sets.
pub fn selection_overlap(a: &SelectionResult, b: &SelectionResult) -> Result<f64> {
    if a.is_empty() && b.is_empty() {
        return Err(HisaError::BothEmpty);
    }
    let (x, y) = (&a.token_indices, &b.token_indices);
    let (mut i, mut j, mut inter) = (0, 0, 0usize);
    while i < x.len() && j < y.len() {
        match x[i].cmp(&y[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    Ok(inter as f64 / (x.len() + y.len() - inter) as f64)
}

/// Fraction of the instance's needles present in `selection`.
pub fn needle_recall(instance: &NiahInstance, selection: &SelectionResult) -> f64 {
    if instance.needle_positions.is_empty() {
        return 1.0;
    }
    let needles: BTreeSet<usize> = instance.needle_positions.iter().copied().collect();
    let hit = needles.iter().filter(|&&p| selection.contains(p)).count();
    hit as f64 / needles.len() as f64
}

/// One CSV row: `strategy, L, depth, seed, recall, overlap_vs_dsa`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NiahRecord {
    pub strategy: Strategy,
    #[serde(rename = "L")]
    pub len: usize,
    pub depth: f64,
    pub seed: u64,
    pub recall: f64,
    pub overlap_vs_dsa: f64,
}

/// Per-strategy configs used on the grid: the flat indexer uses `base`;
/// the hierarchical one keeps `M:m = ratio:1`; the block baseline keeps
/// `ceil(k / B)` blocks so it retains the same number of tokens.
pub fn strategy_config(base: &HisaConfig, strategy: Strategy, len: usize, ratio: usize) -> Result<HisaConfig> {
    let (b, k) = (base.block_size(), base.token_budget());
    match strategy {
        Strategy::Dsa => Ok(*base),
        Strategy::Hisa => base.with_block_budget(ratio_block_budget(len, b, k, ratio)),
        Strategy::BlockSparse => base.with_block_budget(matched_block_budget(k, b)),
    }
}

/// Evaluates `strategies` on one instance's final query.
pub fn evaluate_instance(
    instance: &NiahInstance,
    depth: f64,
    base: &HisaConfig,
    strategies: &[Strategy],
    ratio: usize,
) -> Result<Vec<NiahRecord>> {
    let inputs = &instance.inputs;
    let len = inputs.seq_len();
    let cache = build_block_summaries(inputs, base.block_size())?;
    let flat = Strategy::Dsa.select(inputs, &cache, base, 0, &mut NoCount)?;
    strategies
        .iter()
        .map(|&strategy| {
            let cfg = strategy_config(base, strategy, len, ratio)?;
            let sel = if strategy == Strategy::Dsa {
                flat.clone()
            } else {
                strategy.select(inputs, &cache, &cfg, 0, &mut NoCount)?
            };
            Ok(NiahRecord {
                strategy,
                len,
                depth,
                seed: instance.haystack_seed,
                recall: needle_recall(instance, &sel),
                overlap_vs_dsa: selection_overlap(&sel, &flat)?,
            })
        })
        .collect()
}
