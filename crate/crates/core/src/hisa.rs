//! Two-stage hierarchical indexer.
//!
//! Stage 1 scores one pooled key per causally eligible block with the same
//! gated ReLU form as the flat indexer and keeps the top `m` blocks, plus the
//! first block and the block containing the query. Stage 2 scores only the
//! tokens of those blocks (clipped to `<= t`) and keeps the top `k`.
//!
//! When `t + 1 <= m * B` every eligible block survives Stage 1, so the result
//! is exactly the flat indexer's.

use crate::config::{BlockPooling, ForcedBudget, HisaConfig};
use crate::cache::BlockSummaryCache;
use crate::counter::OpSink;
use crate::dsa::{check_compatible, dot, gated_relu_score, score_candidates};
use crate::error::{HisaError, Result};
use crate::inputs::IndexerInputs;
use crate::selection::{top_k_positions, ScoreVector, SelectionResult};

#[inline]
fn dot_mixed(q: &[f32], v: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let cq = q.chunks_exact(4);
    let cv = v.chunks_exact(4);
    let (rq, rv) = (cq.remainder(), cv.remainder());
    for (x, y) in cq.zip(cv) {
        for i in 0..4 {
            acc[i] += x[i] as f64 * y[i];
        }
    }
    let mut tail = 0.0;
    for (x, y) in rq.iter().zip(rv) {
        tail += *x as f64 * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn check_cache(inputs: &IndexerInputs, cache: &BlockSummaryCache, cfg: &HisaConfig, t: usize) -> Result<()> {
    if cache.block_size() != cfg.block_size() {
        return Err(HisaError::DimensionMismatch {
            expected: cfg.block_size(),
            found: cache.block_size(),
        });
    }
    if cache.dim() != inputs.dim() {
        return Err(HisaError::DimensionMismatch {
            expected: inputs.dim(),
            found: cache.dim(),
        });
    }
    if cache.len() < t + 1 {
        return Err(HisaError::CacheTooShort {
            cached: cache.len(),
            position: t,
            needed: t + 1,
        });
    }
    Ok(())
}

/// Block scores `J(t, b)` for every block eligible for query `row`: the
/// blocks before the one containing `t`, and that block itself.
///
/// The current block is pooled over positions `<= t` only. If the cache has
/// already absorbed later tokens of that block, its summary is recomputed
/// from the keys (counted as pool updates).
pub fn score_blocks<S: OpSink>(
    inputs: &IndexerInputs,
    cache: &BlockSummaryCache,
    cfg: &HisaConfig,
    row: usize,
    sink: &mut S,
) -> Result<ScoreVector> {
    check_compatible(cfg, inputs)?;
    let t = inputs.check_row(row)?;
    check_cache(inputs, cache, cfg, t)?;

    let (dim, bsize) = (inputs.dim(), cfg.block_size());
    let heads = inputs.query_heads(row);
    let gates = inputs.gates(row);
    let current = t / bsize;
    let visible = t + 1 - current * bsize;
    sink.dot_products((inputs.num_heads() * (current + 1)) as u64);

    let mut scores = Vec::with_capacity(current + 1);
    match cfg.pooling() {
        BlockPooling::Mean => {
            for b in 0..current {
                let sum = cache.block_sum(b);
                let n = cache.counts()[b] as f64;
                scores.push(gated_relu_score(heads, gates, dim, |q| dot_mixed(q, sum) / n));
            }
            let last = if cache.counts()[current] == visible {
                scores_from_sum(heads, gates, dim, cache.block_sum(current), visible)
            } else {
                sink.pool_updates(visible as u64);
                let mut sum = vec![0.0f64; dim];
                for key in inputs.key_rows(current * bsize..t + 1).chunks_exact(dim) {
                    for (s, &k) in sum.iter_mut().zip(key) {
                        *s += k as f64;
                    }
                }
                scores_from_sum(heads, gates, dim, &sum, visible)
            };
            scores.push(last);
        }
        BlockPooling::Max => {
            for b in 0..current {
                let max = cache.block_max(b);
                scores.push(gated_relu_score(heads, gates, dim, |q| dot(q, max)));
            }
            let last = if cache.counts()[current] == visible {
                cache.block_max(current).to_vec()
            } else {
                sink.pool_updates(visible as u64);
                let mut max = vec![f32::NEG_INFINITY; dim];
                for key in inputs.key_rows(current * bsize..t + 1).chunks_exact(dim) {
                    for (m, &k) in max.iter_mut().zip(key) {
                        *m = m.max(k);
                    }
                }
                max
            };
            scores.push(gated_relu_score(heads, gates, dim, |q| dot(q, &last)));
        }
    }
    Ok(ScoreVector::from_parts_unchecked((0..=current).collect(), scores))
}

fn scores_from_sum(heads: &[f32], gates: &[f32], dim: usize, sum: &[f64], n: usize) -> f64 {
    gated_relu_score(heads, gates, dim, |q| dot_mixed(q, sum) / n as f64)
}

/// Block set `C_t`, ascending: the top `m` blocks by score together with the
/// first and last eligible blocks when forced inclusion is on.
pub fn select_blocks<S: OpSink>(
    block_scores: &ScoreVector,
    cfg: &HisaConfig,
    sink: &mut S,
) -> Result<Vec<usize>> {
    let (first, last) = match (block_scores.positions().first(), block_scores.positions().last()) {
        (Some(&f), Some(&l)) => (f, l),
        _ => return Err(HisaError::NoEligibleBlocks),
    };
    let m = cfg.block_budget();
    if !cfg.force_first_last() {
        return Ok(top_k_positions(block_scores, m, cfg.tie_break(), sink));
    }
    let mut forced = vec![first];
    if last != first {
        forced.push(last);
    }
    let mut blocks = match cfg.forced_budget() {
        ForcedBudget::Additional => top_k_positions(block_scores, m, cfg.tie_break(), sink),
        ForcedBudget::WithinBudget => {
            let slots = m.saturating_sub(forced.len());
            let n = block_scores.len();
            let (positions, scores): (Vec<usize>, Vec<f64>) = block_scores
                .positions()
                .iter()
                .zip(block_scores.scores())
                .enumerate()
                .filter(|&(i, _)| i != 0 && i != n - 1)
                .map(|(_, (&p, &s))| (p, s))
                .unzip();
            let rest = ScoreVector::from_parts_unchecked(positions, scores);
            top_k_positions(&rest, slots, cfg.tie_break(), sink)
        }
    };
    for f in forced {
        if let Err(at) = blocks.binary_search(&f) {
            blocks.insert(at, f);
        }
    }
    Ok(blocks)
}

/// Candidate pool `Ω_t`: all tokens of `blocks` that are `<= t` and `< seq_len`,
/// ascending. `blocks` must be ascending.
pub fn candidate_union(blocks: &[usize], block_size: usize, t: usize, seq_len: usize) -> Vec<usize> {
    let end = (t + 1).min(seq_len);
    let mut out = Vec::with_capacity(blocks.len() * block_size);
    for &b in blocks {
        let lo = b * block_size;
        let hi = ((b + 1) * block_size).min(end);
        if lo < hi {
            out.extend(lo..hi);
        }
    }
    out
}

/// Hierarchical selection for query `row`.
pub fn hisa_select<S: OpSink>(
    inputs: &IndexerInputs,
    cache: &BlockSummaryCache,
    cfg: &HisaConfig,
    row: usize,
    sink: &mut S,
) -> Result<SelectionResult> {
    let t = inputs.check_row(row)?;
    let block_scores = score_blocks(inputs, cache, cfg, row, sink)?;
    let blocks = select_blocks(&block_scores, cfg, sink)?;
    let pool = candidate_union(&blocks, cfg.block_size(), t, inputs.seq_len());
    let candidate_size = pool.len();
    let token_scores = score_candidates(inputs, row, pool, sink);
    Ok(SelectionResult {
        token_indices: top_k_positions(&token_scores, cfg.token_budget(), cfg.tie_break(), sink),
        selected_blocks: blocks,
        candidate_size,
    })
}
