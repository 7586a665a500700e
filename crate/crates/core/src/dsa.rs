//! Flat token-level indexer: score every prefix token, keep the top `k`.
//!
//! The relevance of key `s` to query `t` is
//! `I(t, s) = Σ_j w(t, j) · ReLU(q(t, j) · k(s))`, with ReLU applied per head
//! before gating. Products are accumulated in `f64`.

use crate::config::HisaConfig;
use crate::counter::OpSink;
use crate::error::{HisaError, Result};
use crate::inputs::IndexerInputs;
use crate::selection::{top_k_positions, ScoreVector, SelectionResult};

/// `f32 · f32` dot product accumulated in `f64` over four lanes.
#[inline]
pub(crate) fn dot(a: &[f32], b: &[f32]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for i in 0..4 {
            acc[i] += x[i] as f64 * y[i] as f64;
        }
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += *x as f64 * *y as f64;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Gated ReLU score of one key vector against all heads of a query.
#[inline]
pub(crate) fn gated_relu_score<F>(heads: &[f32], gates: &[f32], dim: usize, mut head_dot: F) -> f64
where
    F: FnMut(&[f32]) -> f64,
{
    let mut score = 0.0;
    for (q, &w) in heads.chunks_exact(dim).zip(gates) {
        score += w as f64 * head_dot(q).max(0.0);
    }
    score
}

#[inline]
pub(crate) fn token_score(inputs: &IndexerInputs, row: usize, position: usize) -> f64 {
    let key = inputs.key(position);
    gated_relu_score(inputs.query_heads(row), inputs.gates(row), inputs.dim(), |q| dot(q, key))
}

pub(crate) fn check_compatible(cfg: &HisaConfig, inputs: &IndexerInputs) -> Result<()> {
    if cfg.num_heads() != inputs.num_heads() {
        return Err(HisaError::DimensionMismatch {
            expected: cfg.num_heads(),
            found: inputs.num_heads(),
        });
    }
    if cfg.index_dim() != inputs.dim() {
        return Err(HisaError::DimensionMismatch {
            expected: cfg.index_dim(),
            found: inputs.dim(),
        });
    }
    Ok(())
}

/// Scores `candidates` (ascending, all `<= t`) for query `row`.
pub fn score_tokens<S: OpSink>(
    inputs: &IndexerInputs,
    row: usize,
    candidates: &[usize],
    sink: &mut S,
) -> Result<ScoreVector> {
    let t = inputs.check_row(row)?;
    if let Some(at) = candidates.windows(2).position(|w| w[0] >= w[1]) {
        return Err(HisaError::UnsortedPositions { at: at + 1 });
    }
    if let Some(&last) = candidates.last() {
        if last > t {
            return Err(HisaError::CausalViolation {
                position: last,
                query: t,
            });
        }
    }
    Ok(score_candidates(inputs, row, candidates.to_vec(), sink))
}

/// Scoring without validation; `candidates` must be ascending and causal.
pub(crate) fn score_candidates<S: OpSink>(
    inputs: &IndexerInputs,
    row: usize,
    candidates: Vec<usize>,
    sink: &mut S,
) -> ScoreVector {
    sink.dot_products((inputs.num_heads() * candidates.len()) as u64);
    let scores = candidates
        .iter()
        .map(|&s| token_score(inputs, row, s))
        .collect();
    ScoreVector::from_parts_unchecked(candidates, scores)
}

/// Flat selection over the full causal prefix `[0, t]`.
pub fn dsa_select<S: OpSink>(
    inputs: &IndexerInputs,
    cfg: &HisaConfig,
    row: usize,
    sink: &mut S,
) -> Result<SelectionResult> {
    check_compatible(cfg, inputs)?;
    let t = inputs.check_row(row)?;
    let scores = score_candidates(inputs, row, (0..=t).collect(), sink);
    Ok(SelectionResult {
        token_indices: top_k_positions(&scores, cfg.token_budget(), cfg.tie_break(), sink),
        selected_blocks: Vec::new(),
        candidate_size: t + 1,
    })
}
