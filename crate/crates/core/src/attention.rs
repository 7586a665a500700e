//! Downstream consumer of a selection: softmax attention over the selected
//! tokens, each token carrying one latent vector used as both key and value.

use crate::dsa::dot;
use crate::error::{HisaError, Result};
use crate::inputs::check_finite;
use crate::selection::SelectionResult;

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionInputs {
    dim: usize,
    query_states: Vec<f32>,
    latents: Vec<f32>,
    query_positions: Vec<usize>,
    scale: f64,
}

impl AttentionInputs {
    /// `query_states` is `[Q, dim]`, `latents` is `[L, dim]`; the softmax
    /// temperature defaults to `1 / sqrt(dim)`.
    pub fn new(
        dim: usize,
        query_states: Vec<f32>,
        latents: Vec<f32>,
        query_positions: Vec<usize>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(HisaError::NonPositiveField { field: "d_model" });
        }
        if query_states.len() != query_positions.len() * dim {
            return Err(HisaError::ShapeMismatch {
                field: "query_states",
                expected: query_positions.len() * dim,
                found: query_states.len(),
            });
        }
        if !latents.len().is_multiple_of(dim) {
            return Err(HisaError::ShapeMismatch {
                field: "latent_states",
                expected: latents.len() / dim * dim,
                found: latents.len(),
            });
        }
        check_finite("query_states", &query_states)?;
        check_finite("latent_states", &latents)?;
        let len = latents.len() / dim;
        for (row, &position) in query_positions.iter().enumerate() {
            if position >= len {
                return Err(HisaError::PositionOutOfRange { row, position, len });
            }
        }
        Ok(Self {
            dim,
            query_states,
            latents,
            query_positions,
            scale: 1.0 / (dim as f64).sqrt(),
        })
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn seq_len(&self) -> usize {
        self.latents.len() / self.dim
    }

    pub fn query(&self, row: usize) -> &[f32] {
        &self.query_states[row * self.dim..(row + 1) * self.dim]
    }

    pub fn latent(&self, position: usize) -> &[f32] {
        &self.latents[position * self.dim..(position + 1) * self.dim]
    }

    pub fn query_position(&self, row: usize) -> usize {
        self.query_positions[row]
    }

    fn check_row(&self, row: usize) -> Result<usize> {
        self.query_positions
            .get(row)
            .copied()
            .ok_or(HisaError::QueryRowOutOfRange {
                row,
                rows: self.query_positions.len(),
            })
    }
}

/// Softmax weights of query `row` over `indices` (any order), aligned with `indices`.
pub fn attention_weights(attn: &AttentionInputs, row: usize, indices: &[usize]) -> Result<Vec<f64>> {
    let t = attn.check_row(row)?;
    if indices.is_empty() {
        return Err(HisaError::EmptySelection);
    }
    if let Some(&s) = indices.iter().find(|&&s| s > t) {
        return Err(HisaError::CausalViolation { position: s, query: t });
    }
    let q = attn.query(row);
    let logits: Vec<f64> = indices
        .iter()
        .map(|&s| attn.scale * dot(q, attn.latent(s)))
        .collect();
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / total).collect())
}

/// Attention output over an arbitrary index list.
pub fn attend_indices(attn: &AttentionInputs, row: usize, indices: &[usize]) -> Result<Vec<f64>> {
    let weights = attention_weights(attn, row, indices)?;
    let mut out = vec![0.0f64; attn.dim];
    for (&s, w) in indices.iter().zip(weights) {
        for (o, &c) in out.iter_mut().zip(attn.latent(s)) {
            *o += w * c as f64;
        }
    }
    Ok(out)
}

/// `u_t`: attention of query `row` over the selected tokens only.
pub fn sparse_attend(attn: &AttentionInputs, selection: &SelectionResult, row: usize) -> Result<Vec<f64>> {
    attend_indices(attn, row, &selection.token_indices)
}

/// Causal softmax attention over the full prefix `[0, t]`.
pub fn dense_attend(attn: &AttentionInputs, row: usize) -> Result<Vec<f64>> {
    let t = attn.check_row(row)?;
    let q = attn.query(row);
    let mut logits = Vec::with_capacity(t + 1);
    for s in 0..=t {
        let mut acc = 0.0f64;
        for (a, b) in q.iter().zip(attn.latent(s)) {
            acc += *a as f64 * *b as f64;
        }
        logits.push(acc * attn.scale);
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    let mut out = vec![0.0f64; attn.dim];
    for (s, l) in logits.into_iter().enumerate() {
        let e = (l - max).exp();
        total += e;
        for (o, &c) in out.iter_mut().zip(attn.latent(s)) {
            *o += e * c as f64;
        }
    }
    out.iter_mut().for_each(|o| *o /= total);
    Ok(out)
}
