//! Indexer inputs for one layer: indexing queries, gates and keys.

use crate::error::{HisaError, Result};

/// Per-layer indexer inputs.
///
/// Matrices are stored row-major as `f32`:
/// `keys` is `[L, d]`, `queries` is `[Q, H, d]`, `gates` is `[Q, H]`.
/// Every value is finite and every query position lies in `[0, L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexerInputs {
    num_heads: usize,
    dim: usize,
    keys: Vec<f32>,
    queries: Vec<f32>,
    gates: Vec<f32>,
    query_positions: Vec<usize>,
}

impl IndexerInputs {
    pub fn new(
        num_heads: usize,
        dim: usize,
        keys: Vec<f32>,
        queries: Vec<f32>,
        gates: Vec<f32>,
        query_positions: Vec<usize>,
    ) -> Result<Self> {
        if num_heads == 0 {
            return Err(HisaError::NonPositiveField { field: "num_index_heads_H" });
        }
        if dim == 0 {
            return Err(HisaError::NonPositiveField { field: "index_dim_d" });
        }
        if !keys.len().is_multiple_of(dim) {
            return Err(HisaError::ShapeMismatch {
                field: "keys",
                expected: keys.len() / dim * dim,
                found: keys.len(),
            });
        }
        let len = keys.len() / dim;
        let rows = query_positions.len();
        check_len("queries", rows * num_heads * dim, queries.len())?;
        check_len("gates", rows * num_heads, gates.len())?;
        check_finite("keys", &keys)?;
        check_finite("queries", &queries)?;
        check_finite("gates", &gates)?;
        for (row, &position) in query_positions.iter().enumerate() {
            if position >= len {
                return Err(HisaError::PositionOutOfRange { row, position, len });
            }
        }
        Ok(Self {
            num_heads,
            dim,
            keys,
            queries,
            gates,
            query_positions,
        })
    }

    pub fn num_heads(&self) -> usize {
        self.num_heads
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Sequence length `L`.
    pub fn seq_len(&self) -> usize {
        self.keys.len() / self.dim
    }

    pub fn num_queries(&self) -> usize {
        self.query_positions.len()
    }

    pub fn key(&self, position: usize) -> &[f32] {
        &self.keys[position * self.dim..(position + 1) * self.dim]
    }

    /// Keys for positions `range`, contiguous row-major.
    pub fn key_rows(&self, range: std::ops::Range<usize>) -> &[f32] {
        &self.keys[range.start * self.dim..range.end * self.dim]
    }

    /// All `H` query vectors of `row`, `[H, d]` row-major.
    pub fn query_heads(&self, row: usize) -> &[f32] {
        let stride = self.num_heads * self.dim;
        &self.queries[row * stride..(row + 1) * stride]
    }

    pub fn query(&self, row: usize, head: usize) -> &[f32] {
        let start = (row * self.num_heads + head) * self.dim;
        &self.queries[start..start + self.dim]
    }

    pub fn gates(&self, row: usize) -> &[f32] {
        &self.gates[row * self.num_heads..(row + 1) * self.num_heads]
    }

    pub fn query_position(&self, row: usize) -> usize {
        self.query_positions[row]
    }

    pub fn query_positions(&self) -> &[usize] {
        &self.query_positions
    }

    pub fn keys_raw(&self) -> &[f32] {
        &self.keys
    }

    pub fn queries_raw(&self) -> &[f32] {
        &self.queries
    }

    pub fn gates_raw(&self) -> &[f32] {
        &self.gates
    }

    pub(crate) fn check_row(&self, row: usize) -> Result<usize> {
        if row >= self.num_queries() {
            return Err(HisaError::QueryRowOutOfRange {
                row,
                rows: self.num_queries(),
            });
        }
        Ok(self.query_positions[row])
    }
}

fn check_len(field: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(HisaError::ShapeMismatch {
            field,
            expected,
            found,
        });
    }
    Ok(())
}

pub(crate) fn check_finite(field: &'static str, values: &[f32]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(offset) => Err(HisaError::NonFiniteValue { field, offset }),
        None => Ok(()),
    }
}
