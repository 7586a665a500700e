//! Per-block running sums of indexing keys.
//!
//! Block `b` covers positions `[b*B, (b+1)*B)`. The cache grows one token at a
//! time alongside the KV cache; a block's pooled key is the mean of the keys
//! appended to it so far, so a partially filled last block pools over only
//! its present tokens.

use crate::error::{HisaError, Result};
use crate::inputs::IndexerInputs;

#[derive(Debug, Clone, PartialEq)]
pub struct BlockSummaryCache {
    block_size: usize,
    dim: usize,
    len: usize,
    sums: Vec<f64>,
    maxes: Vec<f32>,
    counts: Vec<usize>,
}

impl BlockSummaryCache {
    pub fn new(block_size: usize, dim: usize) -> Result<Self> {
        if block_size == 0 {
            return Err(HisaError::NonPositiveField { field: "block_size_B" });
        }
        if dim == 0 {
            return Err(HisaError::NonPositiveField { field: "index_dim_d" });
        }
        Ok(Self {
            block_size,
            dim,
            len: 0,
            sums: Vec::new(),
            maxes: Vec::new(),
            counts: Vec::new(),
        })
    }

    /// Summaries of a row-major `[L, dim]` key matrix in one pass.
    pub fn from_keys(keys: &[f32], dim: usize, block_size: usize) -> Result<Self> {
        let mut cache = Self::new(block_size, dim)?;
        if !keys.len().is_multiple_of(dim) {
            return Err(HisaError::DimensionMismatch {
                expected: dim,
                found: keys.len() % dim,
            });
        }
        let len = keys.len() / dim;
        if len == 0 {
            return Err(HisaError::EmptySequence);
        }
        let blocks = len.div_ceil(block_size);
        cache.sums = vec![0.0; blocks * dim];
        cache.maxes = vec![f32::NEG_INFINITY; blocks * dim];
        cache.counts.reserve(blocks);
        for (b, chunk) in keys.chunks(block_size * dim).enumerate() {
            let sum = &mut cache.sums[b * dim..(b + 1) * dim];
            let max = &mut cache.maxes[b * dim..(b + 1) * dim];
            for key in chunk.chunks_exact(dim) {
                for i in 0..dim {
                    sum[i] += key[i] as f64;
                    max[i] = max[i].max(key[i]);
                }
            }
            cache.counts.push(chunk.len() / dim);
        }
        cache.len = len;
        Ok(cache)
    }

    /// Appends the key of the next position, `len()`.
    pub fn append_token(&mut self, key: &[f32]) -> Result<()> {
        if key.len() != self.dim {
            return Err(HisaError::DimensionMismatch {
                expected: self.dim,
                found: key.len(),
            });
        }
        let b = self.len / self.block_size;
        if b == self.counts.len() {
            self.counts.push(0);
            self.sums.resize(self.sums.len() + self.dim, 0.0);
            self.maxes.resize(self.maxes.len() + self.dim, f32::NEG_INFINITY);
        }
        let range = b * self.dim..(b + 1) * self.dim;
        for ((s, m), &k) in self.sums[range.clone()]
            .iter_mut()
            .zip(&mut self.maxes[range])
            .zip(key)
        {
            *s += k as f64;
            *m = m.max(k);
        }
        self.counts[b] += 1;
        self.len += 1;
        Ok(())
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of tokens appended.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn num_blocks(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn block_sum(&self, block: usize) -> &[f64] {
        &self.sums[block * self.dim..(block + 1) * self.dim]
    }

    pub fn block_max(&self, block: usize) -> &[f32] {
        &self.maxes[block * self.dim..(block + 1) * self.dim]
    }

    /// Mean of the keys in `block`.
    pub fn pooled(&self, block: usize) -> Result<Vec<f64>> {
        let n = self.nonempty_count(block)?;
        Ok(self.block_sum(block).iter().map(|s| s / n as f64).collect())
    }

    /// Element-wise maximum of the keys in `block`.
    pub fn pooled_max(&self, block: usize) -> Result<Vec<f32>> {
        self.nonempty_count(block)?;
        Ok(self.block_max(block).to_vec())
    }

    fn nonempty_count(&self, block: usize) -> Result<usize> {
        match self.counts.get(block) {
            Some(&n) if n > 0 => Ok(n),
            _ => Err(HisaError::EmptyBlock { block }),
        }
    }
}

/// Block summaries for all keys of `inputs`.
pub fn build_block_summaries(inputs: &IndexerInputs, block_size: usize) -> Result<BlockSummaryCache> {
    BlockSummaryCache::from_keys(inputs.keys_raw(), inputs.dim(), block_size)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{normal_vec, rng};

    fn naive_mean(keys: &[f32], dim: usize, range: std::ops::Range<usize>) -> Vec<f64> {
        let mut out = vec![0.0f64; dim];
        for s in range.clone() {
            for i in 0..dim {
                out[i] += keys[s * dim + i] as f64;
            }
        }
        out.iter().map(|v| v / range.len() as f64).collect()
    }

    #[test]
    fn mean_of_two() {
        let cache = BlockSummaryCache::from_keys(&[1.0, 2.0, 3.0, 4.0], 2, 2).unwrap();
        assert_eq!(cache.pooled(0).unwrap(), vec![2.0, 3.0]);
        assert_eq!(cache.pooled_max(0).unwrap(), vec![3.0, 4.0]);
    }

    #[test]
    fn identical_keys_pool_to_themselves() {
        let keys: Vec<f32> = [0.25f32, -1.5, 3.0].repeat(10);
        for b in 1..=10 {
            let cache = BlockSummaryCache::from_keys(&keys, 3, b).unwrap();
            for blk in 0..cache.num_blocks() {
                assert_eq!(cache.pooled(blk).unwrap(), vec![0.25, -1.5, 3.0]);
            }
        }
    }

    #[test]
    fn thousand_keys_match_naive_mean() {
        let dim = 8;
        let keys = normal_vec(&mut rng(4, 0), 1000 * dim);
        let cache = BlockSummaryCache::from_keys(&keys, dim, 128).unwrap();
        assert_eq!(cache.num_blocks(), 8);
        assert_eq!(cache.counts()[7], 1000 - 7 * 128);
        for b in 0..8 {
            let expected = naive_mean(&keys, dim, b * 128..((b + 1) * 128).min(1000));
            for (a, e) in cache.pooled(b).unwrap().iter().zip(expected) {
                assert!((a - e).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn append_rollover_and_errors() {
        let mut cache = BlockSummaryCache::new(4, 2).unwrap();
        assert!(matches!(cache.pooled(0), Err(HisaError::EmptyBlock { block: 0 })));
        cache.append_token(&[1.0, -1.0]).unwrap();
        assert_eq!(cache.counts(), &[1]);
        assert_eq!(cache.pooled(0).unwrap(), vec![1.0, -1.0]);
        for _ in 0..4 {
            cache.append_token(&[0.0, 0.0]).unwrap();
        }
        assert_eq!(cache.counts(), &[4, 1]);
        assert!(matches!(
            cache.append_token(&[0.0]),
            Err(HisaError::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn empty_sequence_rejected() {
        assert!(matches!(
            BlockSummaryCache::from_keys(&[], 4, 2),
            Err(HisaError::EmptySequence)
        ));
    }

    #[test]
    fn streaming_matches_batch() {
        let dim = 16;
        let keys = normal_vec(&mut rng(8, 0), 500 * dim);
        let batch = BlockSummaryCache::from_keys(&keys, dim, 64).unwrap();
        let mut stream = BlockSummaryCache::new(64, dim).unwrap();
        for key in keys.chunks_exact(dim) {
            stream.append_token(key).unwrap();
        }
        assert_eq!(stream.counts(), batch.counts());
        for b in 0..batch.num_blocks() {
            for (a, e) in stream.pooled(b).unwrap().iter().zip(batch.pooled(b).unwrap()) {
                assert!((a - e).abs() <= 1e-6);
            }
        }
    }
}
