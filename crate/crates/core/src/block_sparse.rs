//! Block-only baseline: keep every token of the selected blocks.

use crate::cache::BlockSummaryCache;
use crate::config::HisaConfig;
use crate::counter::OpSink;
use crate::error::Result;
use crate::hisa::{candidate_union, score_blocks, select_blocks};
use crate::inputs::IndexerInputs;
use crate::selection::SelectionResult;

/// Stage 1 only. `cfg.block_budget()` is the block count `m'`; pass
/// `m' = k / B` to match a token budget `k`.
pub fn block_sparse_select<S: OpSink>(
    inputs: &IndexerInputs,
    cache: &BlockSummaryCache,
    cfg: &HisaConfig,
    row: usize,
    sink: &mut S,
) -> Result<SelectionResult> {
    let t = inputs.check_row(row)?;
    let block_scores = score_blocks(inputs, cache, cfg, row, sink)?;
    let blocks = select_blocks(&block_scores, cfg, sink)?;
    let tokens = candidate_union(&blocks, cfg.block_size(), t, inputs.seq_len());
    Ok(SelectionResult {
        candidate_size: tokens.len(),
        token_indices: tokens,
        selected_blocks: blocks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cache::build_block_summaries;
    use crate::counter::{NoCount, OpCounter};
    use crate::synth::random_inputs;

    #[test]
    fn all_blocks_gives_dense_prefix() {
        let inputs = random_inputs(100, 2, 8, &[99, 37], 2);
        let cache = build_block_summaries(&inputs, 10).unwrap();
        let cfg = HisaConfig::new(10, 10, 1, 2, 8).unwrap();
        for row in 0..2 {
            let t = inputs.query_position(row);
            let r = block_sparse_select(&inputs, &cache, &cfg, row, &mut NoCount).unwrap();
            assert_eq!(r.token_indices, (0..=t).collect::<Vec<_>>());
        }
    }

    #[test]
    fn equals_union_of_selected_blocks() {
        let inputs = random_inputs(2000, 2, 8, &[1999, 1234, 600], 8);
        let cache = build_block_summaries(&inputs, 32).unwrap();
        let cfg = HisaConfig::new(32, 5, 160, 2, 8).unwrap();
        for row in 0..3 {
            let t = inputs.query_position(row);
            let mut counter = OpCounter::new();
            let r = block_sparse_select(&inputs, &cache, &cfg, row, &mut counter).unwrap();
            let j = score_blocks(&inputs, &cache, &cfg, row, &mut NoCount).unwrap();
            let blocks = select_blocks(&j, &cfg, &mut NoCount).unwrap();
            assert_eq!(r.selected_blocks, blocks);
            assert_eq!(r.token_indices, candidate_union(&blocks, 32, t, 2000));
            assert!(r.len() <= 7 * 32);
            assert_eq!(counter.dot_products, 2 * (t / 32 + 1) as u64);
        }
    }
}
