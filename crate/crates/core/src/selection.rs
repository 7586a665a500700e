//! Score vectors, selection results and deterministic top-k.

use std::cmp::Ordering;

use serde::Serialize;

use crate::config::TieBreak;
use crate::counter::{NoCount, OpSink};
use crate::error::{HisaError, Result};

/// Scores over an ascending set of token (or block) positions.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    positions: Vec<usize>,
    scores: Vec<f64>,
}

impl ScoreVector {
    pub fn new(positions: Vec<usize>, scores: Vec<f64>) -> Result<Self> {
        if positions.len() != scores.len() {
            return Err(HisaError::ShapeMismatch {
                field: "scores",
                expected: positions.len(),
                found: scores.len(),
            });
        }
        if let Some(at) = positions.windows(2).position(|w| w[0] >= w[1]) {
            return Err(HisaError::UnsortedPositions { at: at + 1 });
        }
        Ok(Self { positions, scores })
    }

    pub(crate) fn from_parts_unchecked(positions: Vec<usize>, scores: Vec<f64>) -> Self {
        debug_assert_eq!(positions.len(), scores.len());
        debug_assert!(positions.windows(2).all(|w| w[0] < w[1]));
        Self { positions, scores }
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Score at `position`, if present.
    pub fn score_of(&self, position: usize) -> Option<f64> {
        self.positions
            .binary_search(&position)
            .ok()
            .map(|i| self.scores[i])
    }
}

/// Output of an indexer for one query.
///
/// `token_indices` is the set `T_t` in ascending order, `selected_blocks` the
/// block set `C_t` (empty for the flat indexer) and `candidate_size` the
/// number of tokens scored or kept at the token level, `|Ω_t|`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct SelectionResult {
    pub token_indices: Vec<usize>,
    pub selected_blocks: Vec<usize>,
    pub candidate_size: usize,
}

impl SelectionResult {
    pub fn len(&self) -> usize {
        self.token_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.token_indices.is_empty()
    }

    pub fn contains(&self, position: usize) -> bool {
        self.token_indices.binary_search(&position).is_ok()
    }
}

/// Total order used by every top-k in the crate: higher score first, then
/// the tie-break rule on position. Scores are finite, so `-0.0 == 0.0`.
#[inline]
pub fn rank_order(tie_break: TieBreak, a: (f64, usize), b: (f64, usize)) -> Ordering {
    b.0.partial_cmp(&a.0)
        .unwrap_or(Ordering::Equal)
        .then_with(|| match tie_break {
            TieBreak::SmallestIndex => a.1.cmp(&b.1),
            TieBreak::LargestIndex => b.1.cmp(&a.1),
        })
}

/// Positions of the `k` best entries, returned in ascending position order.
/// Returns every position when `k >= scores.len()`.
pub fn top_k_positions<S: OpSink>(
    scores: &ScoreVector,
    k: usize,
    tie_break: TieBreak,
    sink: &mut S,
) -> Vec<usize> {
    if k >= scores.len() {
        return scores.positions.clone();
    }
    if k == 0 {
        return Vec::new();
    }
    let mut pairs: Vec<(f64, usize)> = scores
        .scores
        .iter()
        .copied()
        .zip(scores.positions.iter().copied())
        .collect();
    let mut cmps = 0u64;
    pairs.select_nth_unstable_by(k - 1, |a, b| {
        cmps += 1;
        rank_order(tie_break, *a, *b)
    });
    sink.comparisons(cmps);
    let mut out: Vec<usize> = pairs[..k].iter().map(|p| p.1).collect();
    out.sort_unstable();
    out
}

/// Top-k over token scores, as a [`SelectionResult`] with no block set.
pub fn top_k_tokens(scores: &ScoreVector, k: usize, tie_break: TieBreak) -> SelectionResult {
    SelectionResult {
        token_indices: top_k_positions(scores, k, tie_break, &mut NoCount),
        selected_blocks: Vec::new(),
        candidate_size: scores.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sv(scores: &[f64]) -> ScoreVector {
        ScoreVector::new((0..scores.len()).collect(), scores.to_vec()).unwrap()
    }

    /// Full sort with the same tie rule, then truncate.
    fn sort_oracle(scores: &ScoreVector, k: usize, tie: TieBreak) -> Vec<usize> {
        let mut pairs: Vec<(f64, usize)> = scores
            .scores()
            .iter()
            .copied()
            .zip(scores.positions().iter().copied())
            .collect();
        pairs.sort_by(|a, b| {
            if a.0 > b.0 {
                Ordering::Less
            } else if a.0 < b.0 {
                Ordering::Greater
            } else if tie == TieBreak::SmallestIndex {
                a.1.cmp(&b.1)
            } else {
                b.1.cmp(&a.1)
            }
        });
        let mut out: Vec<usize> = pairs.into_iter().take(k).map(|p| p.1).collect();
        out.sort();
        out
    }

    #[test]
    fn forced_ordering() {
        let r = top_k_tokens(&sv(&[5.0, 1.0, 3.0]), 2, TieBreak::SmallestIndex);
        assert_eq!(r.token_indices, vec![0, 2]);
        assert!(r.selected_blocks.is_empty());
        assert_eq!(r.candidate_size, 3);
    }

    #[test]
    fn tie_break_rules() {
        let s = sv(&[1.0, 1.0, 1.0]);
        assert_eq!(top_k_tokens(&s, 2, TieBreak::SmallestIndex).token_indices, vec![0, 1]);
        assert_eq!(top_k_tokens(&s, 2, TieBreak::LargestIndex).token_indices, vec![1, 2]);
    }

    #[test]
    fn signed_zero_ties() {
        let s = sv(&[0.0, -0.0, 0.0]);
        assert_eq!(top_k_tokens(&s, 1, TieBreak::LargestIndex).token_indices, vec![2]);
        assert_eq!(top_k_tokens(&s, 2, TieBreak::SmallestIndex).token_indices, vec![0, 1]);
    }

    #[test]
    fn k_exceeding_len_returns_all() {
        let s = ScoreVector::new(vec![3, 7, 9], vec![0.1, 0.3, 0.2]).unwrap();
        assert_eq!(top_k_tokens(&s, 10, TieBreak::SmallestIndex).token_indices, vec![3, 7, 9]);
    }

    #[test]
    fn score_vector_validation() {
        assert!(matches!(
            ScoreVector::new(vec![0, 2, 2], vec![0.0; 3]),
            Err(HisaError::UnsortedPositions { at: 2 })
        ));
        assert!(ScoreVector::new(vec![0, 1], vec![0.0]).is_err());
        let s = ScoreVector::new(vec![4, 8], vec![1.5, 2.5]).unwrap();
        assert_eq!(s.score_of(8), Some(2.5));
        assert_eq!(s.score_of(5), None);
    }

    #[test]
    fn random_thousand_matches_sort_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let scores: Vec<f64> = (0..1000).map(|_| rng.random_range(-1.0..1.0)).collect();
        let s = sv(&scores);
        for tie in [TieBreak::SmallestIndex, TieBreak::LargestIndex] {
            assert_eq!(top_k_tokens(&s, 50, tie).token_indices, sort_oracle(&s, 50, tie));
        }
    }

    proptest! {
        #[test]
        fn matches_sort_oracle_with_ties(
            raw in proptest::collection::vec(-3i32..3, 1..200),
            k in 1usize..64,
            largest in any::<bool>(),
        ) {
            let tie = if largest { TieBreak::LargestIndex } else { TieBreak::SmallestIndex };
            let s = sv(&raw.iter().map(|&v| v as f64 * 0.5).collect::<Vec<_>>());
            let got = top_k_tokens(&s, k, tie).token_indices;
            prop_assert_eq!(got.len(), k.min(raw.len()));
            prop_assert_eq!(got, sort_oracle(&s, k, tie));
        }
    }
}
