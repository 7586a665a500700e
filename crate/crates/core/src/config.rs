//! Indexer configuration.

use serde::{Deserialize, Serialize};

use crate::error::{HisaError, Result};

/// Rule for ordering candidates whose scores compare equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum TieBreak {
    /// The lower position wins.
    #[default]
    SmallestIndex,
    /// The higher position wins.
    LargestIndex,
}

/// How a block's representative key is derived from its token keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum BlockPooling {
    #[default]
    Mean,
    /// Element-wise maximum. Experimental; not covered by the equivalence
    /// guarantees, which assume mean pooling.
    Max,
}

/// Whether the forced first/last blocks come on top of the `m` scored blocks
/// or are counted inside that budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum ForcedBudget {
    /// `C_t = TopK(J, m) ∪ forced`, so up to `m + 2` blocks survive.
    #[default]
    Additional,
    /// Forced blocks take slots first; the rest is filled by score, `|C_t| <= max(m, 2)`.
    WithinBudget,
}

/// Parameters of the hierarchical indexer.
///
/// Constructed through [`HisaConfig::new`] or [`HisaConfig::builder`], both of
/// which reject configurations where the candidate pool cannot hold `k` tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HisaConfig {
    block_size: usize,
    block_budget: usize,
    token_budget: usize,
    num_heads: usize,
    index_dim: usize,
    force_first_last: bool,
    tie_break: TieBreak,
    pooling: BlockPooling,
    forced_budget: ForcedBudget,
}

impl HisaConfig {
    /// Block size `B`, block budget `m`, token budget `k`, heads `H`, index dim `d`.
    pub fn new(
        block_size: usize,
        block_budget: usize,
        token_budget: usize,
        num_heads: usize,
        index_dim: usize,
    ) -> Result<Self> {
        Self::builder(block_size, block_budget, token_budget)
            .heads(num_heads)
            .dim(index_dim)
            .build()
    }

    pub fn builder(block_size: usize, block_budget: usize, token_budget: usize) -> HisaConfigBuilder {
        HisaConfigBuilder {
            cfg: HisaConfig {
                block_size,
                block_budget,
                token_budget,
                num_heads: 4,
                index_dim: 64,
                force_first_last: true,
                tie_break: TieBreak::default(),
                pooling: BlockPooling::default(),
                forced_budget: ForcedBudget::default(),
            },
        }
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn block_budget(&self) -> usize {
        self.block_budget
    }

    pub fn token_budget(&self) -> usize {
        self.token_budget
    }

    pub fn num_heads(&self) -> usize {
        self.num_heads
    }

    pub fn index_dim(&self) -> usize {
        self.index_dim
    }

    pub fn force_first_last(&self) -> bool {
        self.force_first_last
    }

    pub fn tie_break(&self) -> TieBreak {
        self.tie_break
    }

    pub fn pooling(&self) -> BlockPooling {
        self.pooling
    }

    pub fn forced_budget(&self) -> ForcedBudget {
        self.forced_budget
    }

    /// Candidate capacity `m * B`.
    pub fn candidate_capacity(&self) -> usize {
        self.block_budget * self.block_size
    }

    /// Copy of this config with a different block budget, re-validated.
    pub fn with_block_budget(&self, block_budget: usize) -> Result<Self> {
        let mut cfg = *self;
        cfg.block_budget = block_budget;
        cfg.validate()
    }

    /// Copy of this config with a different tie-break rule.
    pub fn with_tie_break(&self, tie_break: TieBreak) -> Self {
        let mut cfg = *self;
        cfg.tie_break = tie_break;
        cfg
    }

    fn validate(self) -> Result<Self> {
        for (field, value) in [
            ("block_size_B", self.block_size),
            ("block_budget_m", self.block_budget),
            ("token_budget_k", self.token_budget),
            ("num_index_heads_H", self.num_heads),
            ("index_dim_d", self.index_dim),
        ] {
            if value == 0 {
                return Err(HisaError::NonPositiveField { field });
            }
        }
        if self.block_budget.saturating_mul(self.block_size) < self.token_budget {
            return Err(HisaError::InfeasibleConfig {
                m: self.block_budget,
                b: self.block_size,
                k: self.token_budget,
            });
        }
        Ok(self)
    }
}

/// Block budget that holds `M:m = ratio:1` for a prefix of `len` tokens,
/// raised where needed so that `m * B >= k` still holds.
pub fn ratio_block_budget(len: usize, block_size: usize, token_budget: usize, ratio: usize) -> usize {
    let blocks = len.div_ceil(block_size);
    blocks
        .div_ceil(ratio.max(1))
        .max(matched_block_budget(token_budget, block_size))
        .max(1)
}

/// Block count `m' = ceil(k / B)` giving a block-only selector the same token budget.
pub fn matched_block_budget(token_budget: usize, block_size: usize) -> usize {
    token_budget.div_ceil(block_size)
}

#[derive(Debug, Clone)]
pub struct HisaConfigBuilder {
    cfg: HisaConfig,
}

impl HisaConfigBuilder {
    pub fn heads(mut self, num_heads: usize) -> Self {
        self.cfg.num_heads = num_heads;
        self
    }

    pub fn dim(mut self, index_dim: usize) -> Self {
        self.cfg.index_dim = index_dim;
        self
    }

    pub fn force_first_last(mut self, on: bool) -> Self {
        self.cfg.force_first_last = on;
        self
    }

    pub fn tie_break(mut self, tie_break: TieBreak) -> Self {
        self.cfg.tie_break = tie_break;
        self
    }

    pub fn pooling(mut self, pooling: BlockPooling) -> Self {
        self.cfg.pooling = pooling;
        self
    }

    pub fn forced_budget(mut self, forced_budget: ForcedBudget) -> Self {
        self.cfg.forced_budget = forced_budget;
        self
    }

    pub fn build(self) -> Result<HisaConfig> {
        self.cfg.validate()
    }
}
