use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::block_sparse::block_sparse_select;
use crate::cache::BlockSummaryCache;
use crate::config::HisaConfig;
use crate::counter::OpSink;
use crate::dsa::dsa_select;
use crate::error::Result;
use crate::hisa::hisa_select;
use crate::inputs::IndexerInputs;
use crate::selection::SelectionResult;

/// The three indexers compared by the harnesses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "DSA")]
    Dsa,
    #[serde(rename = "HISA")]
    Hisa,
    BlockSparse,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Dsa, Strategy::Hisa, Strategy::BlockSparse];

    /// Short lowercase name used in file names and flags.
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Dsa => "dsa",
            Strategy::Hisa => "hisa",
            Strategy::BlockSparse => "block",
        }
    }

    /// Runs this strategy for one query. The cache is ignored by the flat indexer.
    pub fn select<S: OpSink>(
        self,
        inputs: &IndexerInputs,
        cache: &BlockSummaryCache,
        cfg: &HisaConfig,
        row: usize,
        sink: &mut S,
    ) -> Result<SelectionResult> {
        match self {
            Strategy::Dsa => dsa_select(inputs, cfg, row, sink),
            Strategy::Hisa => hisa_select(inputs, cache, cfg, row, sink),
            Strategy::BlockSparse => block_sparse_select(inputs, cache, cfg, row, sink),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Dsa => "DSA",
            Strategy::Hisa => "HISA",
            Strategy::BlockSparse => "BlockSparse",
        })
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dsa" => Ok(Strategy::Dsa),
            "hisa" => Ok(Strategy::Hisa),
            "block" | "block-sparse" | "blocksparse" => Ok(Strategy::BlockSparse),
            other => Err(format!("unknown strategy `{other}` (expected dsa, hisa or block)")),
        }
    }
}
