//! Hierarchical (block-then-token) top-k indexing for sparse attention.
//!
//! Three indexers share one output type, [`SelectionResult`]:
//!
//! - [`dsa_select`]: the flat indexer, scoring every prefix token;
//! - [`hisa_select`]: scores pooled block keys, keeps the best blocks, then
//!   scores only their tokens;
//! - [`block_sparse_select`]: keeps every token of the best blocks.
//!
//! Any of them can feed [`sparse_attend`]. The [`bench`] and [`niah`] modules
//! measure cost and retrieval quality.

pub mod attention;
pub mod bench;
pub mod block_sparse;
pub mod cache;
pub mod config;
pub mod counter;
pub mod dsa;
pub mod error;
pub mod hisa;
pub mod hsb;
pub mod inputs;
pub mod niah;
pub mod selection;
pub mod strategy;
pub mod synth;

pub use attention::{dense_attend, sparse_attend, AttentionInputs};
pub use block_sparse::block_sparse_select;
pub use cache::{build_block_summaries, BlockSummaryCache};
pub use config::{BlockPooling, ForcedBudget, HisaConfig, TieBreak};
pub use counter::{NoCount, OpCounter, OpSink};
pub use dsa::{dsa_select, score_tokens};
pub use error::{HisaError, Result};
pub use hisa::{candidate_union, hisa_select, score_blocks, select_blocks};
pub use hsb::{load_tensor_file, save_tensor_file};
pub use inputs::IndexerInputs;
pub use selection::{top_k_tokens, ScoreVector, SelectionResult};
pub use strategy::Strategy;
