use thiserror::Error;

pub type Result<T> = std::result::Result<T, HisaError>;

#[derive(Debug, Error)]
pub enum HisaError {
    #[error("bad magic bytes {found:?}, expected \"HSB1\"")]
    BadMagic { found: [u8; 4] },

    #[error("unsupported HSB version {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("shape mismatch in `{field}`: expected {expected}, found {found}")]
    ShapeMismatch {
        field: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in `{field}` at element {offset}")]
    NonFiniteValue { field: &'static str, offset: usize },

    #[error("query position {position} at row {row} outside prefix of length {len}")]
    PositionOutOfRange {
        row: usize,
        position: usize,
        len: usize,
    },

    #[error("infeasible config: block_budget_m * block_size_B = {m} * {b} < token_budget_k = {k} (requires mB >= k)")]
    InfeasibleConfig { m: usize, b: usize, k: usize },

    #[error("config field `{field}` must be strictly positive")]
    NonPositiveField { field: &'static str },

    #[error("candidate position {position} is after query position {query}")]
    CausalViolation { position: usize, query: usize },

    #[error("positions must be strictly ascending (violated at element {at})")]
    UnsortedPositions { at: usize },

    #[error("query row {row} out of range ({rows} rows)")]
    QueryRowOutOfRange { row: usize, rows: usize },

    #[error("cannot build block summaries of an empty sequence")]
    EmptySequence,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("block {block} holds no tokens")]
    EmptyBlock { block: usize },

    #[error("block cache covers {cached} tokens but query position {position} needs {needed}")]
    CacheTooShort {
        cached: usize,
        position: usize,
        needed: usize,
    },

    #[error("no eligible blocks to select from")]
    NoEligibleBlocks,

    #[error("attention over an empty selection")]
    EmptySelection,

    #[error("overlap of two empty selections is undefined")]
    BothEmpty,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
