//! HSB, the little-endian binary tensor file format for [`IndexerInputs`].
//!
//! ```text
//! offset  size      field
//! 0       4         magic "HSB1"
//! 4       4         u32 version (= 1)
//! 8       16        u32 H, d, L, Q
//! 24      4*L*d     keys            f32 [L, d]
//!         4*Q*H*d   queries         f32 [Q, H, d]
//!         4*Q*H     gates           f32 [Q, H]
//!         4*Q       query_positions u32 [Q]
//! ```

use std::fs;
use std::path::Path;

use crate::error::{HisaError, Result};
use crate::inputs::IndexerInputs;

pub const MAGIC: [u8; 4] = *b"HSB1";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 24;

pub fn load_tensor_file(path: impl AsRef<Path>) -> Result<IndexerInputs> {
    decode(&fs::read(path)?)
}

pub fn save_tensor_file(inputs: &IndexerInputs, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode(inputs))?;
    Ok(())
}

pub fn encode(inputs: &IndexerInputs) -> Vec<u8> {
    let payload = inputs.keys_raw().len()
        + inputs.queries_raw().len()
        + inputs.gates_raw().len()
        + inputs.num_queries();
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * payload);
    out.extend_from_slice(&MAGIC);
    for v in [
        VERSION,
        inputs.num_heads() as u32,
        inputs.dim() as u32,
        inputs.seq_len() as u32,
        inputs.num_queries() as u32,
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for block in [inputs.keys_raw(), inputs.queries_raw(), inputs.gates_raw()] {
        for v in block {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    for &p in inputs.query_positions() {
        out.extend_from_slice(&(p as u32).to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<IndexerInputs> {
    if bytes.len() < 4 {
        let mut found = [0u8; 4];
        found[..bytes.len()].copy_from_slice(bytes);
        return Err(HisaError::BadMagic { found });
    }
    let magic: [u8; 4] = bytes[..4].try_into().unwrap();
    if magic != MAGIC {
        return Err(HisaError::BadMagic { found: magic });
    }
    if bytes.len() < HEADER_LEN {
        return Err(HisaError::ShapeMismatch {
            field: "header",
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap());
    let version = word(0);
    if version != VERSION {
        return Err(HisaError::VersionMismatch {
            found: version,
            expected: VERSION,
        });
    }
    let (heads, dim, len, rows) = (
        word(1) as usize,
        word(2) as usize,
        word(3) as usize,
        word(4) as usize,
    );
    let sizes = [len * dim, rows * heads * dim, rows * heads, rows];
    let expected = HEADER_LEN + 4 * sizes.iter().sum::<usize>();
    if bytes.len() != expected {
        return Err(HisaError::ShapeMismatch {
            field: "payload",
            expected,
            found: bytes.len(),
        });
    }

    let mut cursor = HEADER_LEN;
    let mut take = |n: usize| {
        let chunk = &bytes[cursor..cursor + 4 * n];
        cursor += 4 * n;
        chunk.chunks_exact(4).map(|c| <[u8; 4]>::try_from(c).unwrap())
    };
    let keys: Vec<f32> = take(sizes[0]).map(f32::from_le_bytes).collect();
    let queries: Vec<f32> = take(sizes[1]).map(f32::from_le_bytes).collect();
    let gates: Vec<f32> = take(sizes[2]).map(f32::from_le_bytes).collect();
    let positions: Vec<usize> = take(sizes[3])
        .map(|b| u32::from_le_bytes(b) as usize)
        .collect();
    IndexerInputs::new(heads, dim, keys, queries, gates, positions)
}
