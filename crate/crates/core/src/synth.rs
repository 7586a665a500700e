//! Seeded synthetic inputs.
//!
//! All randomness in the crate comes from ChaCha8 (`rand_chacha::ChaCha8Rng`),
//! seeded with a `u64` seed and a `u64` stream id. ChaCha output is specified
//! independently of platform and word size, so a given `(seed, stream)` pair
//! yields the same inputs everywhere.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::inputs::IndexerInputs;

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn normal_vec(rng: &mut impl Rng, n: usize) -> Vec<f32> {
    StandardNormal.sample_iter(rng).take(n).collect()
}

/// Standard-normal keys and queries, gates uniform in `[-1, 1)`.
pub fn random_inputs(
    len: usize,
    heads: usize,
    dim: usize,
    positions: &[usize],
    seed: u64,
) -> IndexerInputs {
    let mut rng = rng(seed, 0);
    let keys = normal_vec(&mut rng, len * dim);
    let queries = normal_vec(&mut rng, positions.len() * heads * dim);
    let gates = (0..positions.len() * heads)
        .map(|_| rng.random_range(-1.0f32..1.0))
        .collect();
    IndexerInputs::new(heads, dim, keys, queries, gates, positions.to_vec())
        .expect("synthetic inputs are well-formed")
}

/// Small-integer keys, queries and gates, so that many scores tie exactly.
pub fn quantized_inputs(
    len: usize,
    heads: usize,
    dim: usize,
    positions: &[usize],
    seed: u64,
) -> IndexerInputs {
    let mut rng = rng(seed, 1);
    let mut draw = |n: usize, lo: i32, hi: i32| -> Vec<f32> {
        (0..n).map(|_| rng.random_range(lo..=hi) as f32).collect()
    };
    let keys = draw(len * dim, -1, 1);
    let queries = draw(positions.len() * heads * dim, -1, 1);
    let gates = draw(positions.len() * heads, -1, 2);
    IndexerInputs::new(heads, dim, keys, queries, gates, positions.to_vec())
        .expect("synthetic inputs are well-formed")
}

/// `count` query positions spread evenly over `[0, len)`, ending at `len - 1`.
pub fn spread_positions(len: usize, count: usize) -> Vec<usize> {
    (1..=count).map(|i| (i * len / count).max(1) - 1).collect()
}
