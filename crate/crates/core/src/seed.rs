//! Deterministic seed derivation for sharded Monte Carlo work.
//!
//! Every parallel loop in the crate splits its work into a fixed number of
//! shards, derives one stream per shard with [`mix`], and reduces the shard
//! results in index order. Output therefore does not depend on the size of
//! the rayon pool.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Number of shards used by the Monte Carlo validators.
pub const SHARDS: usize = 16;

/// SplitMix64 finalizer applied to `seed ^ golden * (index + 1)`.
pub fn mix(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn shard_rng(seed: u64, shard: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, shard as u64))
}

/// Splits `total` items into `SHARDS` contiguous chunk sizes.
pub fn shard_sizes(total: usize) -> Vec<usize> {
    let base = total / SHARDS;
    let extra = total % SHARDS;
    (0..SHARDS).map(|i| base + usize::from(i < extra)).collect()
}
