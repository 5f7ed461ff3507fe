//! Counter-based seed derivation.
//!
//! Every random stream in a run is addressed by `(seed, index, label)`, so
//! adding replicas or reordering work never perturbs existing streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream labels used across the crate.
pub mod label {
    pub const ENVIRONMENT: u64 = 1;
    pub const RUN: u64 = 2;
    pub const ORACLE_RUN: u64 = 3;
    pub const BROWNIAN_TWO_SIDED: u64 = 4;
    pub const BROWNIAN_OCCUPATION: u64 = 5;
    pub const BROWNIAN_COMPOSITE: u64 = 6;
    pub const COIN: u64 = 7;
    pub const KEY_IDENTITY_LOCAL: u64 = 8;
    pub const KEY_IDENTITY_HITTING: u64 = 9;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed of stream `label` for replica `index` of a run seeded by `seed`.
pub fn derive(seed: u64, index: u64, label: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ index) ^ label.rotate_left(32))
}

/// A ChaCha8 generator keyed by `seed` and positioned on the given stream.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
