//! Seed plumbing. Every random stream in the crate is a ChaCha8 generator
//! keyed by a `u64` derived from a base seed and a stream label, so results
//! do not depend on the order in which independent streams are consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream labels used across the crate.
pub mod stream {
    pub const SAMPLING: u64 = 1;
    pub const SKETCH: u64 = 2;
    pub const CLUSTERING: u64 = 3;
    pub const PAVING: u64 = 4;
    pub const NOISE: u64 = 5;
    pub const GENERATOR: u64 = 6;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent seed for `(base, index)`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(splitmix64(base) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

pub fn rng_for(base: u64, index: u64) -> Rng {
    Rng::seed_from_u64(derive_seed(base, index))
}
