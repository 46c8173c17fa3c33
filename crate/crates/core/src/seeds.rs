//! Seed derivation for independent random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `(base, stream, index)`.
///
/// Distinct streams (init, split, shift, plan, ...) never share draws for the same base seed.
pub fn derive(base: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ stream) ^ index)
}

pub mod stream {
    pub const SPLIT: u64 = 1;
    pub const SHIFT: u64 = 2;
    pub const PLAN: u64 = 3;
    pub const INIT: u64 = 4;
    pub const NOISE: u64 = 5;
    pub const DATA: u64 = 6;
    pub const IMPORTANCE: u64 = 7;
    pub const SHUFFLE: u64 = 8;
    pub const VALIDATION_SHIFT: u64 = 9;
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
