//! Seed derivation shared by every stochastic step.
//!
//! All randomness flows from a master seed through [`mix`], so any
//! sub-stream (an image render, a dropout mask, a WARP sample) can be
//! regenerated independently of evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifier recorded in dataset manifests for the seed mixer below.
pub const MIX_FUNCTION_ID: &str = "splitmix64-v1";

/// One round of the splitmix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a list of stream coordinates into a seed.
///
/// `mix(s, &[a, b])` is `splitmix64(splitmix64(splitmix64(s) ^ a) ^ b)`.
pub fn mix(seed: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ p))
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream tags keep unrelated sub-streams apart when they share coordinates.
pub(crate) mod tag {
    pub const RENDER: u64 = 0x52454e44;
    pub const DROPOUT: u64 = 0x44524f50;
    pub const WARP: u64 = 0x57415250;
    pub const SHUFFLE: u64 = 0x53485546;
    pub const INIT: u64 = 0x494e4954;
    pub const CROP: u64 = 0x43524f50;
    pub const SPLIT: u64 = 0x53504c54;
    pub const QUERY: u64 = 0x51525953;
    pub const CHANCE: u64 = 0x4348414e;
}
