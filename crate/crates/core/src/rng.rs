//! Seeded random streams.
//!
//! Every random decision in the pipeline is drawn from a [`ChaCha8Rng`]
//! whose seed is derived from a master seed and a stream label, so that
//! independent consumers never share draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed, a stream tag and an index.
pub fn derive_seed(parent: u64, tag: &str, index: u64) -> u64 {
    let mut h = mix64(parent);
    for b in tag.bytes() {
        h = mix64(h ^ u64::from(b));
    }
    mix64(h ^ index.wrapping_mul(0xA24B_AED4_963E_E407))
}

pub fn stream(parent: u64, tag: &str, index: u64) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(parent, tag, index))
}
