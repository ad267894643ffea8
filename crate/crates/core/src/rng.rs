//! Deterministic seed derivation.
//!
//! Every random draw is tied to a `(seed, stream, sample, coordinate)` tuple,
//! so generation order never affects the output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) const STREAM_POLYSINUS: u64 = 1;
pub(crate) const STREAM_BETA: u64 = 2;
pub(crate) const STREAM_NOISE: u64 = 3;
pub(crate) const STREAM_GP: u64 = 4;
pub(crate) const STREAM_FOLDS: u64 = 5;
pub(crate) const STREAM_SPLIT: u64 = 6;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a base seed with a stream tag and two indices into a child seed.
pub fn derive_seed(seed: u64, stream: u64, a: u64, b: u64) -> u64 {
    let mut h = splitmix64(seed);
    h = splitmix64(h ^ stream);
    h = splitmix64(h ^ a);
    splitmix64(h ^ b)
}

/// A ChaCha8 generator for one `(stream, a, b)` cell of a seed.
pub fn stream_rng(seed: u64, stream: u64, a: u64, b: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, stream, a, b))
}
