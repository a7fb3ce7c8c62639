//! Seed handling.
//!
//! Every random stream in the toolkit is a [`ChaCha8Rng`] seeded from a
//! 64-bit value. Sub-streams (per trial, per unitary, per vote) are derived
//! from a master seed with [`split`]:
//!
//! ```text
//! split(master, index) = mix(mix(master) ^ mix(index + 0x9E3779B97F4A7C15))
//! ```
//!
//! where `mix` is the SplitMix64 finalizer. The rule is pure, so trial `i` of
//! an experiment sees the same stream no matter how many worker threads run
//! or in which order trials complete.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of sub-stream `index` from `master`.
pub fn split(master: u64, index: u64) -> u64 {
    mix(mix(master) ^ mix(index.wrapping_add(GOLDEN)))
}

/// Derives a seed from a path of indices, e.g. `(unitary, trial, vote)`.
pub fn split_path(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(master, |s, &i| split(s, i))
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
