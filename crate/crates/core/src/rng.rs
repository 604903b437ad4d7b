//! Seeding helpers.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] seeded with a
//! `u64`. Independent streams (one per graph, restart, trajectory, ...) are
//! obtained with [`derive_seed`], which hashes a master seed together with a
//! path of integers, so a master seed fully determines a run regardless of
//! the order in which streams are consumed.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub use rand_chacha::ChaCha8Rng as Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// One round of the SplitMix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from `master` and a path of stream identifiers.
///
/// Distinct paths give statistically independent seeds; the same path always
/// gives the same seed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    let mut h = splitmix64(master ^ 0x5EED_0F_A11_u64);
    for (depth, &p) in path.iter().enumerate() {
        h = splitmix64(h ^ splitmix64(p.wrapping_add((depth as u64 + 1).wrapping_mul(GOLDEN))));
    }
    h
}

/// A generator seeded from a single `u64`.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw in `[0, 1)` with 53 bits of resolution.
pub fn uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
