//! Seed derivation and RNG construction. All randomness in the crate flows
//! through explicit seeds; there is no global RNG state.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer; good avalanche, stable across platforms.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a base seed and a sequence of domain labels
/// (grid indices, trial numbers, arm tags). Stable by construction, unlike
/// `std::hash` which is allowed to change between releases.
pub fn derive_seed(base: u64, labels: &[u64]) -> u64 {
    let mut acc = splitmix64(base ^ 0x6c76_6c61_625f_7631); // "lvlab_v1"
    for &l in labels {
        acc = splitmix64(acc ^ splitmix64(l));
    }
    acc
}

/// The crate's stream cipher RNG for a bare seed.
pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    rng_for(seed)
}
