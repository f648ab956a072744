//! Seed derivation for independent, schedule-free RNG streams.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Fold a base seed and stream tags into one well-mixed seed.
pub(crate) fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mut state = mix(base);
    for &t in tags {
        state = mix(state ^ mix(t));
    }
    state
}

/// A deterministic RNG for the stream identified by (base, tags).
pub(crate) fn stream_rng(base: u64, tags: &[u64]) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(derive_seed(base, tags))
}
