//! Deterministic seed derivation.
//!
//! Experiment harnesses derive one RNG seed per (cell, trial, purpose) from a
//! base seed, so results are reproducible at any parallelism level and any
//! single trial can be replayed in isolation.

/// SplitMix64 step; the standard 64-bit finalizer with good avalanche.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `base` with a sequence of labels into a single derived seed.
///
/// Equal inputs give equal outputs on every platform; any change to one part
/// changes the result.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut state = base ^ 0x6c62_272e_07bb_0142;
    let mut acc = splitmix64(&mut state);
    for &p in parts {
        state ^= p;
        acc ^= splitmix64(&mut state).rotate_left(17);
        acc = acc.wrapping_mul(0x2545_f491_4f6c_dd1d);
    }
    acc
}
