//! Counter-based derivation of per-trial random streams.
//!
//! Every Monte Carlo trial owns independent ChaCha8 streams keyed by
//! (master seed, bin index, trial index), so sweeps are reproducible and
//! scheduling-independent: any thread can run any trial and the result is
//! the same. Geometry and fading draw from separate lanes, which keeps the
//! sampled network identical when only the fading model changes between
//! runs (paired channel comparisons rely on this).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The random streams for one trial.
pub struct TrialRng {
    /// Gateway/interferer positions and activity.
    pub geometry: ChaCha8Rng,
    /// All |h|² draws.
    pub fading: ChaCha8Rng,
}

/// Derive both lanes for trial `trial_index` of bin `bin_index`.
pub fn trial_rng(master_seed: u64, bin_index: u64, trial_index: u64) -> TrialRng {
    TrialRng {
        geometry: stream(master_seed, bin_index, trial_index, 0),
        fading: stream(master_seed, bin_index, trial_index, 1),
    }
}

/// One ChaCha8 stream keyed by (seed, bin, trial, lane).
pub fn stream(master_seed: u64, bin_index: u64, trial_index: u64, lane: u64) -> ChaCha8Rng {
    let mut h = mix64(master_seed ^ 0x9E37_79B9_7F4A_7C15);
    h = mix64(h ^ mix64(bin_index.wrapping_add(0xA076_1D64_78BD_642F)));
    h = mix64(h ^ mix64(trial_index.wrapping_add(0xE703_7ED1_A0B4_28DB)));
    h = mix64(h ^ lane.wrapping_mul(0x8EBC_6AF0_9C88_C6E3));
    let mut key = [0u8; 32];
    for (i, chunk) in key.chunks_exact_mut(8).enumerate() {
        let word = mix64(h.wrapping_add((i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)));
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// SplitMix64 finalizer; bijective on u64.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
