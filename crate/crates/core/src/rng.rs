//! Random streams.
//!
//! Every trajectory owns a ChaCha8 stream (`rand_chacha` pinned at 0.3.1)
//! whose 256-bit key is derived from `(master_seed, language_index)`:
//!
//! ```text
//! state = splitmix64(master_seed) ^ language_index * 0x9E3779B97F4A7C15
//! key   = four successive splitmix64 outputs starting from `state`, little endian
//! ```
//!
//! Draws are built directly from `next_u64` so that their values do not
//! depend on the conversion routines of any `rand` release.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub type Stream = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// One round of SplitMix64: advances `state` and returns the mixed output.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream_seed(master_seed: u64, language_index: u64) -> [u8; 32] {
    let mut s = master_seed;
    let mut state = splitmix64(&mut s) ^ language_index.wrapping_mul(GOLDEN_GAMMA);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    key
}

/// The stream for one trajectory.
pub fn trajectory_stream(master_seed: u64, language_index: u64) -> Stream {
    ChaCha8Rng::from_seed(stream_seed(master_seed, language_index))
}

pub fn seeded(seed: u64) -> Stream {
    trajectory_stream(seed, 0)
}

/// Uniform on `[0, 1)` with 53 random bits. Consumes one draw.
#[inline]
pub fn unit(rng: &mut dyn RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform on the open interval `(0, 1)`: midpoints of a 2^-52 grid.
/// Consumes one draw.
#[inline]
pub fn open_unit(rng: &mut dyn RngCore) -> f64 {
    ((rng.next_u64() >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Uniform index in `0..n` by scaling one unit draw.
#[inline]
pub fn index(rng: &mut dyn RngCore, n: usize) -> usize {
    debug_assert!(n > 0);
    ((unit(rng) * n as f64) as usize).min(n - 1)
}

/// Inverse-CDF categorical draw over non-negative weights. Consumes one draw.
/// Zero-weight categories are never returned.
pub fn categorical(rng: &mut dyn RngCore, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    debug_assert!(total > 0.0, "categorical over zero total weight");
    let u = unit(rng) * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = i;
        if u < acc {
            return i;
        }
    }
    // u rounded up to the total
    last
}
