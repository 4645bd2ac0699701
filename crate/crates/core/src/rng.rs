//! Deterministic randomness.
//!
//! Every draw in the crate comes from a ChaCha8 stream whose 64-bit seed is
//! derived with [`mix`], so a master seed plus a (cell, trial) position fully
//! determines the stream and independent positions get decorrelated streams.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// One round of the SplitMix64 output finalizer. The constants are the
/// standard ones from the reference implementation.
fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `(master, cell, trial)` into one stream seed by chaining the
/// SplitMix64 finalizer: `f(f(f(master) ^ cell) ^ trial)`.
pub fn mix(master: u64, cell: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ cell) ^ trial)
}

/// Seeded generator used everywhere randomness is needed.
pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` independent standard normal draws.
pub fn normal_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mix_is_deterministic_and_position_sensitive() {
        assert_eq!(mix(7, 1, 2), mix(7, 1, 2));
        let base = mix(7, 1, 2);
        assert_ne!(base, mix(7, 1, 3));
        assert_ne!(base, mix(7, 2, 2));
        assert_ne!(base, mix(8, 1, 2));
        // Swapping cell and trial must change the stream.
        assert_ne!(mix(7, 1, 2), mix(7, 2, 1));
    }

    #[test]
    fn streams_replay() {
        let a = normal_vec(&mut stream(42), 8);
        let b = normal_vec(&mut stream(42), 8);
        assert_eq!(a, b);
        assert!(a.iter().all(|x| x.is_finite()));
    }
}
