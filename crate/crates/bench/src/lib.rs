//! Shared fixtures for the benchmarks: deterministic ensembles and signals
//! at sizes large enough to exercise the numerics without dominating CI.

use affine_pr::rng::{mix, normal_vec, stream};
use affine_pr::{random_ensemble, tight_ensemble, Ensemble, FieldTag, Signal};

pub const BENCH_SEED: u64 = 0xbe9c;

/// A mid-sized tight complex ensemble: d = 16, r = 4, m = 36.
pub fn bench_tight() -> Ensemble {
    tight_ensemble(FieldTag::Complex, 16, 4, None).expect("valid shape")
}

/// A random real ensemble at the generic threshold: d = 8, m = 16.
pub fn bench_random() -> Ensemble {
    random_ensemble(FieldTag::Real, 8, 2, 16, BENCH_SEED).expect("valid shape")
}

/// Gaussian signal matching `e`, deterministic in `trial`.
pub fn bench_signal(e: &Ensemble, trial: u64) -> Signal {
    let len = match e.field {
        FieldTag::Real => e.d,
        FieldTag::Complex => 2 * e.d,
    };
    Signal::from_coords(e.field, &normal_vec(&mut stream(mix(BENCH_SEED, 1, trial)), len))
}
