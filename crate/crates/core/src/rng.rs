//! Random streams.
//!
//! Every simulation run draws from ChaCha8, a counter-based generator: the
//! 256-bit key is expanded from the master seed and the run index selects the
//! 64-bit stream. Distinct run indices under one master seed therefore get
//! non-overlapping streams, and a run replays bit-exactly from
//! `(master_seed, run_index)` alone.

use rand::{Rng, SeedableRng};
pub use rand_chacha::ChaCha8Rng as StreamRng;

pub fn run_stream(master_seed: u64, run_index: u64) -> StreamRng {
    let mut rng = StreamRng::seed_from_u64(master_seed);
    rng.set_stream(run_index);
    rng
}

/// Uniform in the open interval `(0, 1)`.
pub fn open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// Exponential variate with the given rate.
pub fn exponential<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    -open01(rng).ln() / rate
}

/// Uniform point on the probability simplex (flat Dirichlet).
pub fn simplex_point<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..dim).map(|_| -open01(rng).ln()).collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|a| *a /= s);
    v
}
