//! Shared fixtures for the benchmarks in `benches/`.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Uniform white noise in [-1, 1).
pub fn white_noise(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
}
