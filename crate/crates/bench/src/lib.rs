//! Workload generators shared by the benchmarks.

use blr_core::BitRow;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_rows(n: usize, d: usize, seed: u64) -> Vec<BitRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| BitRow::from_bits((0..d).map(|_| rng.random_bool(0.5))))
        .collect()
}

/// `k` random centers with each point a noisy copy of one of them.
pub fn planted_rows(n: usize, d: usize, k: usize, flip: f64, seed: u64) -> Vec<BitRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers = random_rows(k, d, seed ^ 0x9e37_79b9);
    (0..n)
        .map(|_| {
            let c = &centers[rng.random_range(0..k)];
            BitRow::from_bits(c.iter().map(|b| b ^ rng.random_bool(flip)))
        })
        .collect()
}
