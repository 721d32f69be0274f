#![allow(dead_code)]

use alphaleak::{random_channel, random_pmf, Channel, Pmf};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random input/channel pair with alphabet sizes drawn from {2, 3}.
pub fn instance(rng: &mut ChaCha8Rng) -> (Pmf, Channel) {
    let nx = rng.random_range(2..=3);
    let ny = rng.random_range(2..=3);
    (random_pmf(rng, nx), random_channel(rng, nx, ny))
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}
