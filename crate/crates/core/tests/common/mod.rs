#![allow(dead_code)]

use graphforge::PointSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn uniform(n: usize, d: usize, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PointSet::from_flat((0..n * d).map(|_| rng.random::<f64>()).collect(), d).unwrap()
}

pub fn gaussian(n: usize, d: usize, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PointSet::from_flat((0..n * d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect(), d).unwrap()
}

/// Points on a coarse integer grid, so many distances tie exactly.
pub fn lattice(n: usize, d: usize, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PointSet::from_flat((0..n * d).map(|_| rng.random_range(0..6) as f64).collect(), d).unwrap()
}
