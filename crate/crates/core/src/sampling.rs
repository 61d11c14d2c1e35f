//! Seeded random sampling of exact rationals. All randomized behaviour in the
//! crate funnels through [`Sampler`] so a seed reproduces a run bit-for-bit.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Largest numerator/denominator used for sample grids.
pub const GRID: i64 = 97;

#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Sampler {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Nonzero rational `p/q` with `|p|, q <= 97`.
    pub fn rational(&mut self) -> BigRational {
        loop {
            let p: i64 = self.rng.gen_range(-GRID..=GRID);
            if p == 0 {
                continue;
            }
            let q: i64 = self.rng.gen_range(1..=GRID);
            return BigRational::new(BigInt::from(p), BigInt::from(q));
        }
    }

    /// Nonzero grid point `2p/97` in `[-2, 2]`.
    pub fn grid_value(&mut self) -> BigRational {
        loop {
            let p: i64 = self.rng.gen_range(-GRID..=GRID);
            if p != 0 {
                return BigRational::new(BigInt::from(2 * p), BigInt::from(GRID));
            }
        }
    }

    /// Small random integer in `[-bound, bound]`, used for pivot probes.
    pub fn small_int(&mut self, bound: i64) -> i64 {
        self.rng.gen_range(-bound..=bound)
    }

    /// Uniform index in `0..=max`.
    pub fn index(&mut self, max: usize) -> usize {
        self.rng.gen_range(0..=max)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    pub fn next_seed(&mut self) -> u64 {
        self.rng.gen()
    }
}
