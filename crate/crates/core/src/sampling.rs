//! Deterministic rational sampling for randomized exact identity checks.
//!
//! All randomized checks in the crate (equivariance, generic-vs-transcribed
//! equivalence, kernel-family properties) draw from a seeded generator so
//! results are reproducible.

use crate::algebra::Rational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct RatSampler {
    rng: ChaCha8Rng,
}

impl RatSampler {
    pub fn new(seed: u64) -> Self {
        RatSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Signed rational with numerator in `[-max_num, max_num]` and denominator
    /// in `[1, max_den]`.
    pub fn rational(&mut self, max_num: i64, max_den: i64) -> Rational {
        let n = self.rng.random_range(-max_num..=max_num);
        let d = self.rng.random_range(1..=max_den);
        Rational::from_ratio(n, d)
    }

    /// Strictly positive rational with numerator in `[1, max_num]`.
    pub fn positive(&mut self, max_num: i64, max_den: i64) -> Rational {
        let n = self.rng.random_range(1..=max_num);
        let d = self.rng.random_range(1..=max_den);
        Rational::from_ratio(n, d)
    }

    pub fn rational_vec(&mut self, len: usize, max_num: i64, max_den: i64) -> Vec<Rational> {
        (0..len).map(|_| self.rational(max_num, max_den)).collect()
    }

    pub fn positive_vec(&mut self, len: usize, max_num: i64, max_den: i64) -> Vec<Rational> {
        (0..len).map(|_| self.positive(max_num, max_den)).collect()
    }
}
