//! Seeded Gaussian noise with a fully specified algorithm, so traces can be
//! regenerated bit-for-bit by other implementations.
//!
//! * State: xoshiro256++ seeded from a `u64` through SplitMix64.
//! * Uniforms: `(next_u64() >> 11) * 2^-53`.
//! * Normal deviate: Box-Muller cosine branch, `u1 = uniform + 2^-53`,
//!   `z = sqrt(-2 ln u1) * cos(2 pi u2)`; two draws per deviate.

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

/// Header tag naming the algorithm above.
pub const NOISE_ALGORITHM: &str = "xoshiro256++/splitmix64 box-muller-cos";

pub struct Gaussian {
    rng: Xoshiro256PlusPlus,
}

impl Gaussian {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn standard(&mut self) -> f64 {
        let u1 = self.uniform() + 1.0 / (1u64 << 53) as f64;
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn sample(&mut self, sigma: f64) -> f64 {
        sigma * self.standard()
    }
}
