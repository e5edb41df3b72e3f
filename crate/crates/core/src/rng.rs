//! Reproducible random streams for instance generation.
//!
//! The generator is PCG-64 (XSL-RR 128/64) seeded through
//! `SeedableRng::seed_from_u64`. Uniforms take the top 53 bits of each
//! output; normals use the basic Box–Muller transform, consuming two
//! uniforms per pair of variates and returning the cosine variate first.

use rand_core::{Rng, SeedableRng};
use rand_pcg::Pcg64;

#[derive(Debug, Clone)]
pub struct NormalStream {
    rng: Pcg64,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64) -> Self {
        NormalStream { rng: Pcg64::seed_from_u64(seed), spare: None }
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform(); // (0, 1]
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}
