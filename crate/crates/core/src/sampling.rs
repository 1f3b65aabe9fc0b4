//! Seeded sample clouds for validation and certification.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seed used when `CSTAR_LINAC_SEED` is unset.
pub const DEFAULT_SEED: u64 = 42;
pub const SEED_ENV: &str = "CSTAR_LINAC_SEED";

/// Reads the sampling seed from the environment, falling back to the default.
pub fn seed_from_env() -> u64 {
    std::env::var(SEED_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    /// Uniform point in the disc `|w| ≤ radius`.
    pub fn disc(&mut self, radius: f64) -> Complex64 {
        let r = radius * self.rng.gen::<f64>().sqrt();
        Complex64::from_polar(r, self.rng.gen_range(0.0..2.0 * PI))
    }

    /// Point of the polydisc `|x_j| ≤ radius` centered at `center`.
    pub fn polydisc(&mut self, center: &[Complex64], radius: f64) -> Vec<Complex64> {
        center.iter().map(|c| c + self.disc(radius)).collect()
    }

    /// Point on the distinguished boundary of the polydisc, i.e. every
    /// coordinate at modulus `radius`.
    pub fn torus(&mut self, n: usize, radius: f64) -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::from_polar(radius, self.rng.gen_range(0.0..2.0 * PI)))
            .collect()
    }

    /// Point on the topological boundary of the polydisc: one random coordinate
    /// at modulus `radius`, the rest anywhere inside.
    pub fn polydisc_boundary(&mut self, n: usize, radius: f64) -> Vec<Complex64> {
        let pinned = self.rng.gen_range(0..n);
        (0..n)
            .map(|j| {
                if j == pinned {
                    Complex64::from_polar(radius, self.rng.gen_range(0.0..2.0 * PI))
                } else {
                    self.disc(radius)
                }
            })
            .collect()
    }

    /// Group element `s` with log-uniform modulus in `[min_modulus, max_modulus]`.
    pub fn annulus(&mut self, min_modulus: f64, max_modulus: f64) -> Complex64 {
        let r = self.rng.gen_range(min_modulus.ln()..=max_modulus.ln()).exp();
        Complex64::from_polar(r, self.rng.gen_range(0.0..2.0 * PI))
    }

    /// Additive group parameter in the rectangle `|Re z| ≤ re_max`, `|Im z| ≤ im_max`.
    pub fn rectangle(&mut self, re_max: f64, im_max: f64) -> Complex64 {
        let re = if re_max > 0.0 { self.rng.gen_range(-re_max..=re_max) } else { 0.0 };
        let im = if im_max > 0.0 { self.rng.gen_range(-im_max..=im_max) } else { 0.0 };
        Complex64::new(re, im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_respect_bounds() {
        let mut s = Sampler::new(7);
        for _ in 0..200 {
            assert!(s.disc(0.5).norm() <= 0.5);
            let a = s.annulus(0.1, 10.0).norm();
            assert!((0.1 - 1e-12..=10.0 + 1e-12).contains(&a));
            let z = s.rectangle(1.0, 0.2);
            assert!(z.re.abs() <= 1.0 && z.im.abs() <= 0.2);
            let b = s.polydisc_boundary(3, 0.7);
            let m = b.iter().map(|c| c.norm()).fold(0.0, f64::max);
            assert!((m - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn same_seed_same_stream() {
        let a: Vec<_> = (0..5).map({
            let mut s = Sampler::new(42);
            move |_| s.disc(1.0)
        }).collect();
        let b: Vec<_> = (0..5).map({
            let mut s = Sampler::new(42);
            move |_| s.disc(1.0)
        }).collect();
        assert_eq!(a, b);
    }
}
