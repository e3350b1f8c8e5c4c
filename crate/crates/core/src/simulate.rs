//! Seeded data-generating processes for calibration and recovery checks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Deterministic generator; every simulation takes an explicit seed.
pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn seeded(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.0)
    }

    pub fn normals(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.normal()).collect()
    }

    pub fn uniform(&mut self) -> f64 {
        rand::Rng::random::<f64>(&mut self.0)
    }
}

pub fn white_noise(rng: &mut Rng, sigma: f64, n: usize) -> Vec<f64> {
    (0..n).map(|_| sigma * rng.normal()).collect()
}

/// Gaussian random walk starting at zero.
pub fn random_walk(rng: &mut Rng, sigma: f64, n: usize) -> Vec<f64> {
    let mut level = 0.0;
    (0..n)
        .map(|_| {
            level += sigma * rng.normal();
            level
        })
        .collect()
}

/// Zero-mean ARMA(p, q) path after a burn-in of 200 draws.
pub fn arma_process(rng: &mut Rng, phi: &[f64], theta: &[f64], sigma: f64, n: usize) -> Vec<f64> {
    let burn = 200;
    let total = n + burn;
    let e: Vec<f64> = (0..total).map(|_| sigma * rng.normal()).collect();
    let mut w = vec![0.0; total];
    for t in 0..total {
        let mut v = e[t];
        for (i, a) in phi.iter().enumerate() {
            if t > i {
                v += a * w[t - 1 - i];
            }
        }
        for (j, b) in theta.iter().enumerate() {
            if t > j {
                v += b * e[t - 1 - j];
            }
        }
        w[t] = v;
    }
    w.split_off(burn)
}
