//! Test-side oracles that do not go through the codec's projection path.
#![allow(dead_code)]

use embsketch::hash;
use embsketch::CodecConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dense `m x d` projection matrix enumerated from the draws.
pub struct DenseProjection {
    pub m: usize,
    pub d: usize,
    rows: Vec<f64>,
}

impl DenseProjection {
    pub fn new(seed: u64, d: usize, m: usize, s: u32) -> Self {
        let mut rows = vec![0.0; m * d];
        let w = 1.0 / f64::from(s).sqrt();
        for i in 0..d {
            for j in 0..s {
                let dr = hash::draw(seed, i as u32, j, m as u32);
                rows[dr.bucket as usize * d + i] += f64::from(dr.sign) * w;
            }
        }
        Self { m, d, rows }
    }

    pub fn for_config(c: &CodecConfig) -> Self {
        Self::new(c.seed(), c.dim(), c.sketch_dim(), c.sparsity())
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.m)
            .map(|k| self.rows[k * self.d..(k + 1) * self.d].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `sqrt(m) * R (x / |x|)`
    pub fn unit_sketch(&self, x: &[f64]) -> Vec<f64> {
        let n = norm(x);
        let u: Vec<f64> = x.iter().map(|v| v / n).collect();
        let scale = (self.m as f64).sqrt();
        self.apply(&u).into_iter().map(|v| v * scale).collect()
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn gaussian(r: &mut impl Rng) -> f64 {
    // Box-Muller
    let u1: f64 = 1.0 - r.gen::<f64>();
    let u2: f64 = r.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn gaussian_vec(r: &mut impl Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| gaussian(r)).collect()
}

pub fn unit_vec(r: &mut impl Rng, d: usize) -> Vec<f64> {
    let v = gaussian_vec(r, d);
    let n = norm(&v);
    v.into_iter().map(|x| x / n).collect()
}

/// Unit vectors `(x, y)` with `<x, y> = cos`.
pub fn planted(r: &mut impl Rng, d: usize, cos: f64) -> (Vec<f64>, Vec<f64>) {
    let x = unit_vec(r, d);
    let mut w = gaussian_vec(r, d);
    let p = dot(&w, &x);
    for (wi, xi) in w.iter_mut().zip(&x) {
        *wi -= p * xi;
    }
    let n = norm(&w);
    let sin = (1.0 - cos * cos).max(0.0).sqrt();
    let y = x.iter().zip(&w).map(|(a, b)| cos * a + sin * b / n).collect();
    (x, y)
}

/// Textbook Pearson, two-pass.
pub fn pearson_naive(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Quadratic-time fractional ranks: 1 + #less + (#equal - 1) / 2.
pub fn ranks_naive(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&v| {
            let less = x.iter().filter(|&&o| o < v).count() as f64;
            let equal = x.iter().filter(|&&o| o == v).count() as f64;
            1.0 + less + (equal - 1.0) / 2.0
        })
        .collect()
}
