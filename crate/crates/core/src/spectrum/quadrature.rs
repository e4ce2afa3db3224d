use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Gauss–Legendre in r on [0, R] (weights carry the factor r) times the
/// uniform trapezoid rule in θ.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarQuadrature {
    pub radius: f64,
    pub r: Vec<f64>,
    /// r-weighted radial weights; they sum to R²/2.
    pub wr: Vec<f64>,
    pub theta: Vec<f64>,
    pub dtheta: f64,
    pub theta_offset: f64,
}

impl PolarQuadrature {
    pub fn new(radius: f64, n_r: usize, n_theta: usize) -> Self {
        Self::with_offset(radius, n_r, n_theta, 0.0)
    }

    /// Same rule with every angular node shifted by `offset`.
    pub fn with_offset(radius: f64, n_r: usize, n_theta: usize, offset: f64) -> Self {
        let (x, w) = gauss_legendre(n_r);
        let r: Vec<f64> = x.iter().map(|&xi| 0.5 * radius * (xi + 1.0)).collect();
        let wr = w.iter().zip(&r).map(|(&wi, &ri)| 0.5 * radius * wi * ri).collect();
        let dtheta = 2.0 * PI / n_theta as f64;
        let theta = (0..n_theta).map(|j| offset + j as f64 * dtheta).collect();
        Self { radius, r, wr, theta, dtheta, theta_offset: offset }
    }

    pub fn n_r(&self) -> usize {
        self.r.len()
    }

    pub fn n_theta(&self) -> usize {
        self.theta.len()
    }

    pub fn len(&self) -> usize {
        self.n_r() * self.n_theta()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn key(&self) -> GridKey {
        GridKey {
            n_r: self.n_r(),
            n_theta: self.n_theta(),
            radius_bits: self.radius.to_bits(),
            offset_bits: self.theta_offset.to_bits(),
        }
    }

    /// Samples `f(r, θ)` at every node, r-major.
    pub fn sample(&self, f: impl Fn(f64, f64) -> Complex64) -> GridField {
        let mut values = Vec::with_capacity(self.len());
        for &r in &self.r {
            for &t in &self.theta {
                values.push(f(r, t));
            }
        }
        GridField { key: self.key(), values }
    }

    /// ∬ r · a · conj(b) dr dθ by quadrature.
    pub fn integrate_product(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        let nt = self.n_theta();
        let mut total = Complex64::new(0.0, 0.0);
        for (i, &w) in self.wr.iter().enumerate() {
            let row = i * nt;
            let mut ring = Complex64::new(0.0, 0.0);
            for j in 0..nt {
                ring += a[row + j] * b[row + j].conj();
            }
            total += ring * w;
        }
        total * self.dtheta
    }

    /// ∬ r · a dr dθ.
    pub fn integrate(&self, a: &[Complex64]) -> Complex64 {
        let nt = self.n_theta();
        let mut total = Complex64::new(0.0, 0.0);
        for (i, &w) in self.wr.iter().enumerate() {
            let ring: Complex64 = a[i * nt..(i + 1) * nt].iter().sum();
            total += ring * w;
        }
        total * self.dtheta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridKey {
    pub n_r: usize,
    pub n_theta: usize,
    radius_bits: u64,
    offset_bits: u64,
}

/// A complex field sampled on a [`PolarQuadrature`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub key: GridKey,
    pub values: Vec<Complex64>,
}

/// The r-weighted inner product ⟨a, b⟩ = ∬ r a conj(b) dr dθ.
pub fn inner_product(quad: &PolarQuadrature, a: &GridField, b: &GridField) -> Result<Complex64> {
    let key = quad.key();
    if a.key != key || b.key != key {
        return Err(Error::GridMismatch(format!(
            "fields sampled on {:?} / {:?}, quadrature is {:?}",
            a.key, b.key, key
        )));
    }
    Ok(quad.integrate_product(&a.values, &b.values))
}
