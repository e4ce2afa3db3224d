use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cell-centred polar grid: r_i = (i + ½)Δr, θ_j = jΔθ. Storage is r-major
/// (index i·Nθ + j).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarGrid {
    pub n_r: usize,
    pub n_theta: usize,
    pub radius: f64,
    pub dr: f64,
    pub dtheta: f64,
    #[serde(skip)]
    pub r: Vec<f64>,
    /// Face radii r_{i−½}, i = 0..=Nr (0 at the pole, R at the rim).
    #[serde(skip)]
    pub r_face: Vec<f64>,
    #[serde(skip)]
    pub theta: Vec<f64>,
}

impl PolarGrid {
    pub fn new(n_r: usize, n_theta: usize, radius: f64) -> Result<Self> {
        if n_r < 2 {
            return Err(Error::Config(format!("n_r must be >= 2, got {n_r}")));
        }
        if n_theta < 4 || n_theta % 2 != 0 {
            return Err(Error::Config(format!("n_theta must be even and >= 4, got {n_theta}")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Config(format!("radius must be > 0, got {radius}")));
        }
        let dr = radius / n_r as f64;
        let dtheta = 2.0 * PI / n_theta as f64;
        Ok(Self {
            n_r,
            n_theta,
            radius,
            dr,
            dtheta,
            r: (0..n_r).map(|i| (i as f64 + 0.5) * dr).collect(),
            r_face: (0..=n_r).map(|i| i as f64 * dr).collect(),
            theta: (0..n_theta).map(|j| j as f64 * dtheta).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.n_r * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n_theta + j
    }

    /// r_i Δr Δθ
    pub fn cell_area(&self, i: usize) -> f64 {
        self.r[i] * self.dr * self.dtheta
    }

    /// Σ area · q
    pub fn integrate(&self, q: &[f64]) -> f64 {
        let nt = self.n_theta;
        (0..self.n_r)
            .map(|i| q[i * nt..(i + 1) * nt].iter().sum::<f64>() * self.cell_area(i))
            .sum()
    }

    /// Samples f(r, θ) at cell centres.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for &r in &self.r {
            for &t in &self.theta {
                out.push(f(r, t));
            }
        }
        out
    }

    /// q(θ − sΔθ): the field rotated by s grid steps counterclockwise.
    pub fn rotate(&self, q: &[f64], s: i64) -> Vec<f64> {
        let nt = self.n_theta as i64;
        let mut out = vec![0.0; q.len()];
        for i in 0..self.n_r {
            for j in 0..self.n_theta {
                let src = (j as i64 - s).rem_euclid(nt) as usize;
                out[self.idx(i, j)] = q[self.idx(i, src)];
            }
        }
        out
    }

    /// q(−θ).
    pub fn reflect(&self, q: &[f64]) -> Vec<f64> {
        let nt = self.n_theta;
        let mut out = vec![0.0; q.len()];
        for i in 0..self.n_r {
            for j in 0..nt {
                out[self.idx(i, j)] = q[self.idx(i, (nt - j) % nt)];
            }
        }
        out
    }
}

/// Prey and predator densities on a [`PolarGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl Field {
    pub fn constant(len: usize, u: f64, v: f64) -> Self {
        Self { u: vec![u; len], v: vec![v; len] }
    }

    pub fn zeros(len: usize) -> Self {
        Self::constant(len, 0.0, 0.0)
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v).all(|x| x.is_finite())
    }

    pub fn min(&self) -> f64 {
        self.u.iter().chain(&self.v).copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.u
            .iter()
            .zip(&other.u)
            .chain(self.v.iter().zip(&other.v))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn rotate(&self, grid: &PolarGrid, s: i64) -> Self {
        Self { u: grid.rotate(&self.u, s), v: grid.rotate(&self.v, s) }
    }

    pub fn reflect(&self, grid: &PolarGrid) -> Self {
        Self { u: grid.reflect(&self.u), v: grid.reflect(&self.v) }
    }
}
