//! Neumann eigenpairs of −Δ on the disk of radius R.
//!
//! φ_nm(r, θ) = N · J_n(β_nm r / R) · {cos nθ, sin nθ},  λ_nm = (β_nm / R)²,
//! with β_nm the m-th positive zero of J_n′. For n = 0, m = 0 is the constant
//! mode (β = 0).

pub mod bessel;
pub mod quadrature;

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::Serialize;

pub use bessel::{bessel_j, bessel_jprime, bessel_jprime_zeros};
pub use quadrature::{gauss_legendre, inner_product, GridField, GridKey, PolarQuadrature};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenMode {
    pub n: u32,
    pub m: usize,
    pub beta: f64,
    pub lambda: f64,
    pub radius: f64,
    /// Normalisation of the cos(nθ) eigenfunction.
    pub norm_c: f64,
    /// Normalisation of the sin(nθ) eigenfunction; absent for n = 0.
    pub norm_s: Option<f64>,
}

impl EigenMode {
    pub fn wavenumber(&self) -> f64 {
        self.beta / self.radius
    }

    /// J_n(β r / R), or 1 for the constant mode.
    pub fn radial(&self, r: f64) -> f64 {
        if self.beta == 0.0 {
            1.0
        } else {
            bessel::j_unchecked(self.n, self.wavenumber() * r)
        }
    }

    /// d/dr of [`EigenMode::radial`].
    pub fn radial_deriv(&self, r: f64) -> f64 {
        if self.beta == 0.0 {
            0.0
        } else {
            let k = self.wavenumber();
            k * bessel::jprime_unchecked(self.n, k * r)
        }
    }

    pub fn cos_fn(&self, r: f64, theta: f64) -> f64 {
        self.norm_c * self.radial(r) * (self.n as f64 * theta).cos()
    }

    pub fn sin_fn(&self, r: f64, theta: f64) -> f64 {
        self.norm_s.unwrap_or(0.0) * self.radial(r) * (self.n as f64 * theta).sin()
    }

    /// Normalisation of the complex eigenfunction J_n e^{±inθ}.
    pub fn norm_exp(&self) -> f64 {
        if self.n == 0 {
            self.norm_c
        } else {
            self.norm_c / SQRT_2
        }
    }

    /// Unit-norm complex eigenfunction N J_n(kr) e^{i·sign·nθ}.
    pub fn exp_fn(&self, sign: i32, r: f64, theta: f64) -> Complex64 {
        let phase = sign as f64 * self.n as f64 * theta;
        Complex64::from_polar(self.norm_exp() * self.radial(r), phase)
    }

    /// Neumann residual d/dr J_n(√λ r) at r = R.
    pub fn neumann_residual(&self) -> f64 {
        self.radial_deriv(self.radius)
    }
}

/// ∫_0^R r J_n(βr/R)² dr for a Neumann zero β (R²/2 for β = 0).
fn radial_norm_sq(n: u32, beta: f64, radius: f64) -> f64 {
    if beta == 0.0 {
        return 0.5 * radius * radius;
    }
    let j = bessel::j_unchecked(n, beta);
    let nb = n as f64 / beta;
    0.5 * radius * radius * (1.0 - nb * nb) * j * j
}

fn mode_from_beta(n: u32, m: usize, beta: f64, radius: f64) -> EigenMode {
    let angular = if n == 0 { 2.0 * PI } else { PI };
    let norm = 1.0 / (angular * radial_norm_sq(n, beta, radius)).sqrt();
    EigenMode {
        n,
        m,
        beta,
        lambda: (beta / radius).powi(2),
        radius,
        norm_c: norm,
        norm_s: (n > 0).then_some(norm),
    }
}

/// Eigenpair (n, m). For n > 0 the radial index starts at 1.
pub fn eigenmode(n: u32, m: usize, radius: f64) -> Result<EigenMode> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParams(format!("radius must be > 0, got {radius}")));
    }
    if n > 0 && m == 0 {
        return Err(Error::InvalidParams(format!("radial index must be >= 1 for n = {n}")));
    }
    let beta = if m == 0 { 0.0 } else { bessel_jprime_zeros(n, m)[m - 1] };
    Ok(mode_from_beta(n, m, beta, radius))
}

/// Immutable table of eigenpairs for n ≤ n_max, indexed as (n, m).
#[derive(Debug, Clone)]
pub struct ModeCache {
    pub radius: f64,
    families: Vec<Vec<EigenMode>>,
}

impl ModeCache {
    /// `m_count` radial modes per angular family (for n = 0 the constant
    /// mode is added in front).
    pub fn new(radius: f64, n_max: u32, m_count: usize) -> Self {
        let families = (0..=n_max)
            .map(|n| {
                let zeros = bessel_jprime_zeros(n, m_count);
                let mut fam = Vec::with_capacity(m_count + 1);
                if n == 0 {
                    fam.push(mode_from_beta(0, 0, 0.0, radius));
                }
                fam.extend(zeros.iter().enumerate().map(|(i, &b)| mode_from_beta(n, i + 1, b, radius)));
                fam
            })
            .collect();
        Self { radius, families }
    }

    /// Radial family for angular wavenumber n (m ascending).
    pub fn family(&self, n: u32) -> &[EigenMode] {
        &self.families[n as usize]
    }

    pub fn get(&self, n: u32, m: usize) -> Option<&EigenMode> {
        self.families.get(n as usize)?.iter().find(|e| e.m == m)
    }

    pub fn iter(&self) -> impl Iterator<Item = &EigenMode> {
        self.families.iter().flatten()
    }

    /// All modes sorted by eigenvalue.
    pub fn sorted(&self) -> Vec<EigenMode> {
        let mut all: Vec<EigenMode> = self.iter().copied().collect();
        all.sort_by(|a, b| a.lambda.total_cmp(&b.lambda).then(a.n.cmp(&b.n)));
        all
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_mode() {
        let e = eigenmode(0, 0, 10.0).unwrap();
        assert_eq!(e.lambda, 0.0);
        assert!((e.cos_fn(3.0, 1.0) - 1.0 / (PI * 100.0).sqrt()).abs() < 1e-15);
        assert!(e.norm_s.is_none());
    }

    #[test]
    fn low_eigenvalues() {
        let e11 = eigenmode(1, 1, 10.0).unwrap();
        assert!((e11.lambda - (1.841_183_781_3_f64 / 10.0).powi(2)).abs() < 1e-10);
        assert!((e11.lambda - 0.033_900).abs() < 1e-6);
        let e21 = eigenmode(2, 1, 10.0).unwrap();
        assert!((e21.lambda - 0.093_284).abs() < 1e-6);
        assert!(eigenmode(1, 0, 10.0).is_err());
    }

    #[test]
    fn eigenvalues_increase_in_m() {
        let cache = ModeCache::new(10.0, 6, 12);
        for n in 0..=6 {
            let fam = cache.family(n);
            assert!(fam.windows(2).all(|w| w[1].lambda > w[0].lambda));
            for e in fam {
                assert!(e.neumann_residual().abs() < 1e-10);
            }
        }
    }

    #[test]
    fn cos_sin_orthonormal() {
        let q = PolarQuadrature::new(10.0, 48, 32);
        let e = eigenmode(1, 1, 10.0).unwrap();
        let c = q.sample(|r, t| Complex64::new(e.cos_fn(r, t), 0.0));
        let s = q.sample(|r, t| Complex64::new(e.sin_fn(r, t), 0.0));
        let e21 = eigenmode(2, 1, 10.0).unwrap();
        let c21 = q.sample(|r, t| Complex64::new(e21.cos_fn(r, t), 0.0));
        assert!((inner_product(&q, &c, &c).unwrap().re - 1.0).abs() < 1e-12);
        assert!(inner_product(&q, &c, &s).unwrap().norm() < 1e-14);
        assert!(inner_product(&q, &c, &c21).unwrap().norm() < 1e-8);
        let p = q.sample(|r, t| e.exp_fn(1, r, t));
        let m = q.sample(|r, t| e.exp_fn(-1, r, t));
        assert!((inner_product(&q, &p, &p).unwrap().re - 1.0).abs() < 1e-12);
        assert!(inner_product(&q, &p, &m).unwrap().norm() < 1e-14);
    }
}
