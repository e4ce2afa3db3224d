//! Characteristic-equation analysis of the linearisation about (u*, v*).
//!
//! Restricted to one Neumann eigenmode with eigenvalue λ the linearised
//! system has characteristic function
//!
//!   Γ(γ) = γ² + Aγ + B e^{−γτ} + C,
//!   A = (d1 + d2)λ − a11,  B = a21(χu*λ + d),  C = (d1λ − a11) d2 λ.
//!
//! Modes with n > 0 carry this factor twice (cos and sin partners).

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ModelParams, SteadyState};
use crate::spectrum::{EigenMode, ModeCache};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub n: u32,
    pub m: usize,
    pub lambda: f64,
    pub chi: f64,
}

impl CharCoeffs {
    pub fn new(p: &ModelParams, ss: &SteadyState, mode: &EigenMode) -> Self {
        Self::from_lambda(p, ss, mode.lambda, mode.n, mode.m)
    }

    pub fn from_lambda(p: &ModelParams, ss: &SteadyState, lambda: f64, n: u32, m: usize) -> Self {
        Self {
            a: (p.d1 + p.d2) * lambda - ss.a11,
            b: ss.a21 * (p.chi * ss.u_star * lambda + p.d),
            c: (p.d1 * lambda - ss.a11) * p.d2 * lambda,
            n,
            m,
            lambda,
            chi: p.chi,
        }
    }

    /// Coefficients (A² − 2C, C² − B²) of the quartic in ω².
    pub fn quartic(&self) -> (f64, f64) {
        (self.a * self.a - 2.0 * self.c, self.c * self.c - self.b * self.b)
    }
}

/// Γ(γ) = γ² + Aγ + B e^{−γτ} + C.
pub fn char_value(gamma: Complex64, k: &CharCoeffs, tau: f64) -> Complex64 {
    gamma * gamma + k.a * gamma + k.b * (-gamma * tau).exp() + k.c
}

/// ∂Γ/∂γ.
pub fn char_derivative(gamma: Complex64, k: &CharCoeffs, tau: f64) -> Complex64 {
    2.0 * gamma + k.a - tau * k.b * (-gamma * tau).exp()
}

/// All positive ω with Γ(iω) = 0 for some τ, i.e. positive roots of
/// ω⁴ + (A² − 2C)ω² + (C² − B²) = 0, largest first.
pub fn hopf_frequencies(k: &CharCoeffs) -> Vec<f64> {
    let (p, q) = k.quartic();
    let disc = p * p - 4.0 * q;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    // Stable pair of roots s± of s² + p s + q.
    let (s_hi, s_lo) = if p >= 0.0 {
        let s_lo = -(p + sq) / 2.0;
        let s_hi = if s_lo != 0.0 { q / s_lo } else { 0.0 };
        (s_hi, s_lo)
    } else {
        let s_hi = (-p + sq) / 2.0;
        (s_hi, if s_hi != 0.0 { q / s_hi } else { 0.0 })
    };
    [s_hi, s_lo]
        .into_iter()
        .filter(|&s| s > 0.0)
        .map(|s| polish_quartic(p, q, s).sqrt())
        .collect()
}

fn polish_quartic(p: f64, q: f64, s: f64) -> f64 {
    let f = s * s + p * s + q;
    let df = 2.0 * s + p;
    if df != 0.0 {
        let t = s - f / df;
        if t > 0.0 && (t * t + p * t + q).abs() <= f.abs() {
            return t;
        }
    }
    s
}

/// The Hopf frequency ω* (largest positive root), or `None` when the mode
/// cannot lose stability through a purely imaginary pair.
pub fn hopf_frequency(k: &CharCoeffs) -> Option<f64> {
    hopf_frequencies(k).first().copied()
}

/// Phase θ0 ∈ (0, 2π] with B cos θ0 = ω² − C, B sin θ0 = Aω.
pub fn critical_phase(k: &CharCoeffs, omega: f64) -> Result<f64> {
    if k.b == 0.0 {
        return Err(Error::Numerical("B = 0: the delay does not enter this mode".into()));
    }
    let cos = (omega * omega - k.c) / k.b;
    let sin = k.a * omega / k.b;
    if cos.abs() > 1.0 + 1e-9 {
        return Err(Error::Numerical(format!(
            "inconsistent Hopf data: |(ω²−C)/B| = {} > 1",
            cos.abs()
        )));
    }
    let mut theta = sin.atan2(cos);
    if theta <= 0.0 {
        theta += 2.0 * PI;
    }
    Ok(theta)
}

/// τ_k = (θ0 + 2πk)/ω* for k = 0..=k_max.
pub fn critical_delays(k: &CharCoeffs, omega: f64, k_max: usize) -> Result<Vec<f64>> {
    let theta0 = critical_phase(k, omega)?;
    Ok((0..=k_max).map(|j| (theta0 + 2.0 * PI * j as f64) / omega).collect())
}

/// γ′(τ) at a root γ of Γ.
pub fn root_velocity(k: &CharCoeffs, gamma: Complex64, tau: f64) -> Result<Complex64> {
    let e = k.b * (-gamma * tau).exp();
    let denom = 2.0 * gamma + k.a - tau * e;
    if denom.norm() < 1e-14 * (1.0 + k.a.abs() + k.b.abs()) {
        return Err(Error::Numerical("degenerate characteristic root (∂Γ/∂γ = 0)".into()));
    }
    Ok(gamma * e / denom)
}

/// Re γ′(τ_c) at γ = iω*.
pub fn transversality(k: &CharCoeffs, omega: f64, tau_c: f64) -> Result<f64> {
    Ok(root_velocity(k, Complex64::new(0.0, omega), tau_c)?.re)
}

/// Newton iteration on Γ with analytic derivative.
pub fn newton_root(k: &CharCoeffs, tau: f64, guess: Complex64) -> Result<Complex64> {
    let mut z = guess;
    let scale = 1.0 + k.a.abs() + k.b.abs() + k.c.abs();
    for _ in 0..100 {
        let f = char_value(z, k, tau);
        let df = char_derivative(z, k, tau);
        if df.norm() == 0.0 {
            break;
        }
        let dz = f / df;
        z -= dz;
        if dz.norm() <= 1e-15 * (1.0 + z.norm()) {
            return Ok(z);
        }
    }
    if char_value(z, k, tau).norm() < 1e-12 * scale {
        Ok(z)
    } else {
        Err(Error::Numerical(format!("Newton on Γ did not converge near {guess}")))
    }
}

/// Continues a root from (τ0, γ0) to τ1 in `steps` Newton-corrected steps
/// using the root velocity as predictor. Returns (τ, γ) along the path.
pub fn track_root(
    k: &CharCoeffs,
    gamma0: Complex64,
    tau0: f64,
    tau1: f64,
    steps: usize,
) -> Result<Vec<(f64, Complex64)>> {
    let steps = steps.max(1);
    let h = (tau1 - tau0) / steps as f64;
    let mut gamma = newton_root(k, tau0, gamma0)?;
    let mut path = Vec::with_capacity(steps + 1);
    path.push((tau0, gamma));
    for s in 1..=steps {
        let tau_prev = tau0 + (s - 1) as f64 * h;
        let tau = tau0 + s as f64 * h;
        let predictor = gamma + h * root_velocity(k, gamma, tau_prev)?;
        gamma = newton_root(k, tau, predictor)?;
        path.push((tau, gamma));
    }
    Ok(path)
}

/// Characteristic root for the mode at delay `tau`, continued from the
/// Hopf root iω* at τ_c.
pub fn root_at_delay(k: &CharCoeffs, hp: &HopfPoint, tau: f64) -> Result<Complex64> {
    let steps = ((tau - hp.tau_c).abs() / 0.05).ceil().max(1.0) as usize;
    let path = track_root(k, Complex64::new(0.0, hp.omega), hp.tau_c, tau, steps)?;
    Ok(path.last().expect("non-empty path").1)
}

/// Number of zeros of Γ inside the rectangle [re0, re1] × [im0, im1]
/// (argument principle along the boundary with adaptive refinement).
pub fn count_roots_in_box(k: &CharCoeffs, tau: f64, re: (f64, f64), im: (f64, f64)) -> Result<i64> {
    let corners = [
        Complex64::new(re.0, im.0),
        Complex64::new(re.1, im.0),
        Complex64::new(re.1, im.1),
        Complex64::new(re.0, im.1),
    ];
    let mut total = 0.0;
    for e in 0..4 {
        total += winding_segment(k, tau, corners[e], corners[(e + 1) % 4], 0)?;
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

fn winding_segment(k: &CharCoeffs, tau: f64, a: Complex64, b: Complex64, depth: u32) -> Result<f64> {
    let n = 64;
    let mut acc = 0.0;
    let mut prev_z = a;
    let mut prev = char_value(a, k, tau);
    for i in 1..=n {
        let z = a + (b - a) * (i as f64 / n as f64);
        let f = char_value(z, k, tau);
        if f.norm() < 1e-13 || prev.norm() < 1e-13 {
            return Err(Error::Numerical(format!("characteristic root on the contour near {z}")));
        }
        let d = (f / prev).arg();
        if d.abs() > PI / 4.0 {
            if depth > 30 {
                return Err(Error::Numerical("argument principle refinement limit".into()));
            }
            acc += winding_segment(k, tau, prev_z, z, depth + 1)?;
        } else {
            acc += d;
        }
        prev = f;
        prev_z = z;
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypothesisFlags {
    /// C − B < 0
    pub h2_linear: bool,
    /// C² − B² < 0
    pub h2_squared: bool,
    /// A positive Hopf frequency exists for this χ (operative form of H3).
    pub h3_frequency_exists: bool,
}

impl HypothesisFlags {
    pub fn of(k: &CharCoeffs) -> Self {
        Self {
            h2_linear: k.c - k.b < 0.0,
            h2_squared: k.c * k.c - k.b * k.b < 0.0,
            h3_frequency_exists: hopf_frequency(k).is_some(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HopfPoint {
    pub n: u32,
    pub m: usize,
    pub k: usize,
    pub lambda: f64,
    pub omega: f64,
    pub tau_c: f64,
    /// γ′(τ_c); its real part is the transversality value.
    pub root_velocity: Complex64,
    pub transversality: f64,
    pub flags: HypothesisFlags,
    pub coeffs: CharCoeffs,
}

impl HopfPoint {
    pub fn residual(&self) -> f64 {
        char_value(Complex64::new(0.0, self.omega), &self.coeffs, self.tau_c).norm()
    }
}

/// Critical delays τ_nm^0..τ_nm^{k_max} for one mode (empty when no Hopf
/// frequency exists).
pub fn hopf_points(p: &ModelParams, ss: &SteadyState, mode: &EigenMode, k_max: usize) -> Result<Vec<HopfPoint>> {
    let coeffs = CharCoeffs::new(p, ss, mode);
    hopf_points_for(&coeffs, k_max)
}

pub fn hopf_points_for(coeffs: &CharCoeffs, k_max: usize) -> Result<Vec<HopfPoint>> {
    let Some(omega) = hopf_frequency(coeffs) else {
        return Ok(Vec::new());
    };
    let flags = HypothesisFlags::of(coeffs);
    critical_delays(coeffs, omega, k_max)?
        .into_iter()
        .enumerate()
        .map(|(k, tau_c)| {
            let v = root_velocity(coeffs, Complex64::new(0.0, omega), tau_c)?;
            Ok(HopfPoint {
                n: coeffs.n,
                m: coeffs.m,
                k,
                lambda: coeffs.lambda,
                omega,
                tau_c,
                root_velocity: v,
                transversality: v.re,
                flags,
                coeffs: *coeffs,
            })
        })
        .collect()
}

/// Largest eigenvalue (scanned on a λ-grid up to `lambda_max`) for which a
/// Hopf frequency exists.
pub fn largest_hopf_lambda(p: &ModelParams, ss: &SteadyState, lambda_max: f64, samples: usize) -> Option<f64> {
    (0..=samples)
        .rev()
        .map(|i| lambda_max * i as f64 / samples as f64)
        .find(|&l| hopf_frequency(&CharCoeffs::from_lambda(p, ss, l, 0, 0)).is_some())
}

/// Modes with λ ≤ λ_cap where λ_cap = `factor` × the largest λ admitting a
/// Hopf frequency (at least the first few modes are always included).
pub fn truncated_modes(p: &ModelParams, ss: &SteadyState, factor: f64) -> (f64, Vec<EigenMode>) {
    let l_hopf = largest_hopf_lambda(p, ss, 1e4, 200_000).unwrap_or(0.0);
    let cap = (factor * l_hopf).max(4.0 * (3.0 / p.radius).powi(2));
    let kmax = cap.sqrt() * p.radius;
    let n_max = kmax.floor() as u32 + 1;
    let m_count = (kmax / PI).ceil() as usize + 2;
    let cache = ModeCache::new(p.radius, n_max, m_count);
    let modes = cache.sorted().into_iter().filter(|e| e.lambda <= cap).collect();
    (cap, modes)
}

/// Smallest τ_nm^0 over `modes`, with the mode attaining it.
pub fn first_critical_delay(p: &ModelParams, ss: &SteadyState, modes: &[EigenMode]) -> Option<HopfPoint> {
    modes
        .par_iter()
        .filter_map(|e| hopf_points(p, ss, e, 0).ok().and_then(|v| v.into_iter().next()))
        .collect::<Vec<_>>()
        .into_iter()
        .min_by(|a, b| a.tau_c.total_cmp(&b.tau_c))
}

/// χ at which C = B for a mode (boundary of Hopf existence when
/// A² − 2C > 0), or `None` if it is not positive.
pub fn chi_star(p: &ModelParams, ss: &SteadyState, lambda: f64) -> Option<f64> {
    if lambda <= 0.0 {
        return None;
    }
    let c = (p.d1 * lambda - ss.a11) * p.d2 * lambda;
    let chi = (c / ss.a21 - p.d) / (ss.u_star * lambda);
    (chi > 0.0).then_some(chi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub chi: f64,
    pub omega: f64,
    pub tau_c: f64,
    pub transversality: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiTauCurve {
    pub n: u32,
    pub m: usize,
    pub k: usize,
    /// Sampled points; χ values without a Hopf frequency are omitted.
    pub points: Vec<CurvePoint>,
    /// Smallest sampled χ with a Hopf frequency (empirical χ_*).
    pub chi_lower: Option<f64>,
}

/// τ_nm^k(χ) on the given χ samples for each mode.
pub fn chi_tau_curves(
    p: &ModelParams,
    ss: &SteadyState,
    modes: &[EigenMode],
    chi_values: &[f64],
    k_max: usize,
) -> Result<Vec<ChiTauCurve>> {
    let per_mode: Vec<Result<Vec<ChiTauCurve>>> = modes
        .par_iter()
        .map(|mode| {
            let mut curves: Vec<ChiTauCurve> = (0..=k_max)
                .map(|k| ChiTauCurve { n: mode.n, m: mode.m, k, points: Vec::new(), chi_lower: None })
                .collect();
            for &chi in chi_values {
                let coeffs = CharCoeffs::new(&p.with_chi(chi), ss, mode);
                for hp in hopf_points_for(&coeffs, k_max)? {
                    let c = &mut curves[hp.k];
                    c.points.push(CurvePoint {
                        chi,
                        omega: hp.omega,
                        tau_c: hp.tau_c,
                        transversality: hp.transversality,
                        residual: hp.residual(),
                    });
                    c.chi_lower = Some(c.chi_lower.map_or(chi, |v: f64| v.min(chi)));
                }
            }
            Ok(curves)
        })
        .collect();
    let mut out = Vec::new();
    for r in per_mode {
        out.extend(r?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(a: f64, b: f64, c: f64) -> CharCoeffs {
        CharCoeffs { a, b, c, n: 1, m: 1, lambda: 0.0, chi: 0.0 }
    }

    #[test]
    fn value_at_origin_is_b_plus_c() {
        let k = raw(0.3, 0.7, 0.2);
        for tau in [0.0, 1.0, 17.0] {
            let v = char_value(Complex64::new(0.0, 0.0), &k, tau);
            assert!((v - Complex64::new(0.9, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn large_real_argument_dominated_by_square() {
        let k = raw(0.3, 0.7, 0.2);
        let g = Complex64::new(1e4, 0.0);
        let v = char_value(g, &k, 0.0);
        assert!(v.re > 0.0 && (v.re / 1e8 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn unit_frequency_example() {
        let k = raw(0.0, 1.0, 0.0);
        let w = hopf_frequency(&k).unwrap();
        assert!((w - 1.0).abs() < 1e-15);
        let taus = critical_delays(&k, w, 3).unwrap();
        assert!((taus[0] - 2.0 * PI).abs() < 1e-14);
        for pair in taus.windows(2) {
            assert!((pair[1] - pair[0] - 2.0 * PI / w).abs() < 1e-12);
        }
    }

    #[test]
    fn inconsistent_frequency_rejected() {
        let k = raw(0.1, 0.5, 0.0);
        assert!(critical_delays(&k, 3.0, 0).is_err());
    }

    #[test]
    fn no_frequency_when_quartic_has_no_positive_root() {
        // p > 0 and q > 0: both roots negative.
        let k = raw(1.0, 0.0, 0.3);
        assert!(hopf_frequency(&k).is_none());
        // Brute-force sign scan of the quartic agrees.
        let (p, q) = k.quartic();
        assert!((1..20000).all(|i| {
            let w = i as f64 * 1e-3;
            w.powi(4) + p * w * w + q > 0.0
        }));
    }

    #[test]
    fn conjugate_root_velocity() {
        let k = raw(0.41, 0.057, 0.0027);
        let w = hopf_frequency(&k).unwrap();
        let tau = critical_delays(&k, w, 0).unwrap()[0];
        let up = root_velocity(&k, Complex64::new(0.0, w), tau).unwrap();
        let down = root_velocity(&k, Complex64::new(0.0, -w), tau).unwrap();
        assert!((up.re - down.re).abs() < 1e-15);
        assert!((up.im + down.im).abs() < 1e-15);
    }

    #[test]
    fn argument_principle_counts_quadratic_roots() {
        // B = 0 reduces Γ to a quadratic with roots 0.5 ± i.
        let k = raw(-1.0, 0.0, 1.25);
        assert_eq!(count_roots_in_box(&k, 1.0, (0.0, 2.0), (-5.0, 5.0)).unwrap(), 2);
        assert_eq!(count_roots_in_box(&k, 1.0, (0.6, 2.0), (-5.0, 5.0)).unwrap(), 0);
    }
}
