//! Cubic normal-form coefficient at an equivariant Hopf point.
//!
//! The linearisation restricted to eigenmode λ is
//!   U̇ = M0(λ) U + Mτ U(t − τ),
//!   M0(λ) = [[−d1λ + a11, −χu*λ − d], [0, −d2λ]],  Mτ = [[0, 0], [a21, 0]],
//! with characteristic matrix Δ(γ) = γI − M0 − Mτ e^{−γτ}.
//!
//! Kernel vector V1 solves Δ(iω)V1 = 0; the adjoint row w solves wΔ(iω) = 0
//! and is scaled so that w(I + τMτ e^{−iωτ})V1 = 1. Spatial patterns are the
//! complex eigenfunctions Φ± = N J_n(βr/R) e^{±inθ}.
//!
//! Fields multiplying e^{iνt} are carried as plain spatial fields; the
//! delayed prey slot picks up the factor e^{−iντ}.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lineal::HopfPoint;
use crate::model::{KineticForms, ModelParams, SteadyState};
use crate::spectrum::{eigenmode, gauss_legendre, EigenMode, ModeCache, PolarQuadrature};

type C64 = Complex64;
type Vec2 = [C64; 2];

const I: C64 = C64::new(0.0, 1.0);
const RESONANCE_COND: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// ψ ∝ e^{iωt} e^{inθ}: pattern cos(nθ + ωt), clockwise.
    RotatingCw,
    /// ψ ∝ e^{iωt} e^{−inθ}: pattern cos(nθ − ωt), counterclockwise.
    RotatingCcw,
    /// ψ ∝ e^{iωt} cos(nθ).
    Standing,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::RotatingCw => "rotating-cw",
            Branch::RotatingCcw => "rotating-ccw",
            Branch::Standing => "standing",
        }
    }

    /// Angular signs s of the patterns e^{isnθ} making up ψ.
    fn signs(self) -> &'static [i64] {
        match self {
            Branch::RotatingCw => &[1],
            Branch::RotatingCcw => &[-1],
            Branch::Standing => &[1, -1],
        }
    }
}

impl std::str::FromStr for Branch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rotating-cw" | "cw" => Ok(Branch::RotatingCw),
            "rotating-ccw" | "ccw" => Ok(Branch::RotatingCcw),
            "standing" => Ok(Branch::Standing),
            other => Err(Error::Config(format!("unknown branch '{other}'"))),
        }
    }
}

/// 2×2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub fn apply(&self, x: &Vec2) -> Vec2 {
        let m = &self.0;
        [m[0][0] * x[0] + m[0][1] * x[1], m[1][0] * x[0] + m[1][1] * x[1]]
    }

    pub fn det(&self) -> C64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// Spectral condition number.
    pub fn cond(&self) -> f64 {
        let fro2: f64 = self.0.iter().flatten().map(|z| z.norm_sqr()).sum();
        let det = self.det().norm();
        if det == 0.0 {
            return f64::INFINITY;
        }
        // σ1² + σ2² = ‖M‖_F², σ1σ2 = |det|
        let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt();
        let s1 = ((fro2 + disc) / 2.0).sqrt();
        let s2 = det / s1;
        s1 / s2
    }

    pub fn solve(&self, b: &Vec2) -> Vec2 {
        let m = &self.0;
        let det = self.det();
        [
            (m[1][1] * b[0] - m[0][1] * b[1]) / det,
            (m[0][0] * b[1] - m[1][0] * b[0]) / det,
        ]
    }
}

/// Δ(iν) for eigenvalue λ: iνI − M0(λ) − Mτ e^{−iντ}.
pub fn char_matrix(p: &ModelParams, ss: &SteadyState, lambda: f64, nu: f64, tau: f64) -> Mat2 {
    let g = C64::new(0.0, nu);
    Mat2([
        [g + p.d1 * lambda - ss.a11, C64::from(p.chi * ss.u_star * lambda + p.d)],
        [-ss.a21 * (-g * tau).exp(), g + p.d2 * lambda],
    ])
}

/// Kernel and adjoint data for one Hopf point and branch.
#[derive(Debug, Clone, Serialize)]
pub struct KernelBasis {
    pub n: u32,
    pub m: usize,
    pub k: usize,
    pub omega: f64,
    pub tau_c: f64,
    pub branch: Branch,
    /// Phase σ in ψ → e^{iσ}ψ.
    pub gauge: f64,
    pub v1: Vec2,
    /// Adjoint row vector (scaled for the Hale pairing).
    pub v2: Vec2,
    pub root_velocity: C64,
    #[serde(skip)]
    pub mode: EigenMode,
    #[serde(skip)]
    params: ModelParams,
    #[serde(skip)]
    steady: SteadyState,
}

pub fn kernel_basis(
    p: &ModelParams,
    ss: &SteadyState,
    hp: &HopfPoint,
    branch: Branch,
    gauge: f64,
) -> Result<KernelBasis> {
    if hp.n == 0 || hp.m == 0 {
        return Err(Error::InvalidParams(format!(
            "normal form requires n > 0 and m > 0, got ({}, {})",
            hp.n, hp.m
        )));
    }
    let mode = eigenmode(hp.n, hp.m, p.radius)?;
    let (omega, tau) = (hp.omega, hp.tau_c);
    let lam = mode.lambda;
    let e = (-I * omega * tau).exp();
    let v1 = [C64::from(1.0), ss.a21 * e / (p.d2 * lam + I * omega)];
    let raw = [C64::from(1.0), -(p.chi * ss.u_star * lam + p.d) / (I * omega + p.d2 * lam)];
    // w (I + τ Mτ e^{−iωτ}) V1 = w·V1 + τ e^{−iωτ} w_v a21 V1_u
    let scale = raw[0] * v1[0] + raw[1] * v1[1] + tau * e * raw[1] * ss.a21 * v1[0];
    let v2 = [raw[0] / scale, raw[1] / scale];
    Ok(KernelBasis {
        n: hp.n,
        m: hp.m,
        k: hp.k,
        omega,
        tau_c: tau,
        branch,
        gauge,
        v1,
        v2,
        root_velocity: hp.root_velocity,
        mode,
        params: *p,
        steady: *ss,
    })
}

impl KernelBasis {
    fn mtau(&self) -> Mat2 {
        let z = C64::from(0.0);
        Mat2([[z, z], [C64::from(self.steady.a21), z]])
    }

    /// ⟨Φ, Φ⟩ for the branch pattern.
    pub fn spatial_norm(&self) -> f64 {
        self.branch.signs().len() as f64
    }

    /// ψ as a modal field (coefficient of e^{iωt}).
    pub fn psi(&self) -> ModalField {
        let g = C64::from_polar(1.0, self.gauge);
        ModalField {
            terms: self
                .branch
                .signs()
                .iter()
                .map(|&s| ModalTerm {
                    k: s * self.n as i64,
                    mode: self.mode,
                    coef: [g * self.v1[0], g * self.v1[1]],
                })
                .collect(),
        }
    }

    /// ψ̄ (coefficient of e^{−iωt}).
    pub fn psi_bar(&self) -> ModalField {
        self.psi().conj()
    }

    /// Dual-pairing matrix (φ_i*, φ_j) for i, j = 1..4 in the order
    /// {e^{iωϑ}V1Φ₊, e^{−iωϑ}V̄1Φ₋, e^{iωϑ}V1Φ₋, e^{−iωϑ}V̄1Φ₊}, evaluated by
    /// spatial quadrature and Gauss–Legendre in the history variable.
    pub fn pairing_matrix(&self, quad: &PolarQuadrature, time_nodes: usize) -> [[C64; 4]; 4] {
        let w = self.omega;
        let v1c = [self.v1[0].conj(), self.v1[1].conj()];
        let v2c = [self.v2[0].conj(), self.v2[1].conj()];
        // (frequency, vector, angular sign)
        let basis = [(w, self.v1, 1i64), (-w, v1c, -1), (w, self.v1, -1), (-w, v1c, 1)];
        let dual = [(w, self.v2, 1i64), (-w, v2c, -1), (w, self.v2, -1), (-w, v2c, 1)];
        let phi = |s: i64| {
            let f = ModalField {
                terms: vec![ModalTerm { k: s * self.n as i64, mode: self.mode, coef: [C64::from(1.0), C64::from(0.0)] }],
            };
            SpatialEval::new(quad).eval(&f).val[0].clone()
        };
        let plus = phi(1);
        let minus = phi(-1);
        let pick = |s: i64| if s > 0 { &plus } else { &minus };
        let (x, wt) = gauss_legendre(time_nodes);
        let tau = self.tau_c;
        let mt = self.mtau();
        let mut out = [[C64::from(0.0); 4]; 4];
        for (i, (wi, ri, si)) in dual.iter().enumerate() {
            for (j, (wj, vj, sj)) in basis.iter().enumerate() {
                // adjoint spatial part is the conjugate pattern
                let spatial = quad.integrate_product(pick(*sj), pick(*si));
                let mv = mt.apply(vj);
                let mut t = ri[0] * vj[0] + ri[1] * vj[1];
                let rmv = ri[0] * mv[0] + ri[1] * mv[1];
                for (xq, wq) in x.iter().zip(&wt) {
                    let xi = -0.5 * tau * (1.0 - xq);
                    let f = (-I * wi * (xi + tau)).exp() * (I * wj * xi).exp();
                    t += 0.5 * tau * wq * f * rmv;
                }
                out[i][j] = spatial * t;
            }
        }
        out
    }

    /// Largest entrywise deviation of [`KernelBasis::pairing_matrix`] from I.
    pub fn pairing_error(&self, quad: &PolarQuadrature, time_nodes: usize) -> f64 {
        let m = self.pairing_matrix(quad, time_nodes);
        let mut err = 0.0_f64;
        for (i, row) in m.iter().enumerate() {
            for (j, z) in row.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((z - target).norm());
            }
        }
        err
    }
}

/// Spatial field Σ coef · N J_|k|(βr/R) e^{ikθ} with 2-vector coefficients.
#[derive(Debug, Clone, Default)]
pub struct ModalField {
    pub terms: Vec<ModalTerm>,
}

#[derive(Debug, Clone, Copy)]
pub struct ModalTerm {
    pub k: i64,
    pub mode: EigenMode,
    pub coef: Vec2,
}

impl ModalField {
    pub fn conj(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| ModalTerm { k: -t.k, mode: t.mode, coef: [t.coef[0].conj(), t.coef[1].conj()] })
                .collect(),
        }
    }

    pub fn max_coef(&self) -> f64 {
        self.terms.iter().flat_map(|t| t.coef).map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Values, derivatives and Laplacian of a 2-component field on a quadrature grid.
#[derive(Debug, Clone)]
pub struct GridVec {
    pub val: [Vec<C64>; 2],
    pub dr: [Vec<C64>; 2],
    pub dth: [Vec<C64>; 2],
    pub lap: [Vec<C64>; 2],
}

impl GridVec {
    fn zeros(len: usize) -> Self {
        let z = || [vec![C64::from(0.0); len], vec![C64::from(0.0); len]];
        Self { val: z(), dr: z(), dth: z(), lap: z() }
    }
}

/// Field evaluation and modal projection on a [`PolarQuadrature`].
pub struct SpatialEval<'a> {
    pub quad: &'a PolarQuadrature,
}

impl<'a> SpatialEval<'a> {
    pub fn new(quad: &'a PolarQuadrature) -> Self {
        Self { quad }
    }

    fn radial(&self, mode: &EigenMode) -> (Vec<f64>, Vec<f64>) {
        let n = mode.norm_exp();
        let vals = self.quad.r.iter().map(|&r| n * mode.radial(r)).collect();
        let ders = self.quad.r.iter().map(|&r| n * mode.radial_deriv(r)).collect();
        (vals, ders)
    }

    fn angular(&self, k: i64) -> Vec<C64> {
        self.quad.theta.iter().map(|&t| C64::from_polar(1.0, k as f64 * t)).collect()
    }

    pub fn eval(&self, f: &ModalField) -> GridVec {
        let q = self.quad;
        let nt = q.n_theta();
        let mut out = GridVec::zeros(q.len());
        for t in &f.terms {
            let (rv, rd) = self.radial(&t.mode);
            let ang = self.angular(t.k);
            let ik = I * t.k as f64;
            for c in 0..2 {
                let a = t.coef[c];
                if a == C64::from(0.0) {
                    continue;
                }
                for i in 0..q.n_r() {
                    for j in 0..nt {
                        let idx = i * nt + j;
                        let base = a * ang[j];
                        out.val[c][idx] += base * rv[i];
                        out.dr[c][idx] += base * rd[i];
                        out.dth[c][idx] += base * ik * rv[i];
                        out.lap[c][idx] -= base * t.mode.lambda * rv[i];
                    }
                }
            }
        }
        out
    }

    /// ⟨F, N J_|k| e^{ikθ}⟩ for every mode in `modes` (each paired with k).
    pub fn project(&self, field: &[Vec<C64>; 2], modes: &[(i64, EigenMode)]) -> Vec<Vec2> {
        let q = self.quad;
        let nt = q.n_theta();
        modes
            .par_iter()
            .map(|(k, mode)| {
                let (rv, _) = self.radial(mode);
                let ang = self.angular(*k);
                let mut acc = [C64::from(0.0); 2];
                for (c, f) in field.iter().enumerate() {
                    let mut total = C64::from(0.0);
                    for i in 0..q.n_r() {
                        let mut ring = C64::from(0.0);
                        for j in 0..nt {
                            ring += f[i * nt + j] * ang[j].conj();
                        }
                        total += ring * (q.wr[i] * rv[i]);
                    }
                    acc[c] = total * q.dtheta;
                }
                acc
            })
            .collect()
    }
}

/// A field argument of a multilinear form: its grid data and the phase
/// e^{−iντ} applied to the delayed prey slot.
#[derive(Clone, Copy)]
pub struct Slot<'a> {
    pub f: &'a GridVec,
    pub delay_phase: C64,
}

impl<'a> Slot<'a> {
    pub fn new(f: &'a GridVec, nu: f64, tau: f64) -> Self {
        Self { f, delay_phase: (-I * nu * tau).exp() }
    }
}

/// ∇·(a∇b) = a_r b_r + a_θ b_θ / r² + a Δb at node `idx`.
#[inline]
fn taxis_div(x: &GridVec, y: &GridVec, idx: usize, r: f64) -> C64 {
    x.dr[0][idx] * y.dr[1][idx] + x.dth[0][idx] * y.dth[1][idx] / (r * r) + x.val[0][idx] * y.lap[1][idx]
}

/// Quadratic form 𝓑(X, Y) on the grid.
pub fn bilinear(quad: &PolarQuadrature, forms: &KineticForms, x: Slot, y: Slot) -> [Vec<C64>; 2] {
    let nt = quad.n_theta();
    let len = quad.len();
    let mut bu = vec![C64::from(0.0); len];
    let mut bv = vec![C64::from(0.0); len];
    for idx in 0..len {
        let r = quad.r[idx / nt];
        let (xu, xv) = (x.f.val[0][idx], x.f.val[1][idx]);
        let (yu, yv) = (y.f.val[0][idx], y.f.val[1][idx]);
        let (xw, yw) = (xu * x.delay_phase, yu * y.delay_phase);
        let mut u = forms.f_uu * xu * yu + forms.f_uv * (xu * yv + xv * yu) + forms.f_vv * xv * yv;
        if forms.chi != 0.0 {
            u += forms.chi * (taxis_div(x.f, y.f, idx, r) + taxis_div(y.f, x.f, idx, r));
        }
        bu[idx] = u;
        bv[idx] = forms.g_ww * xw * yw + forms.g_wv * (xw * yv + xv * yw) + forms.g_vv * xv * yv;
    }
    [bu, bv]
}

/// Cubic form 𝓒(X, Y, Z) on the grid.
pub fn trilinear(quad: &PolarQuadrature, forms: &KineticForms, x: Slot, y: Slot, z: Slot) -> [Vec<C64>; 2] {
    let len = quad.len();
    let mut cu = vec![C64::from(0.0); len];
    let mut cv = vec![C64::from(0.0); len];
    for idx in 0..len {
        let (xu, xv) = (x.f.val[0][idx], x.f.val[1][idx]);
        let (yu, yv) = (y.f.val[0][idx], y.f.val[1][idx]);
        let (zu, zv) = (z.f.val[0][idx], z.f.val[1][idx]);
        cu[idx] = forms.f_uuu * xu * yu * zu
            + forms.f_uuv * (xu * yu * zv + xu * yv * zu + xv * yu * zu)
            + forms.f_uvv * (xu * yv * zv + xv * yu * zv + xv * yv * zu)
            + forms.f_vvv * xv * yv * zv;
        let (xw, yw, zw) = (xu * x.delay_phase, yu * y.delay_phase, zu * z.delay_phase);
        cv[idx] = forms.g_www * xw * yw * zw
            + forms.g_wwv * (xw * yw * zv + xw * yv * zw + xv * yw * zw)
            + forms.g_wvv * (xw * yv * zv + xv * yw * zv + xv * yv * zw)
            + forms.g_vvv * xv * yv * zv;
    }
    [cu, cv]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalFormConfig {
    /// Radial modes per excited angular family.
    pub truncation: usize,
    /// Radial quadrature nodes (None: 4M + 32).
    pub n_r: Option<usize>,
    /// Angular quadrature nodes (None: max(32, 8n + 8)).
    pub n_theta: Option<usize>,
    pub theta_offset: f64,
    pub gauge: f64,
    pub time_nodes: usize,
}

impl Default for NormalFormConfig {
    fn default() -> Self {
        Self { truncation: 24, n_r: None, n_theta: None, theta_offset: 0.0, gauge: 0.0, time_nodes: 48 }
    }
}

impl NormalFormConfig {
    pub fn quadrature(&self, radius: f64, n: u32) -> PolarQuadrature {
        let n_r = self.n_r.unwrap_or(4 * self.truncation + 32);
        let n_theta = self.n_theta.unwrap_or((8 * n as usize + 8).max(32));
        PolarQuadrature::with_offset(radius, n_r, n_theta, self.theta_offset)
    }
}

/// Second-order centre-manifold coefficients and their solve diagnostics.
#[derive(Debug, Clone)]
pub struct Corrections {
    pub w11: ModalField,
    pub w20: ModalField,
    /// max over modes of ‖Δ(2iω)W20_k − 𝓑(ψ,ψ)_k‖ / max ‖𝓑(ψ,ψ)_k‖
    pub w20_residual: f64,
    pub w11_residual: f64,
    /// |P 𝓑(ψ, ψ̄)| and |P 𝓑(ψ, ψ)|: components along the kernel.
    pub kernel_leak: (f64, f64),
}

fn excited_modes(radius: f64, n: u32, truncation: usize) -> Vec<(i64, EigenMode)> {
    let two_n = 2 * n;
    let cache = ModeCache::new(radius, two_n, truncation);
    let mut out = Vec::new();
    for k in [-(two_n as i64), 0, two_n as i64] {
        for mode in cache.family(k.unsigned_abs() as u32) {
            out.push((k, *mode));
        }
    }
    out
}

/// Projection P(F) = w · ⟨F, Φ⟩ / ⟨Φ, Φ⟩ of an e^{iωt}-resonant field.
fn project_center(kb: &KernelBasis, se: &SpatialEval, field: &[Vec<C64>; 2]) -> C64 {
    let modes: Vec<(i64, EigenMode)> = kb.branch.signs().iter().map(|&s| (s * kb.n as i64, kb.mode)).collect();
    let coefs = se.project(field, &modes);
    let g = C64::from_polar(1.0, -kb.gauge);
    let mut acc = C64::from(0.0);
    for c in coefs {
        acc += kb.v2[0] * c[0] + kb.v2[1] * c[1];
    }
    g * acc / kb.spatial_norm()
}

pub fn w_corrections(
    kb: &KernelBasis,
    forms: &KineticForms,
    quad: &PolarQuadrature,
    truncation: usize,
) -> Result<Corrections> {
    let (p, ss) = (&kb.params, &kb.steady);
    let (w, tau) = (kb.omega, kb.tau_c);
    let se = SpatialEval::new(quad);
    let psi = se.eval(&kb.psi());
    let psib = se.eval(&kb.psi_bar());
    let b11 = bilinear(quad, forms, Slot::new(&psi, w, tau), Slot::new(&psib, -w, tau));
    let b20 = bilinear(quad, forms, Slot::new(&psi, w, tau), Slot::new(&psi, w, tau));

    let modes = excited_modes(p.radius, kb.n, truncation);
    let c11 = se.project(&b11, &modes);
    let c20 = se.project(&b20, &modes);

    let solve = |coefs: &[Vec2], nu: f64| -> Result<(ModalField, f64)> {
        let scale = coefs.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
        let mut terms = Vec::with_capacity(coefs.len());
        let mut resid = 0.0_f64;
        for ((k, mode), rhs) in modes.iter().zip(coefs) {
            let m = char_matrix(p, ss, mode.lambda, nu, tau);
            let cond = m.cond();
            if !(cond <= RESONANCE_COND) {
                return Err(Error::Resonance { n: *k, m: mode.m, cond });
            }
            // Δ(iν) W = 𝓑
            let x = m.solve(rhs);
            let back = m.apply(&x);
            let r = ((back[0] - rhs[0]).norm()).max((back[1] - rhs[1]).norm());
            if scale > 0.0 {
                resid = resid.max(r / scale);
            }
            terms.push(ModalTerm { k: *k, mode: *mode, coef: x });
        }
        Ok((ModalField { terms }, resid))
    };
    let (w11, w11_residual) = solve(&c11, 0.0)?;
    let (w20, w20_residual) = solve(&c20, 2.0 * w)?;

    // Kernel components: project on the e^{iωt} kernel patterns, ignoring the
    // temporal frequency mismatch (spatial orthogonality is what is tested).
    let leak = |f: &[Vec<C64>; 2]| {
        let pats: Vec<(i64, EigenMode)> = [1i64, -1].iter().map(|&s| (s * kb.n as i64, kb.mode)).collect();
        se.project(f, &pats).iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    };
    Ok(Corrections { w11, w20, w20_residual, w11_residual, kernel_leak: (leak(&b11), leak(&b20)) })
}

/// g21 = P𝓒(ψ,ψ,ψ̄) + 2P𝓑(ψ,W11) + P𝓑(ψ̄,W20).
pub fn g21(kb: &KernelBasis, forms: &KineticForms, corr: &Corrections, quad: &PolarQuadrature) -> C64 {
    let (w, tau) = (kb.omega, kb.tau_c);
    let se = SpatialEval::new(quad);
    let psi = se.eval(&kb.psi());
    let psib = se.eval(&kb.psi_bar());
    let w11 = se.eval(&corr.w11);
    let w20 = se.eval(&corr.w20);
    let s_psi = Slot::new(&psi, w, tau);
    let s_psib = Slot::new(&psib, -w, tau);
    let cubic = trilinear(quad, forms, s_psi, s_psi, s_psib);
    let b1 = bilinear(quad, forms, s_psi, Slot::new(&w11, 0.0, tau));
    let b2 = bilinear(quad, forms, s_psib, Slot::new(&w20, 2.0 * w, tau));
    let len = quad.len();
    let mut total = [vec![C64::from(0.0); len], vec![C64::from(0.0); len]];
    for c in 0..2 {
        for i in 0..len {
            total[c][i] = cubic[c][i] + 2.0 * b1[c][i] + b2[c][i];
        }
    }
    project_center(kb, &se, &total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalFormResult {
    pub n: u32,
    pub m: usize,
    pub k: usize,
    pub branch: Branch,
    pub omega: f64,
    pub tau_c: f64,
    pub g21: C64,
    pub root_velocity: C64,
    /// Re g21 / Re γ′
    pub tau_prime0: f64,
    /// Im(γ′ ḡ21) / Re γ′
    pub rho_prime0: f64,
    /// τ′(0) < 0
    pub supercritical: bool,
    /// dτ/d(amplitude²) of the bifurcating branch: −Re g21 / (2 Re γ′).
    pub branch_slope: f64,
    /// Relative period change per unit amplitude²: −Im(γ̄′ g21) / (2ω Re γ′).
    pub period_slope: f64,
}

pub fn branch_coefficients(kb: &KernelBasis, g21: C64) -> NormalFormResult {
    let gp = kb.root_velocity;
    let tau_prime0 = g21.re / gp.re;
    let rho_prime0 = (gp * g21.conj()).im / gp.re;
    NormalFormResult {
        n: kb.n,
        m: kb.m,
        k: kb.k,
        branch: kb.branch,
        omega: kb.omega,
        tau_c: kb.tau_c,
        g21,
        root_velocity: gp,
        tau_prime0,
        rho_prime0,
        supercritical: tau_prime0 < 0.0,
        branch_slope: -g21.re / (2.0 * gp.re),
        period_slope: -(gp.conj() * g21).im / (2.0 * kb.omega * gp.re),
    }
}

/// Full pipeline output with numerical diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct NormalFormReport {
    pub result: NormalFormResult,
    pub truncation: usize,
    pub n_r: usize,
    pub n_theta: usize,
    pub pairing_error: f64,
    pub w20_residual: f64,
    pub w11_residual: f64,
    pub kernel_leak_w11: f64,
    pub kernel_leak_w20: f64,
}

pub fn analyze(
    p: &ModelParams,
    ss: &SteadyState,
    forms: &KineticForms,
    hp: &HopfPoint,
    branch: Branch,
    cfg: &NormalFormConfig,
) -> Result<NormalFormReport> {
    let kb = kernel_basis(p, ss, hp, branch, cfg.gauge)?;
    let quad = cfg.quadrature(p.radius, hp.n);
    let corr = w_corrections(&kb, forms, &quad, cfg.truncation)?;
    let g = g21(&kb, forms, &corr, &quad);
    Ok(NormalFormReport {
        result: branch_coefficients(&kb, g),
        truncation: cfg.truncation,
        n_r: quad.n_r(),
        n_theta: quad.n_theta(),
        pairing_error: kb.pairing_error(&quad, cfg.time_nodes),
        w20_residual: corr.w20_residual,
        w11_residual: corr.w11_residual,
        kernel_leak_w11: corr.kernel_leak.0,
        kernel_leak_w20: corr.kernel_leak.1,
    })
}

/// Which branch the O(2) normal form predicts to be stable when both
/// bifurcate supercritically: with a = c_RW, a + b = c_SW (c = g21/2),
/// rotating waves are stable iff Re(b − a) < 0.
pub fn predicted_stable_branch(rotating: &NormalFormResult, standing: &NormalFormResult) -> Option<Branch> {
    let a = rotating.g21 / 2.0;
    let b = standing.g21 / 2.0 - a;
    let crit = (b - a).re;
    if crit < 0.0 && a.re < 0.0 {
        Some(Branch::RotatingCcw)
    } else if crit > 0.0 && (a + b).re < 0.0 {
        Some(Branch::Standing)
    } else {
        None
    }
}

/// ∫_0^R r J_n(βr/R)^4 dr N⁴ · 2π: the value of ⟨|Φ₊|²Φ₊, Φ₊⟩.
pub fn quartic_overlap(mode: &EigenMode, nodes: usize) -> f64 {
    let h = mode.radius / nodes as f64;
    let f = |r: f64| r * mode.radial(r).powi(4);
    // composite Simpson
    let mut s = f(0.0) + f(mode.radius);
    for i in 1..nodes {
        let c = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += c * f(i as f64 * h);
    }
    2.0 * PI * mode.norm_exp().powi(4) * s * h / 3.0
}
