//! SBDF2 IMEX stepping with ADI-factored implicit diffusion.
//!
//! With δ = q^{n+1} − q^n and L = D(L_r + r⁻²∂θθ), the step solves
//!   (2/3)(3/2 − ΔtDL_r)(3/2 − ΔtDr⁻²∂θθ) δ = ½(q^n − q^{n−1}) + Δt(Lq^n + 2E^n − E^{n−1}),
//! where E holds reaction, taxis and any source term. The first step (and
//! any retried step) uses IMEX Euler in the same delta form.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::angular::Circulant;
use super::grid::{Field, PolarGrid};
use super::history::HistoryRing;
use crate::error::{Error, Result};
use crate::model::{predator_kinetics, prey_kinetics, ModelParams};

/// Face value of u in the radial taxis flux.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaceRule {
    Central,
    Upwind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scheme {
    pub taxis_face: FaceRule,
    pub reaction: bool,
    pub taxis: bool,
    pub diffusion: bool,
    /// Step-halving retries after a rejected step.
    pub max_retries: u32,
}

impl Default for Scheme {
    fn default() -> Self {
        Self { taxis_face: FaceRule::Central, reaction: true, taxis: true, diffusion: true, max_retries: 4 }
    }
}

/// Extra source term S(t, r, θ) = (S_u, S_v) added to the explicit part.
pub type Source = Arc<dyn Fn(f64, f64, f64) -> (f64, f64) + Send + Sync>;

/// Values below this are treated as a failed step.
pub const NEGATIVE_TOLERANCE: f64 = -1e-8;

#[derive(Debug, Clone)]
struct Thomas {
    lower: Vec<f64>,
    cprime: Vec<f64>,
    inv: Vec<f64>,
}

impl Thomas {
    /// Factorises α − β L_r on the grid's radial cells.
    fn new(grid: &PolarGrid, alpha: f64, beta: f64) -> Self {
        let n = grid.n_r;
        let h2 = grid.dr * grid.dr;
        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        for i in 0..n {
            let (wm, wp) = face_weights(grid, i);
            let s = beta / (grid.r[i] * h2);
            lower[i] = -s * wm;
            upper[i] = -s * wp;
            diag[i] = alpha + s * (wm + wp);
        }
        let mut cprime = vec![0.0; n];
        let mut inv = vec![0.0; n];
        for i in 0..n {
            let denom = if i == 0 { diag[0] } else { diag[i] - lower[i] * cprime[i - 1] };
            inv[i] = 1.0 / denom;
            cprime[i] = upper[i] * inv[i];
        }
        Self { lower, cprime, inv }
    }

    /// In-place solve for every angular column of an r-major array.
    fn solve(&self, x: &mut [f64], nt: usize) {
        let n = self.inv.len();
        for j in 0..nt {
            x[j] *= self.inv[0];
        }
        for i in 1..n {
            let (a, inv) = (self.lower[i], self.inv[i]);
            let (head, tail) = x.split_at_mut(i * nt);
            let prev = &head[(i - 1) * nt..];
            for j in 0..nt {
                tail[j] = (tail[j] - a * prev[j]) * inv;
            }
        }
        for i in (0..n - 1).rev() {
            let c = self.cprime[i];
            let (head, tail) = x.split_at_mut((i + 1) * nt);
            let row = &mut head[i * nt..];
            for j in 0..nt {
                row[j] -= c * tail[j];
            }
        }
    }
}

/// (r_{i−½}, r_{i+½}) with zero weight at the pole and at the Neumann rim.
#[inline]
fn face_weights(grid: &PolarGrid, i: usize) -> (f64, f64) {
    let wm = grid.r_face[i];
    let wp = if i + 1 < grid.n_r { grid.r_face[i + 1] } else { 0.0 };
    (wm, wp)
}

/// Factored solver for one α: δ = α (α − ΔtD r⁻²∂θθ)⁻¹ (α − ΔtD L_r)⁻¹ rhs.
#[derive(Debug, Clone)]
struct Implicit {
    alpha: f64,
    radial: [Thomas; 2],
    angular: [Vec<Circulant>; 2],
}

impl Implicit {
    fn new(grid: &PolarGrid, alpha: f64, dt: f64, diff: [f64; 2]) -> Self {
        let radial = [Thomas::new(grid, alpha, dt * diff[0]), Thomas::new(grid, alpha, dt * diff[1])];
        let ang = |d: f64| {
            grid.r
                .iter()
                .map(|&r| Circulant::helmholtz_inverse(grid.n_theta, alpha, dt * d / (r * r)))
                .collect()
        };
        Self { alpha, radial, angular: [ang(diff[0]), ang(diff[1])] }
    }

    fn solve(&self, grid: &PolarGrid, rhs: &mut Field) {
        let nt = grid.n_theta;
        for (s, q) in [&mut rhs.u, &mut rhs.v].into_iter().enumerate() {
            self.radial[s].solve(q, nt);
            let kernels = &self.angular[s];
            let alpha = self.alpha;
            q.par_chunks_mut(nt).enumerate().for_each_init(
                || (Vec::with_capacity(2 * nt), vec![0.0; nt]),
                |(ext, tmp), (i, row)| {
                    kernels[i].apply(row, tmp, ext);
                    for (dst, src) in row.iter_mut().zip(tmp.iter()) {
                        *dst = alpha * src;
                    }
                },
            );
        }
    }
}

/// Time integrator state.
pub struct Stepper {
    pub grid: PolarGrid,
    pub params: ModelParams,
    pub scheme: Scheme,
    pub dt: f64,
    pub n_tau: usize,
    d1: Circulant,
    d2: Circulant,
    diff: [f64; 2],
    euler: Implicit,
    sbdf: Implicit,
    source: Option<Source>,
    step: i64,
    cur: Field,
    prev: Option<(Field, Field)>,
    ring: HistoryRing,
    retries: u64,
}

/// Δt snapped so that τ is an integer number of steps: (Δt, Nτ).
pub fn snap_dt(tau: f64, dt: f64) -> Result<(f64, usize)> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Config(format!("dt must be > 0, got {dt}")));
    }
    if tau == 0.0 {
        return Ok((dt, 0));
    }
    let n = (tau / dt).ceil().max(1.0) as usize;
    Ok((tau / n as f64, n))
}

impl Stepper {
    pub fn new(
        grid: PolarGrid,
        params: ModelParams,
        scheme: Scheme,
        dt: f64,
        history: &dyn Fn(f64) -> Field,
    ) -> Result<Self> {
        params.validate()?;
        let (dt, n_tau) = snap_dt(params.tau, dt)?;
        let diff = if scheme.diffusion { [params.d1, params.d2] } else { [0.0, 0.0] };
        let ring = HistoryRing::fill(n_tau, dt, history);
        let cur = history(0.0);
        if cur.len() != grid.len() {
            return Err(Error::GridMismatch(format!("history has {} cells, grid {}", cur.len(), grid.len())));
        }
        Ok(Self {
            d1: Circulant::d1(grid.n_theta),
            d2: Circulant::d2(grid.n_theta),
            euler: Implicit::new(&grid, 1.0, dt, diff),
            sbdf: Implicit::new(&grid, 1.5, dt, diff),
            grid,
            params,
            scheme,
            dt,
            n_tau,
            diff,
            source: None,
            step: 0,
            cur,
            prev: None,
            ring,
            retries: 0,
        })
    }

    pub fn with_source(mut self, source: Source) -> Self {
        self.source = Some(source);
        self
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn step_index(&self) -> i64 {
        self.step
    }

    pub fn state(&self) -> &Field {
        &self.cur
    }

    /// Number of steps that needed the halving fallback.
    pub fn retries(&self) -> u64 {
        self.retries
    }

    /// Reaction + taxis + source at time t.
    pub fn explicit(&self, q: &Field, u_delayed: &[f64], t: f64) -> Field {
        let g = &self.grid;
        let p = &self.params;
        let nt = g.n_theta;
        let chi = if self.scheme.taxis { p.chi } else { 0.0 };
        let mut out = Field::zeros(g.len());
        let (ou, ov) = (&mut out.u, &mut out.v);
        ou.par_chunks_mut(nt).zip(ov.par_chunks_mut(nt)).enumerate().for_each_init(
            || (Vec::with_capacity(2 * nt), vec![0.0; nt], vec![0.0; nt]),
            |(ext, a, b), (i, (eu, ev))| {
                let row = i * nt;
                let uu = &q.u[row..row + nt];
                let vv = &q.v[row..row + nt];
                if self.scheme.reaction {
                    let ud = &u_delayed[row..row + nt];
                    for j in 0..nt {
                        eu[j] = prey_kinetics(p, uu[j], vv[j]);
                        ev[j] = predator_kinetics(p, ud[j], vv[j]);
                    }
                }
                if chi != 0.0 {
                    self.radial_taxis(q, i, chi, eu);
                    // χ r⁻² ∂θ(u ∂θ v)
                    self.d1.apply(vv, a, ext);
                    for j in 0..nt {
                        a[j] *= uu[j];
                    }
                    self.d1.apply(a, b, ext);
                    let s = chi / (g.r[i] * g.r[i]);
                    for j in 0..nt {
                        eu[j] += s * b[j];
                    }
                }
                if let Some(src) = &self.source {
                    let r = g.r[i];
                    for j in 0..nt {
                        let (su, sv) = src(t, r, g.theta[j]);
                        eu[j] += su;
                        ev[j] += sv;
                    }
                }
            },
        );
        out
    }

    /// Adds χ (1/r)∂r(r u ∂r v) for ring i to `eu`.
    fn radial_taxis(&self, q: &Field, i: usize, chi: f64, eu: &mut [f64]) {
        let g = &self.grid;
        let nt = g.n_theta;
        let h = g.dr;
        let scale = chi / (g.r[i] * h * h);
        let face = |lo: usize, hi: usize, j: usize| -> f64 {
            let (ul, uh) = (q.u[lo * nt + j], q.u[hi * nt + j]);
            let dv = q.v[hi * nt + j] - q.v[lo * nt + j];
            let uf = match self.scheme.taxis_face {
                FaceRule::Central => 0.5 * (ul + uh),
                // transport velocity −χ∂r v
                FaceRule::Upwind => {
                    if dv < 0.0 {
                        ul
                    } else {
                        uh
                    }
                }
            };
            uf * dv
        };
        let (wm, wp) = face_weights(g, i);
        for j in 0..nt {
            let mut flux = 0.0;
            if wp != 0.0 {
                flux += wp * face(i, i + 1, j);
            }
            if wm != 0.0 {
                flux -= wm * face(i - 1, i, j);
            }
            eu[j] += scale * flux;
        }
    }

    /// D(L_r + r⁻²∂θθ) q for both species.
    pub fn diffusion(&self, q: &Field) -> Field {
        let g = &self.grid;
        let nt = g.n_theta;
        let mut out = Field::zeros(g.len());
        for (s, (src, dst)) in [(&q.u, &mut out.u), (&q.v, &mut out.v)].into_iter().enumerate() {
            let d = self.diff[s];
            if d == 0.0 {
                continue;
            }
            dst.par_chunks_mut(nt).enumerate().for_each_init(
                || (Vec::with_capacity(2 * nt), vec![0.0; nt]),
                |(ext, tmp), (i, row)| {
                    let (wm, wp) = face_weights(g, i);
                    let sr = d / (g.r[i] * g.dr * g.dr);
                    let base = i * nt;
                    for j in 0..nt {
                        let c = src[base + j];
                        let mut acc = 0.0;
                        if wp != 0.0 {
                            acc += wp * (src[base + nt + j] - c);
                        }
                        if wm != 0.0 {
                            acc -= wm * (c - src[base - nt + j]);
                        }
                        row[j] = sr * acc;
                    }
                    self.d2.apply(&src[base..base + nt], tmp, ext);
                    let sa = d / (g.r[i] * g.r[i]);
                    for j in 0..nt {
                        row[j] += sa * tmp[j];
                    }
                },
            );
        }
        out
    }

    fn acceptable(q: &Field) -> bool {
        q.is_finite() && q.min() >= NEGATIVE_TOLERANCE
    }

    /// Advances one step of Δt.
    pub fn step(&mut self) -> Result<()> {
        let t = self.time();
        let e = self.explicit(&self.cur, self.ring.delayed(), t);
        let lq = self.diffusion(&self.cur);
        let dt = self.dt;
        let len = self.grid.len();
        let mut rhs = Field::zeros(len);
        let solver = match &self.prev {
            None => {
                for k in 0..len {
                    rhs.u[k] = dt * (lq.u[k] + e.u[k]);
                    rhs.v[k] = dt * (lq.v[k] + e.v[k]);
                }
                &self.euler
            }
            Some((qp, ep)) => {
                for k in 0..len {
                    rhs.u[k] = 0.5 * (self.cur.u[k] - qp.u[k]) + dt * (lq.u[k] + 2.0 * e.u[k] - ep.u[k]);
                    rhs.v[k] = 0.5 * (self.cur.v[k] - qp.v[k]) + dt * (lq.v[k] + 2.0 * e.v[k] - ep.v[k]);
                }
                &self.sbdf
            }
        };
        solver.solve(&self.grid, &mut rhs);
        let mut next = rhs;
        for k in 0..len {
            next.u[k] += self.cur.u[k];
            next.v[k] += self.cur.v[k];
        }
        if Self::acceptable(&next) {
            let old = std::mem::replace(&mut self.cur, next);
            self.prev = Some((old, e));
        } else {
            self.cur = self.fallback(t)?;
            self.prev = None;
            self.retries += 1;
        }
        self.ring.push(&self.cur.u);
        self.step += 1;
        Ok(())
    }

    /// Retries the step as 2^k IMEX Euler substeps, interpolating the delayed
    /// prey density linearly between stored frames.
    fn fallback(&self, t: f64) -> Result<Field> {
        let base = self.step - self.n_tau as i64;
        let (d0, d1) = if self.n_tau == 0 {
            (self.ring.at(base), self.ring.at(base))
        } else {
            (self.ring.at(base), self.ring.at(base + 1))
        };
        let mut last = String::from("no retries allowed");
        for k in 1..=self.scheme.max_retries {
            let parts = 1usize << k;
            let h = self.dt / parts as f64;
            let solver = Implicit::new(&self.grid, 1.0, h, self.diff);
            let mut q = self.cur.clone();
            let mut ok = true;
            for s in 0..parts {
                let w = s as f64 / parts as f64;
                let ud: Vec<f64> = if self.n_tau == 0 {
                    q.u.clone()
                } else {
                    d0.iter().zip(d1).map(|(a, b)| (1.0 - w) * a + w * b).collect()
                };
                let e = self.explicit(&q, &ud, t + s as f64 * h);
                let lq = self.diffusion(&q);
                let mut rhs = Field::zeros(q.len());
                for i in 0..q.len() {
                    rhs.u[i] = h * (lq.u[i] + e.u[i]);
                    rhs.v[i] = h * (lq.v[i] + e.v[i]);
                }
                solver.solve(&self.grid, &mut rhs);
                for i in 0..q.len() {
                    q.u[i] += rhs.u[i];
                    q.v[i] += rhs.v[i];
                }
                if !Self::acceptable(&q) {
                    ok = false;
                    last = if q.is_finite() {
                        format!("negative density {:.3e} with {parts} substeps", q.min())
                    } else {
                        format!("non-finite state with {parts} substeps")
                    };
                    break;
                }
            }
            if ok {
                return Ok(q);
            }
        }
        Err(Error::Step { time: t, reason: last })
    }
}
