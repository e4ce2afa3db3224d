//! Small-amplitude eigenmode runs: measured growth exponents, onset
//! localization, and the empirical side of the bifurcating branch.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{run_with, InitialHistory, PolarGrid, Scheme, SimConfig};
use crate::error::{Error, Result};
use crate::lineal::{root_at_delay, CharCoeffs, HopfPoint};
use crate::model::{steady_state, ModelParams, SteadyState};
use crate::spectrum::{eigenmode, EigenMode};

type C64 = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub n_r: usize,
    pub n_theta: usize,
    pub dt: f64,
    /// Fit window [t_skip, t_end].
    pub t_skip: f64,
    pub t_end: f64,
    /// Initial amplitude relative to u*.
    pub amplitude: f64,
    pub sample_every: usize,
    pub scheme: Scheme,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            n_r: 64,
            n_theta: 128,
            dt: 0.1,
            t_skip: 20.0,
            t_end: 300.0,
            amplitude: 1e-6,
            sample_every: 5,
            scheme: Scheme::default(),
        }
    }
}

/// Discrete L² projection onto N J_n(βr/R) e^{i·sign·nθ} with midpoint weights.
#[derive(Debug, Clone)]
pub struct ModeProjector {
    weights: Vec<C64>,
    norm: f64,
}

impl ModeProjector {
    pub fn new(grid: &PolarGrid, mode: &EigenMode, sign: i32) -> Self {
        let mut weights = Vec::with_capacity(grid.len());
        let mut norm = 0.0;
        for i in 0..grid.n_r {
            let a = grid.cell_area(i);
            let rad = mode.norm_exp() * mode.radial(grid.r[i]);
            for &t in &grid.theta {
                let phi = C64::from_polar(rad, sign as f64 * mode.n as f64 * t);
                norm += a * phi.norm_sqr();
                weights.push(a * phi.conj());
            }
        }
        Self { weights, norm }
    }

    pub fn project(&self, u: &[f64], u_star: f64) -> C64 {
        self.weights.iter().zip(u).map(|(w, x)| w * (x - u_star)).sum::<C64>() / self.norm
    }
}

/// Splits the (u, v) coefficients of e^{inθ} into the two rotating parts of
/// the critical eigenspace: c = α(1, V₂) + β̄(1, V̄₂), with α ∝ e^{iωt}.
pub fn rotating_parts(cu: C64, cv: C64, v2: C64) -> (C64, C64) {
    let den = v2 - v2.conj();
    ((cv - v2.conj() * cu) / den, (v2 * cu - cv) / den)
}

/// Eigenvector (1, V₂) of the linearization for root γ:
/// (γ + d₂λ − a₂₂)V₂ = a₂₁e^{−γτ}. V₂ = 0 when the left factor vanishes.
pub fn eigenvector(p: &ModelParams, ss: &SteadyState, lambda: f64, gamma: C64) -> [C64; 2] {
    let den = gamma + p.d2 * lambda - ss.a22(p);
    let v2 = if den == C64::from(0.0) { C64::from(0.0) } else { ss.a21 * (-gamma * p.tau).exp() / den };
    [C64::from(1.0), v2]
}

/// History Re(a e^{γt} V Φ) with a = amplitude · u*.
pub fn eigen_history(
    p: &ModelParams,
    ss: &SteadyState,
    mode: &EigenMode,
    sign: i32,
    gamma: C64,
    amplitude: f64,
) -> InitialHistory {
    let v = eigenvector(p, ss, mode.lambda, gamma);
    InitialHistory::Eigen {
        n: mode.n,
        m: mode.m,
        sign,
        amplitude: amplitude * ss.u_star,
        gamma: [gamma.re, gamma.im],
        vector: [[v[0].re, v[0].im], [v[1].re, v[1].im]],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub n: u32,
    pub m: usize,
    pub tau: f64,
    pub gamma: C64,
    /// Growth factor of |projection| over the fit window.
    pub growth: f64,
    pub samples: usize,
}

/// Least-squares slope of y on x.
fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let xm = x.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let sxx: f64 = x.iter().map(|a| (a - xm).powi(2)).sum();
    sxy / sxx
}

/// Runs the simulator from an eigenmode history and records the u and v
/// projections (interleaved) onto each projector.
fn projected_run(
    p: &ModelParams,
    history: InitialHistory,
    projectors: &[ModeProjector],
    cfg: &ProbeConfig,
) -> Result<(Vec<f64>, Vec<Vec<C64>>)> {
    let ss = steady_state(p)?;
    let sim = SimConfig {
        n_r: cfg.n_r,
        n_theta: cfg.n_theta,
        dt: cfg.dt,
        t_end: cfg.t_end,
        output_every: cfg.sample_every,
        history,
        seed: 0,
        scheme: cfg.scheme,
    };
    let mut times = Vec::new();
    let mut proj = vec![Vec::new(); 2 * projectors.len()];
    run_with(&sim, p, |f| {
        if f.time >= cfg.t_skip {
            times.push(f.time);
            for (k, pr) in projectors.iter().enumerate() {
                proj[2 * k].push(pr.project(&f.field.u, ss.u_star));
                proj[2 * k + 1].push(pr.project(&f.field.v, ss.v_star));
            }
        }
        Ok(())
    })?;
    if times.len() < 4 {
        return Err(Error::Config("probe window holds fewer than 4 samples".into()));
    }
    Ok((times, proj))
}

/// Measured γ of mode (n, m) at delay `p.tau`, seeded with the lineal
/// eigenfunction for `gamma_seed`.
pub fn linear_growth_probe(p: &ModelParams, n: u32, m: usize, gamma_seed: C64, cfg: &ProbeConfig) -> Result<ProbeResult> {
    let ss = steady_state(p)?;
    let mode = eigenmode(n, m, p.radius)?;
    let grid = PolarGrid::new(cfg.n_r, cfg.n_theta, p.radius)?;
    let proj = ModeProjector::new(&grid, &mode, 1);
    let hist = eigen_history(p, &ss, &mode, 1, gamma_seed, cfg.amplitude);
    let (times, series) = projected_run(p, hist, &[proj], cfg)?;
    let s = &series[0];
    let growth = s[s.len() - 1].norm() / s[0].norm();
    let result = |gamma| ProbeResult { n, m, tau: p.tau, gamma, growth, samples: s.len() };
    if s.iter().all(|z| *z == s[0]) {
        return Ok(result(C64::from(0.0)));
    }
    if !(growth <= 10.0) {
        return Err(Error::Numerical(format!("probe amplitude grew {growth:.3e}x; fit rejected as nonlinear")));
    }
    let logs: Vec<f64> = s.iter().map(|z| z.norm().ln()).collect();
    let mut phase = Vec::with_capacity(s.len());
    let mut acc = s[0].arg();
    phase.push(acc);
    for w in s.windows(2) {
        acc += (w[1] / w[0]).arg();
        phase.push(acc);
    }
    Ok(result(C64::new(slope(&times, &logs), slope(&times, &phase))))
}

/// Probe at `tau` seeded with the lineal root tracked from the Hopf point.
pub fn probe_near_hopf(p: &ModelParams, hp: &HopfPoint, tau: f64, cfg: &ProbeConfig) -> Result<(ProbeResult, C64)> {
    let pt = p.with_tau(tau);
    let ss = steady_state(&pt)?;
    let mode = eigenmode(hp.n, hp.m, p.radius)?;
    let k = CharCoeffs::new(&pt, &ss, &mode);
    let predicted = root_at_delay(&k, hp, tau)?;
    Ok((linear_growth_probe(&pt, hp.n, hp.m, predicted, cfg)?, predicted))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnsetResult {
    pub n: u32,
    pub m: usize,
    pub tau_onset: f64,
    /// Final bracket.
    pub bracket: (f64, f64),
    /// (τ, measured Re γ) for every run.
    pub runs: Vec<(f64, f64)>,
}

/// Bisection on the sign of the measured growth of mode (n, m) over
/// [lo, hi]; stops when the bracket is narrower than `rel_tol`·mid.
pub fn locate_onset(
    p: &ModelParams,
    hp: &HopfPoint,
    (mut lo, mut hi): (f64, f64),
    rel_tol: f64,
    cfg: &ProbeConfig,
) -> Result<OnsetResult> {
    let mut runs = Vec::new();
    let rate = |tau: f64, runs: &mut Vec<(f64, f64)>| -> Result<f64> {
        let (r, _) = probe_near_hopf(p, hp, tau, cfg)?;
        runs.push((tau, r.gamma.re));
        Ok(r.gamma.re)
    };
    let (flo, fhi) = (rate(lo, &mut runs)?, rate(hi, &mut runs)?);
    if flo.signum() == fhi.signum() {
        return Err(Error::Numerical(format!("no sign change of growth on [{lo}, {hi}]: {flo:.3e}, {fhi:.3e}")));
    }
    while hi - lo > rel_tol * 0.5 * (hi + lo) {
        let mid = 0.5 * (lo + hi);
        let f = rate(mid, &mut runs)?;
        if f.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(OnsetResult { n: hp.n, m: hp.m, tau_onset: 0.5 * (lo + hi), bracket: (lo, hi), runs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchProbe {
    /// (mean squared projection amplitude, measured growth rate) per run.
    pub points: Vec<(f64, f64)>,
    /// d(rate)/d(amplitude²) at τ_c.
    pub kappa: f64,
    /// +1 when the periodic branch lies on τ > τ_c, −1 otherwise.
    pub side: i32,
}

/// Amplitude dependence of the growth rate at τ_c, measured on the
/// critical-eigenspace amplitude |α|² + |β|². `sign` selects the seeded
/// pattern: ±1 for e^{±inθ}, 0 for the standing combination.
pub fn branch_probe(p: &ModelParams, hp: &HopfPoint, sign: i32, amplitudes: &[f64], cfg: &ProbeConfig) -> Result<BranchProbe> {
    let pc = p.with_tau(hp.tau_c);
    let ss = steady_state(&pc)?;
    let mode = eigenmode(hp.n, hp.m, p.radius)?;
    let grid = PolarGrid::new(cfg.n_r, cfg.n_theta, p.radius)?;
    let projs = [ModeProjector::new(&grid, &mode, 1)];
    let gamma = C64::new(0.0, hp.omega);
    let v2 = eigenvector(&pc, &ss, mode.lambda, gamma)[1];
    let mut points = Vec::with_capacity(amplitudes.len());
    for &a in amplitudes {
        let hist = eigen_history(&pc, &ss, &mode, sign, gamma, a);
        let (times, series) = projected_run(&pc, hist, &projs, &ProbeConfig { amplitude: a, ..*cfg })?;
        let sq: Vec<f64> = (0..times.len())
            .map(|k| {
                let (a, b) = rotating_parts(series[0][k], series[1][k], v2);
                a.norm_sqr() + b.norm_sqr()
            })
            .collect();
        let logs: Vec<f64> = sq.iter().map(|x| 0.5 * x.ln()).collect();
        let mean = sq.iter().sum::<f64>() / sq.len() as f64;
        points.push((mean, slope(&times, &logs)));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let kappa = slope(&xs, &ys);
    let side = if -kappa / hp.transversality > 0.0 { 1 } else { -1 };
    Ok(BranchProbe { points, kappa, side })
}
