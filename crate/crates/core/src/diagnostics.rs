//! Wave classification of simulated trajectories.
//!
//! Orientation: θ increases counterclockwise. A rotating wave
//! u = F(r, nθ − Ωt) with Ω > 0 has positive phase velocity Ω/n and is
//! counterclockwise; it satisfies u(r, θ + s/n, t + s/Ω) = u(r, θ, t).
//! A standing wave satisfies u(r, θ + π/n, t + T/2) = u(r, θ, t) and is
//! symmetric under reflection about its axes.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::{Frame, PolarGrid};

type C64 = Complex64;

/// Angular Fourier coefficients c_k of u − u*, averaged over a radius band
/// with weight r: c_k = Σ_i w_i (1/N) Σ_j (u_ij − u*) e^{−ikθ_j}.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularSpectrum {
    /// c_k for k = 0..=N/2; c_{−k} = conj(c_k).
    pub coeffs: Vec<C64>,
}

impl AngularSpectrum {
    pub fn get(&self, k: i64) -> C64 {
        let c = self.coeffs[k.unsigned_abs() as usize];
        if k < 0 {
            c.conj()
        } else {
            c
        }
    }

    pub fn power(&self, k: i64) -> f64 {
        self.get(k).norm_sqr()
    }
}

/// Per-ring angular coefficients c_k(r_i) for k = 0..=N/2.
pub fn ring_coefficients(grid: &PolarGrid, u: &[f64], u_star: f64, k: usize) -> Vec<C64> {
    let nt = grid.n_theta;
    let basis: Vec<C64> = grid.theta.iter().map(|&t| C64::from_polar(1.0 / nt as f64, -(k as f64) * t)).collect();
    (0..grid.n_r)
        .map(|i| {
            let row = &u[i * nt..(i + 1) * nt];
            row.iter().zip(&basis).map(|(&x, &b)| b * (x - u_star)).sum()
        })
        .collect()
}

fn band_weights(grid: &PolarGrid, band: (f64, f64)) -> Vec<f64> {
    let w: Vec<f64> = grid.r.iter().map(|&r| if r >= band.0 && r <= band.1 { r } else { 0.0 }).collect();
    let total: f64 = w.iter().sum();
    if total > 0.0 {
        w.iter().map(|x| x / total).collect()
    } else {
        w
    }
}

pub fn angular_spectrum(grid: &PolarGrid, u: &[f64], u_star: f64, band: (f64, f64)) -> AngularSpectrum {
    let w = band_weights(grid, band);
    let coeffs = (0..=grid.n_theta / 2)
        .map(|k| ring_coefficients(grid, u, u_star, k).iter().zip(&w).map(|(c, w)| c * w).sum())
        .collect();
    AngularSpectrum { coeffs }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WaveClass {
    RotatingCcw,
    RotatingCw,
    Standing,
    Other,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyThresholds {
    /// Maximum symmetry residual for the winning class.
    pub residual: f64,
    /// Maximum relative imbalance ||A₊| − |A₋|| / max for a standing wave.
    pub balance: f64,
    /// Maximum relative amplitude change per period.
    pub trend: f64,
    /// Maximum drift of the standing axes between window halves (radians).
    pub axis_drift: f64,
    /// Minimum number of periods in the window.
    pub min_periods: f64,
}

impl Default for ClassifyThresholds {
    fn default() -> Self {
        Self { residual: 0.05, balance: 0.10, trend: 0.01, axis_drift: 0.05, min_periods: 3.0 }
    }
}

/// A space–time transformation u(r, θ, t) ↦ u(r, σθ + φ, t + s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Relation {
    pub reflect: bool,
    pub angle: f64,
    pub time_shift: f64,
}

impl Relation {
    pub const IDENTITY: Relation = Relation { reflect: false, angle: 0.0, time_shift: 0.0 };

    pub fn rotation(angle: f64, time_shift: f64) -> Self {
        Self { reflect: false, angle, time_shift }
    }

    /// θ ↦ 2φ − θ (reflection about the axis at angle φ).
    pub fn reflection(axis: f64, time_shift: f64) -> Self {
        Self { reflect: true, angle: 2.0 * axis, time_shift }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub name: String,
    pub relation: Relation,
    /// Angle actually applied (nearest grid multiple).
    pub applied_angle: f64,
    pub residual: f64,
}

/// Linear interpolation of u in time; `None` outside the frame range.
fn interp_u(frames: &[Frame], t: f64) -> Option<Vec<f64>> {
    let first = frames.first()?.time;
    let last = frames.last()?.time;
    let eps = 1e-9 * (1.0 + last.abs());
    if t < first - eps || t > last + eps {
        return None;
    }
    let idx = frames.partition_point(|f| f.time <= t);
    if idx == 0 {
        return Some(frames[0].field.u.clone());
    }
    if idx >= frames.len() {
        return Some(frames[frames.len() - 1].field.u.clone());
    }
    let (a, b) = (&frames[idx - 1], &frames[idx]);
    let w = (t - a.time) / (b.time - a.time);
    if w == 0.0 {
        return Some(a.field.u.clone());
    }
    Some(a.field.u.iter().zip(&b.field.u).map(|(x, y)| (1.0 - w) * x + w * y).collect())
}

/// ‖u(σθ + φ, t + s) − u(θ, t)‖ / ‖u − u*‖ over the frames for which t + s
/// lies in the window. The angle is rounded to the nearest grid multiple.
pub fn symmetry_residual(grid: &PolarGrid, frames: &[Frame], u_star: f64, rel: Relation) -> ResidualReport {
    let nt = grid.n_theta as i64;
    let shift = (rel.angle / grid.dtheta).round() as i64;
    let applied_angle = shift as f64 * grid.dtheta;
    let parts: Vec<(f64, f64)> = frames
        .par_iter()
        .filter_map(|f| {
            let other = interp_u(frames, f.time + rel.time_shift)?;
            let mut num = 0.0;
            let mut den = 0.0;
            for i in 0..grid.n_r {
                let w = grid.r[i];
                for j in 0..grid.n_theta {
                    let jj = if rel.reflect { -(j as i64) + shift } else { j as i64 + shift };
                    let src = i * grid.n_theta + jj.rem_euclid(nt) as usize;
                    let here = f.field.u[i * grid.n_theta + j];
                    num += w * (other[src] - here).powi(2);
                    den += w * (here - u_star).powi(2);
                }
            }
            Some((num, den))
        })
        .collect();
    let (num, den) = parts.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let residual = if den > 0.0 { (num / den).sqrt() } else if num == 0.0 { 0.0 } else { f64::INFINITY };
    ResidualReport { name: String::new(), relation: rel, applied_angle, residual }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveReport {
    pub class: WaveClass,
    pub n: u32,
    /// Temporal frequency Ω > 0 of the dominant angular coefficient.
    pub omega: f64,
    pub period: f64,
    /// Angular phase velocity (positive: counterclockwise).
    pub phase_velocity: f64,
    /// Reflection-symmetry axes in [0, π) for standing waves.
    pub axes: Vec<f64>,
    /// ||A₊| − |A₋|| / max(|A₊|, |A₋|)
    pub balance: f64,
    /// Relative amplitude change per period.
    pub trend: f64,
    /// RMS L² deviation of u from u* per unit area.
    pub amplitude: f64,
    pub residuals: Vec<ResidualReport>,
    pub note: String,
}

/// Least-squares fit c(t) ≈ A₊e^{iΩt} + A₋e^{−iΩt} + A₀ for each ring.
fn fit_rings(series: &[Vec<C64>], times: &[f64], omega: f64) -> Vec<[C64; 3]> {
    let basis: Vec<[C64; 3]> = times
        .iter()
        .map(|&t| [C64::from_polar(1.0, omega * t), C64::from_polar(1.0, -omega * t), C64::from(1.0)])
        .collect();
    // normal matrix G = Σ conj(b) bᵀ
    let mut g = [[C64::from(0.0); 3]; 3];
    for b in &basis {
        for p in 0..3 {
            for q in 0..3 {
                g[p][q] += b[p].conj() * b[q];
            }
        }
    }
    series
        .iter()
        .map(|ring| {
            let mut rhs = [C64::from(0.0); 3];
            for (b, c) in basis.iter().zip(ring) {
                for p in 0..3 {
                    rhs[p] += b[p].conj() * c;
                }
            }
            solve3(g, rhs)
        })
        .collect()
}

fn solve3(mut a: [[C64; 3]; 3], mut b: [C64; 3]) -> [C64; 3] {
    for col in 0..3 {
        let piv = (col..3).max_by(|&x, &y| a[x][col].norm().total_cmp(&a[y][col].norm())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        let d = a[col][col];
        if d.norm() == 0.0 {
            continue;
        }
        for row in col + 1..3 {
            let f = a[row][col] / d;
            for k in col..3 {
                let v = a[col][k];
                a[row][k] -= f * v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut x = [C64::from(0.0); 3];
    for row in (0..3).rev() {
        let mut s = b[row];
        for k in row + 1..3 {
            s -= a[row][k] * x[k];
        }
        x[row] = if a[row][row].norm() == 0.0 { C64::from(0.0) } else { s / a[row][row] };
    }
    x
}

/// Σ_i w_i (|Σ_t c_i(t) e^{−iΩt}|² + |Σ_t c_i(t) e^{iΩt}|²)
fn periodogram(series: &[Vec<C64>], w: &[f64], times: &[f64], omega: f64) -> f64 {
    let ph: Vec<C64> = times.iter().map(|&t| C64::from_polar(1.0, -omega * t)).collect();
    series
        .iter()
        .zip(w)
        .map(|(ring, wi)| {
            let a: C64 = ring.iter().zip(&ph).map(|(c, p)| c * p).sum();
            let b: C64 = ring.iter().zip(&ph).map(|(c, p)| c * p.conj()).sum();
            wi * (a.norm_sqr() + b.norm_sqr())
        })
        .sum()
}

const SIGMA: [f64; 3] = [1.0, -1.0, 0.0];

/// Derivative in Ω of the energy explained by the three-term fit,
/// E(Ω) = Σ_i w_i b_iᴴ G⁻¹ b_i.
fn explained_slope(series: &[Vec<C64>], w: &[f64], times: &[f64], omega: f64) -> f64 {
    let zero = C64::from(0.0);
    let mut g = [[zero; 3]; 3];
    let mut gp = [[zero; 3]; 3];
    for &t in times {
        for p in 0..3 {
            for q in 0..3 {
                let s = SIGMA[q] - SIGMA[p];
                let e = C64::from_polar(1.0, s * omega * t);
                g[p][q] += e;
                gp[p][q] += C64::new(0.0, s * t) * e;
            }
        }
    }
    let ph: Vec<[C64; 3]> = times.iter().map(|&t| SIGMA.map(|s| C64::from_polar(1.0, -s * omega * t))).collect();
    series
        .iter()
        .zip(w)
        .map(|(ring, wi)| {
            let mut b = [zero; 3];
            let mut bp = [zero; 3];
            for ((c, e), &t) in ring.iter().zip(&ph).zip(times) {
                for p in 0..3 {
                    b[p] += e[p] * c;
                    bp[p] += C64::new(0.0, -SIGMA[p] * t) * e[p] * c;
                }
            }
            let x = solve3(g, b);
            let mut s = 0.0;
            for p in 0..3 {
                s += 2.0 * (bp[p].conj() * x[p]).re;
                for q in 0..3 {
                    s -= (x[p].conj() * gp[p][q] * x[q]).re;
                }
            }
            wi * s
        })
        .sum()
}

/// Dominant frequency Ω > 0 of the ring series: coarse two-sided periodogram
/// scan, then the stationary point of the least-squares explained energy.
fn dominant_frequency(series: &[Vec<C64>], w: &[f64], times: &[f64]) -> f64 {
    let span = times[times.len() - 1] - times[0];
    let dt = span / (times.len() - 1) as f64;
    let lo = 2.0 * PI / span;
    let hi = PI / dt;
    let step = lo / 8.0;
    let count = ((hi - lo) / step).floor() as usize;
    let best = (0..=count)
        .into_par_iter()
        .map(|k| {
            let om = lo + k as f64 * step;
            (om, periodogram(series, w, times, om))
        })
        .reduce(|| (0.0, -1.0), |a, b| if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a });
    let (mut a, mut b) = ((best.0 - step).max(0.5 * lo), best.0 + step);
    let (fa, fb) = (explained_slope(series, w, times, a), explained_slope(series, w, times, b));
    if !(fa > 0.0 && fb < 0.0) {
        return best.0;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if explained_slope(series, w, times, m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Transient length to discard: max(5 periods, 20τ).
pub fn transient_length(period: f64, tau: f64) -> f64 {
    (5.0 * period).max(20.0 * tau)
}

/// Classifies the frames (assumed already trimmed, equally spaced in time).
pub fn classify(grid: &PolarGrid, frames: &[Frame], u_star: f64, th: &ClassifyThresholds) -> Result<WaveReport> {
    if frames.len() < 8 {
        return Err(Error::Numerical(format!("need at least 8 frames, got {}", frames.len())));
    }
    let t0 = frames[0].time;
    let times: Vec<f64> = frames.iter().map(|f| f.time - t0).collect();
    let span = times[times.len() - 1];
    let area: f64 = PI * grid.radius * grid.radius;
    let amplitude = (frames
        .iter()
        .map(|f| {
            let d: Vec<f64> = f.field.u.iter().map(|x| (x - u_star).powi(2)).collect();
            grid.integrate(&d) / area
        })
        .sum::<f64>()
        / frames.len() as f64)
        .sqrt();

    // dominant angular wavenumber by total power
    let half = grid.n_theta / 2;
    let w = band_weights(grid, (0.0, grid.radius));
    let power: Vec<f64> = (1..=half)
        .into_par_iter()
        .map(|k| {
            frames
                .iter()
                .map(|f| {
                    ring_coefficients(grid, &f.field.u, u_star, k)
                        .iter()
                        .zip(&w)
                        .map(|(c, wi)| wi * c.norm_sqr())
                        .sum::<f64>()
                })
                .sum::<f64>()
        })
        .collect();
    let (kmax, pmax) = power.iter().enumerate().fold((0, -1.0), |a, (k, &p)| if p > a.1 { (k, p) } else { a });
    let n = (kmax + 1) as u32;
    let mut report = WaveReport {
        class: WaveClass::Other,
        n,
        omega: 0.0,
        period: 0.0,
        phase_velocity: 0.0,
        axes: Vec::new(),
        balance: f64::NAN,
        trend: f64::NAN,
        amplitude,
        residuals: Vec::new(),
        note: String::new(),
    };
    if !(pmax > 0.0) {
        report.class = WaveClass::Inconclusive;
        report.note = "no angular structure (u − u* has no non-axisymmetric power)".into();
        return Ok(report);
    }

    // ring series of the dominant coefficient
    let nr = grid.n_r;
    let mut series = vec![Vec::with_capacity(frames.len()); nr];
    for f in frames {
        for (i, c) in ring_coefficients(grid, &f.field.u, u_star, n as usize).into_iter().enumerate() {
            series[i].push(c);
        }
    }
    let omega = dominant_frequency(&series, &w, &times);
    let period = 2.0 * PI / omega;
    report.omega = omega;
    report.period = period;

    let fits = fit_rings(&series, &times, omega);
    let norm = |k: usize| fits.iter().zip(&w).map(|(f, wi)| wi * f[k].norm_sqr()).sum::<f64>().sqrt();
    let (ap, am) = (norm(0), norm(1));
    report.balance = (ap - am).abs() / ap.max(am);

    // amplitude trend: RMS of c_n per whole period, linear regression
    let periods = (span / period).floor() as usize;
    if (span / period) < th.min_periods {
        report.class = WaveClass::Inconclusive;
        report.note = format!("window spans {:.2} periods (< {})", span / period, th.min_periods);
        return Ok(report);
    }
    let rms: Vec<f64> = (0..periods)
        .map(|p| {
            let (a, b) = (p as f64 * period, (p + 1) as f64 * period);
            let vals: Vec<f64> = times
                .iter()
                .enumerate()
                .filter(|(_, &t)| t >= a && t < b)
                .map(|(k, _)| series.iter().zip(&w).map(|(s, wi)| wi * s[k].norm_sqr()).sum::<f64>())
                .collect();
            (vals.iter().sum::<f64>() / vals.len().max(1) as f64).sqrt()
        })
        .collect();
    let mean = rms.iter().sum::<f64>() / rms.len() as f64;
    let trend = if rms.len() >= 2 {
        let xm = (rms.len() - 1) as f64 / 2.0;
        let sxy: f64 = rms.iter().enumerate().map(|(k, y)| (k as f64 - xm) * (y - mean)).sum();
        let sxx: f64 = (0..rms.len()).map(|k| (k as f64 - xm).powi(2)).sum();
        (sxy / sxx) / mean
    } else {
        0.0
    };
    report.trend = trend;

    // residuals
    let nf = n as f64;
    let k_steps = ((0.25 * period * omega / nf) / grid.dtheta).round().max(1.0);
    let rot_angle = k_steps * grid.dtheta;
    let rot_time = rot_angle * nf / omega;
    let mut push = |name: &str, rel: Relation| {
        let mut r = symmetry_residual(grid, frames, u_star, rel);
        r.name = name.to_string();
        report.residuals.push(r.clone());
        r.residual
    };
    let res_ccw = push("rotating-ccw", Relation::rotation(rot_angle, rot_time));
    let res_cw = push("rotating-cw", Relation::rotation(rot_angle, -rot_time));
    let res_half = push("standing-half-period", Relation::rotation(PI / nf, period / 2.0));

    // standing axes from arg(A₊A₋) = −2nφ (mod 2π)
    let axis_of = |fs: &[[C64; 3]]| {
        let s: C64 = fs.iter().zip(&w).map(|(f, wi)| wi * f[0] * f[1]).sum();
        (-s.arg() / (2.0 * nf)).rem_euclid(PI / nf)
    };
    let phi = axis_of(&fits);
    let res_refl = push("standing-reflection", Relation::reflection(phi, 0.0));
    let res_refl_half = push("standing-reflection-half-period", Relation::reflection(phi - PI / (2.0 * nf), period / 2.0));
    let _ = res_refl_half;

    let half_len = frames.len() / 2;
    let drift = {
        let sub = |lo: usize, hi: usize| fit_rings(
            &series.iter().map(|s| s[lo..hi].to_vec()).collect::<Vec<_>>(),
            &times[lo..hi],
            omega,
        );
        let a = axis_of(&sub(0, half_len));
        let b = axis_of(&sub(half_len, frames.len()));
        let p = PI / nf;
        let d = (a - b).rem_euclid(p);
        d.min(p - d)
    };

    if trend.abs() > th.trend {
        report.class = WaveClass::Inconclusive;
        report.note = format!("amplitude trend {:.3e} per period exceeds {}", trend, th.trend);
        return Ok(report);
    }
    if report.balance < th.balance && res_half < th.residual && drift < th.axis_drift {
        report.class = WaveClass::Standing;
        report.axes = (0..n).map(|k| (phi + k as f64 * PI / nf).rem_euclid(PI)).collect();
        report.axes.sort_by(f64::total_cmp);
        report.note = format!("reflection residual {res_refl:.3e}, axis drift {drift:.3e}");
    } else if am > ap && res_ccw < th.residual && res_ccw <= res_cw {
        // A₋ ↔ e^{−iΩt} e^{inθ}: u = F(nθ − Ωt)
        report.class = WaveClass::RotatingCcw;
        report.phase_velocity = omega / nf;
    } else if ap > am && res_cw < th.residual && res_cw <= res_ccw {
        report.class = WaveClass::RotatingCw;
        report.phase_velocity = -omega / nf;
    } else {
        report.note = format!(
            "balance {:.3}, residuals ccw {:.3e} cw {:.3e} half-period {:.3e}",
            report.balance, res_ccw, res_cw, res_half
        );
    }
    Ok(report)
}
