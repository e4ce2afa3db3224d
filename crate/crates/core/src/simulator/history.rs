use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::grid::{Field, PolarGrid};
use crate::error::{Error, Result};
use crate::model::SteadyState;
use crate::spectrum::eigenmode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AngularProfile {
    Cos(u32),
    Sin(u32),
}

impl AngularProfile {
    fn eval(self, theta: f64) -> f64 {
        match self {
            AngularProfile::Cos(n) => (n as f64 * theta).cos(),
            AngularProfile::Sin(n) => (n as f64 * theta).sin(),
        }
    }

    fn wavenumber(self) -> u32 {
        match self {
            AngularProfile::Cos(n) | AngularProfile::Sin(n) => n,
        }
    }
}

/// Initial data on [−τ, 0].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialHistory {
    /// (u*, v*)
    Steady,
    /// u*(1 + du), v*(1 + dv), constant in space and time.
    Uniform { du: f64, dv: f64 },
    /// u*(1 + a·cos t·cos(2πr/R)·P_u(θ)) and likewise for v.
    Pattern { u: AngularProfile, v: AngularProfile, amplitude: f64 },
    /// u*(1 + ξ), ξ i.i.d. uniform in [−a, a] per cell, constant in time.
    Random { amplitude: f64 },
    /// Re(a e^{γt} V N J_n(βr/R) e^{i·sign·nθ}) added to the steady state;
    /// sign 0 uses e^{inθ} + e^{−inθ}.
    Eigen { n: u32, m: usize, sign: i32, amplitude: f64, gamma: [f64; 2], vector: [[f64; 2]; 2] },
}

impl InitialHistory {
    /// Dominant angular wavenumber of the pattern, if any.
    pub fn wavenumber(&self) -> Option<u32> {
        match self {
            InitialHistory::Pattern { u, .. } => Some(u.wavenumber()),
            InitialHistory::Eigen { n, .. } => Some(*n),
            _ => None,
        }
    }

    /// History evaluator t ↦ Field for t ∈ [−τ, 0].
    pub fn evaluator(&self, ss: &SteadyState, grid: &PolarGrid, seed: u64) -> Result<HistoryFn> {
        let (us, vs) = (ss.u_star, ss.v_star);
        let len = grid.len();
        Ok(match self.clone() {
            InitialHistory::Steady => {
                let f = Field::constant(len, us, vs);
                Box::new(move |_| f.clone())
            }
            InitialHistory::Uniform { du, dv } => {
                let f = Field::constant(len, us * (1.0 + du), vs * (1.0 + dv));
                Box::new(move |_| f.clone())
            }
            InitialHistory::Pattern { u, v, amplitude } => {
                let radial = |r: f64| (2.0 * PI * r / grid.radius).cos();
                let pu = grid.sample(|r, t| radial(r) * u.eval(t));
                let pv = grid.sample(|r, t| radial(r) * v.eval(t));
                Box::new(move |t: f64| {
                    let c = amplitude * t.cos();
                    Field {
                        u: pu.iter().map(|p| us * (1.0 + c * p)).collect(),
                        v: pv.iter().map(|p| vs * (1.0 + c * p)).collect(),
                    }
                })
            }
            InitialHistory::Random { amplitude } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut f = Field::zeros(len);
                for k in 0..len {
                    f.u[k] = us * (1.0 + rng.gen_range(-amplitude..=amplitude));
                    f.v[k] = vs * (1.0 + rng.gen_range(-amplitude..=amplitude));
                }
                Box::new(move |_| f.clone())
            }
            InitialHistory::Eigen { n, m, sign, amplitude, gamma, vector } => {
                if n > 0 && m == 0 {
                    return Err(Error::Config(format!("eigen history needs m >= 1 for n = {n}")));
                }
                let mode = eigenmode(n, m, grid.radius)?;
                let spatial: Vec<Complex64> = {
                    let mut out = Vec::with_capacity(len);
                    for &r in &grid.r {
                        let rad = mode.norm_exp() * mode.radial(r);
                        for &t in &grid.theta {
                            let nt = n as f64 * t;
                            out.push(match sign {
                                0 if n > 0 => Complex64::from(2.0 * rad * nt.cos()),
                                _ => Complex64::from_polar(rad, sign.signum() as f64 * nt),
                            });
                        }
                    }
                    out
                };
                let g = Complex64::new(gamma[0], gamma[1]);
                let vu = Complex64::new(vector[0][0], vector[0][1]);
                let vv = Complex64::new(vector[1][0], vector[1][1]);
                Box::new(move |t: f64| {
                    let a = amplitude * (g * t).exp();
                    Field {
                        u: spatial.iter().map(|s| us + (a * vu * s).re).collect(),
                        v: spatial.iter().map(|s| vs + (a * vv * s).re).collect(),
                    }
                })
            }
        })
    }
}

pub type HistoryFn = Box<dyn Fn(f64) -> Field + Send + Sync>;

/// Prey frames for steps n − Nτ ..= n.
#[derive(Debug, Clone)]
pub struct HistoryRing {
    frames: Vec<Vec<f64>>,
    n_tau: usize,
    newest: i64,
}

impl HistoryRing {
    /// Fills steps −Nτ..=0 from the evaluator at t = kΔt.
    pub fn fill(n_tau: usize, dt: f64, history: &dyn Fn(f64) -> Field) -> Self {
        let mut frames = vec![Vec::new(); n_tau + 1];
        for k in -(n_tau as i64)..=0 {
            frames[Self::slot_of(k, n_tau)] = history(k as f64 * dt).u;
        }
        Self { frames, n_tau, newest: 0 }
    }

    fn slot_of(step: i64, n_tau: usize) -> usize {
        step.rem_euclid(n_tau as i64 + 1) as usize
    }

    pub fn n_tau(&self) -> usize {
        self.n_tau
    }

    /// Prey density stored for `step` (must lie in the retained window).
    pub fn at(&self, step: i64) -> &[f64] {
        debug_assert!(step <= self.newest && step >= self.newest - self.n_tau as i64);
        &self.frames[Self::slot_of(step, self.n_tau)]
    }

    /// u(t_n − τ) for the newest step n.
    pub fn delayed(&self) -> &[f64] {
        self.at(self.newest - self.n_tau as i64)
    }

    pub fn push(&mut self, u: &[f64]) {
        self.newest += 1;
        let slot = Self::slot_of(self.newest, self.n_tau);
        self.frames[slot].clear();
        self.frames[slot].extend_from_slice(u);
    }
}
