#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use taxis_hopf::model::{steady_state, ModelParams};
use taxis_hopf::simulator::{snap_dt, Field, InitialHistory, PolarGrid, Scheme, Source, Stepper};

pub fn case1() -> ModelParams {
    ModelParams { d1: 0.1, d2: 0.2, chi: 0.38, k: 6.0, alpha: 1.0, d: 0.8, tau: 9.88, radius: 10.0 }
}

pub fn case2() -> ModelParams {
    ModelParams { chi: 0.46, tau: 9.6, ..case1() }
}

/// J_n(x) from the integral over one full period, (1/2π)∮cos(nt − x sin t)dt,
/// with the trapezoid rule (exponentially accurate for periodic integrands).
pub fn oracle_j(n: u32, x: f64) -> f64 {
    let m = 400;
    let h = 2.0 * PI / m as f64;
    (0..m).map(|k| (n as f64 * k as f64 * h - x * (k as f64 * h).sin()).cos()).sum::<f64>() / m as f64
}

/// J_n′(x) = (1/2π)∮ sin t · sin(nt − x sin t) dt.
pub fn oracle_jprime(n: u32, x: f64) -> f64 {
    let m = 400;
    let h = 2.0 * PI / m as f64;
    (0..m)
        .map(|k| {
            let t = k as f64 * h;
            t.sin() * (n as f64 * t - x * t.sin()).sin()
        })
        .sum::<f64>()
        / m as f64
}

/// First `count` positive zeros of J_n′ by scanning and plain bisection.
pub fn oracle_jprime_zeros(n: u32, count: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let step = 0.05;
    let mut a = 0.01 + n as f64 * 0.5;
    let mut fa = oracle_jprime(n, a);
    while out.len() < count {
        let b = a + step;
        let fb = oracle_jprime(n, b);
        if fa * fb < 0.0 {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let fm = oracle_jprime(n, mid);
                if fm * flo > 0.0 {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    out
}

/// Relative L² norm of a − b weighted by cell area.
pub fn l2_diff(grid: &PolarGrid, a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).collect();
    grid.integrate(&d).sqrt()
}

/// Manufactured steady solution smooth at the pole with zero normal
/// derivative at r = R.
pub struct Manufactured {
    pub p: ModelParams,
    pub eps: f64,
    pub us: f64,
    pub vs: f64,
}

impl Manufactured {
    pub fn new(p: ModelParams, eps: f64) -> Self {
        let ss = steady_state(&p).unwrap();
        Self { p, eps, us: ss.u_star, vs: ss.v_star }
    }

    fn a(&self, r: f64) -> [f64; 3] {
        let r2 = self.p.radius * self.p.radius;
        [r - r.powi(3) / (3.0 * r2), 1.0 - r * r / r2, -2.0 * r / r2]
    }

    fn b(&self, r: f64) -> [f64; 3] {
        let r2 = self.p.radius * self.p.radius;
        [r * r / 2.0 - r.powi(4) / (4.0 * r2), r - r.powi(3) / r2, 1.0 - 3.0 * r * r / r2]
    }

    pub fn u(&self, r: f64, th: f64) -> f64 {
        self.us + self.eps * self.a(r)[0] * th.cos()
    }

    pub fn v(&self, r: f64, th: f64) -> f64 {
        self.vs + self.eps * self.b(r)[0] * (2.0 * th).cos()
    }

    /// Forcing that makes (u, v) a steady solution.
    pub fn forcing(&self, r: f64, th: f64) -> (f64, f64) {
        let p = &self.p;
        let e = self.eps;
        let [a, a1, a2] = self.a(r);
        let [b, b1, b2] = self.b(r);
        let (c1, s1, c2, s2) = (th.cos(), th.sin(), (2.0 * th).cos(), (2.0 * th).sin());
        let u = self.u(r, th);
        let v = self.v(r, th);
        let lap_u = e * (a2 + a1 / r - a / (r * r)) * c1;
        let lap_v = e * (b2 + b1 / r - 4.0 * b / (r * r)) * c2;
        let grad_dot = e * e * (a1 * c1 * b1 * c2 + (a * s1) * (2.0 * b * s2) / (r * r));
        let taxis = grad_dot + u * lap_v;
        let f = u * (1.0 - u / p.k) - p.alpha * u * v / (1.0 + u);
        let g = -p.d * v + p.alpha * u * v / (1.0 + u);
        (-(p.d1 * lap_u + p.chi * taxis + f), -(p.d2 * lap_v + g))
    }

    /// Runs to `t_end` from the exact solution and returns the L² errors of
    /// u and v.
    pub fn error(&self, n_r: usize, n_theta: usize, dt: f64, t_end: f64) -> (f64, f64) {
        let grid = PolarGrid::new(n_r, n_theta, self.p.radius).unwrap();
        let exact = Field { u: grid.sample(|r, t| self.u(r, t)), v: grid.sample(|r, t| self.v(r, t)) };
        let hist = exact.clone();
        let me = Manufactured { ..*self };
        let src: Source = Arc::new(move |_, r, th| me.forcing(r, th));
        let mut st = Stepper::new(grid.clone(), self.p, Scheme::default(), dt, &move |_| hist.clone())
            .unwrap()
            .with_source(src);
        let steps = (t_end / st.dt).round() as i64;
        while st.step_index() < steps {
            st.step().unwrap();
        }
        (l2_diff(&grid, &st.state().u, &exact.u), l2_diff(&grid, &st.state().v, &exact.v))
    }
}

/// Largest step not exceeding τ/(n − 0.5), snapped to exactly τ/n.
pub fn dt_for(tau: f64, n: usize) -> f64 {
    let dt = tau / (n as f64 - 0.5);
    let (snapped, k) = snap_dt(tau, dt).unwrap();
    assert_eq!(k, n);
    snapped
}

/// Integrates from the history descriptor with a given step and returns the
/// final state.
pub fn integrate(p: &ModelParams, n_r: usize, n_theta: usize, dt: f64, t_end: f64, hist: &InitialHistory, scheme: Scheme) -> (PolarGrid, Field) {
    let ss = steady_state(p).unwrap();
    let grid = PolarGrid::new(n_r, n_theta, p.radius).unwrap();
    let h = hist.evaluator(&ss, &grid, 1).unwrap();
    let mut st = Stepper::new(grid.clone(), *p, scheme, dt, &*h).unwrap();
    let steps = (t_end / st.dt).round() as i64;
    while st.step_index() < steps {
        st.step().unwrap();
    }
    (grid, st.state().clone())
}
