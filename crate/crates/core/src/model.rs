//! Rosenzweig–MacArthur kinetics with predator-taxis: parameters, the
//! positive constant steady state and the Taylor coefficients of the
//! reaction terms at that state.
//!
//! Prey:     u_t = d1 Δu + χ ∇·(u∇v) + f(u, v),   f = u(1 − u/K) − αuv/(1+u)
//! Predator: v_t = d2 Δv + g(u_τ, v),             g = −dv + α u_τ v/(1+u_τ)

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub d1: f64,
    pub d2: f64,
    pub chi: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub alpha: f64,
    pub d: f64,
    pub tau: f64,
    #[serde(rename = "R")]
    pub radius: f64,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("d1", self.d1),
            ("d2", self.d2),
            ("K", self.k),
            ("alpha", self.alpha),
            ("d", self.d),
            ("R", self.radius),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be > 0, got {value}")));
            }
        }
        for (name, value) in [("chi", self.chi), ("tau", self.tau)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be >= 0, got {value}")));
            }
        }
        if self.alpha <= self.d {
            return Err(Error::InvalidParams(format!(
                "alpha ({}) must exceed d ({}) for a positive steady state",
                self.alpha, self.d
            )));
        }
        Ok(())
    }

    pub fn with_chi(mut self, chi: f64) -> Self {
        self.chi = chi;
        self
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }
}

/// Prey kinetics f(u, v).
#[inline]
pub fn prey_kinetics(p: &ModelParams, u: f64, v: f64) -> f64 {
    u * (1.0 - u / p.k) - p.alpha * u * v / (u + 1.0)
}

/// Predator kinetics g(u_τ, v).
#[inline]
pub fn predator_kinetics(p: &ModelParams, u_delayed: f64, v: f64) -> f64 {
    -p.d * v + p.alpha * u_delayed * v / (u_delayed + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct H1Report {
    /// 0 < K < 1 + 2u*
    pub capacity_bound: bool,
    pub alpha_exceeds_d: bool,
    /// 0 < u* < K
    pub prey_below_capacity: bool,
    pub chi_positive: bool,
    pub all: bool,
}

pub fn check_h1(p: &ModelParams) -> H1Report {
    let alpha_exceeds_d = p.alpha > p.d;
    let (capacity_bound, prey_below_capacity) = if alpha_exceeds_d {
        let u = p.d / (p.alpha - p.d);
        (p.k > 0.0 && p.k < 1.0 + 2.0 * u, u > 0.0 && u < p.k)
    } else {
        (false, false)
    };
    let chi_positive = p.chi > 0.0;
    H1Report {
        capacity_bound,
        alpha_exceeds_d,
        prey_below_capacity,
        chi_positive,
        all: capacity_bound && alpha_exceeds_d && prey_below_capacity && chi_positive,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyState {
    pub u_star: f64,
    pub v_star: f64,
    /// ∂f/∂u at the steady state.
    pub a11: f64,
    /// ∂g/∂u_τ at the steady state.
    pub a21: f64,
}

impl SteadyState {
    /// ∂f/∂v at the steady state; equals −d because αu*/(1+u*) = d.
    pub fn a12(&self, p: &ModelParams) -> f64 {
        -p.alpha * self.u_star / (1.0 + self.u_star)
    }

    /// ∂g/∂v at the steady state (zero in exact arithmetic).
    pub fn a22(&self, p: &ModelParams) -> f64 {
        -p.d + p.alpha * self.u_star / (1.0 + self.u_star)
    }
}

pub fn steady_state(p: &ModelParams) -> Result<SteadyState> {
    if !(p.alpha > p.d) {
        return Err(Error::InvalidParams(format!(
            "no positive steady state: alpha ({}) <= d ({})",
            p.alpha, p.d
        )));
    }
    let u = p.d / (p.alpha - p.d);
    let v = (p.k - u) * (1.0 + u) / (p.k * p.alpha);
    let s = (1.0 + u) * (1.0 + u);
    Ok(SteadyState {
        u_star: u,
        v_star: v,
        a11: 1.0 - 2.0 * u / p.k - p.alpha * v / s,
        a21: p.alpha * v / s,
    })
}

/// Second and third partial derivatives of the kinetics at (u*, v*).
///
/// Prey derivatives are with respect to (u, v); predator derivatives with
/// respect to (w, v) where w = u_τ is the delayed prey density. Mixed
/// partials are stored once (e.g. `f_uuv` = ∂³f/∂u²∂v).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct KineticForms {
    pub f_uu: f64,
    pub f_uv: f64,
    pub f_vv: f64,
    pub f_uuu: f64,
    pub f_uuv: f64,
    pub f_uvv: f64,
    pub f_vvv: f64,
    pub g_ww: f64,
    pub g_wv: f64,
    pub g_vv: f64,
    pub g_www: f64,
    pub g_wwv: f64,
    pub g_wvv: f64,
    pub g_vvv: f64,
    /// Coefficient of the bilinear taxis term χ∇·(u∇v).
    pub chi: f64,
}

impl KineticForms {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Same forms with every quadratic coefficient (including taxis) zeroed.
    pub fn cubic_only(mut self) -> Self {
        self.f_uu = 0.0;
        self.f_uv = 0.0;
        self.f_vv = 0.0;
        self.g_ww = 0.0;
        self.g_wv = 0.0;
        self.g_vv = 0.0;
        self.chi = 0.0;
        self
    }
}

pub fn kinetic_forms(ss: &SteadyState, p: &ModelParams) -> KineticForms {
    let (u, v, a) = (ss.u_star, ss.v_star, p.alpha);
    let q = 1.0 + u;
    let (q2, q3, q4) = (q * q, q * q * q, q * q * q * q);
    KineticForms {
        f_uu: -2.0 / p.k + 2.0 * a * v / q3,
        f_uv: -a / q2,
        f_vv: 0.0,
        f_uuu: -6.0 * a * v / q4,
        f_uuv: 2.0 * a / q3,
        f_uvv: 0.0,
        f_vvv: 0.0,
        g_ww: -2.0 * a * v / q3,
        g_wv: a / q2,
        g_vv: 0.0,
        g_www: 6.0 * a * v / q4,
        g_wwv: -2.0 * a / q3,
        g_wvv: 0.0,
        g_vvv: 0.0,
        chi: p.chi,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn preset_like(d: f64) -> ModelParams {
        ModelParams { d1: 0.1, d2: 0.2, chi: 0.38, k: 6.0, alpha: 1.0, d, tau: 9.88, radius: 10.0 }
    }

    #[test]
    fn h1_consistent_reading() {
        let rep = check_h1(&preset_like(0.8));
        assert!(rep.capacity_bound && rep.alpha_exceeds_d && rep.prey_below_capacity && rep.all);
    }

    #[test]
    fn h1_rejects_alpha_equal_d() {
        let mut p = preset_like(1.0);
        p.alpha = 1.0;
        let rep = check_h1(&p);
        assert!(!rep.alpha_exceeds_d);
        assert!(!rep.all);
        assert!(steady_state(&p).is_err());
        assert!(p.validate().is_err());
    }

    #[test]
    fn h1_literal_reading_fails_capacity_clause() {
        // u* = 1/9 so 1 + 2u* = 11/9 < K = 6.
        let rep = check_h1(&preset_like(0.1));
        assert!(rep.alpha_exceeds_d && rep.prey_below_capacity);
        assert!(!rep.capacity_bound);
        assert!(!rep.all);
    }

    #[test]
    fn steady_state_values() {
        let p = preset_like(0.8);
        let ss = steady_state(&p).unwrap();
        assert!((ss.u_star - 4.0).abs() < 1e-12);
        assert!((ss.v_star - 5.0 / 3.0).abs() < 1e-12);
        assert!((ss.a11 + 0.4).abs() < 1e-12);
        assert!((ss.a21 - 1.0 / 15.0).abs() < 1e-12);
        assert!(prey_kinetics(&p, ss.u_star, ss.v_star).abs() < 1e-12);
        assert!(predator_kinetics(&p, ss.u_star, ss.v_star).abs() < 1e-12);
        assert!((ss.a21 * (1.0 + ss.u_star).powi(2) - p.alpha * ss.v_star).abs() < 1e-12);
        assert!((ss.a12(&p) + p.d).abs() < 1e-12);
        assert!(ss.a22(&p).abs() < 1e-12);

        let ss = steady_state(&preset_like(0.1)).unwrap();
        assert!((ss.u_star - 1.0 / 9.0).abs() < 1e-12);
        assert!((ss.v_star - 1.090_534_979_423_868).abs() < 1e-12);
    }

    #[test]
    fn alpha_twice_d_gives_unit_prey() {
        for k in [2.0, 6.0, 11.0] {
            let p = ModelParams { k, alpha: 0.9, d: 0.45, ..preset_like(0.8) };
            assert_eq!(steady_state(&p).unwrap().u_star, 1.0);
        }
    }

    #[test]
    fn named_coefficients() {
        let p = preset_like(0.8);
        let kf = kinetic_forms(&steady_state(&p).unwrap(), &p);
        assert!((kf.f_uv + 0.04).abs() < 1e-14);
        assert_eq!(kf.f_vv, 0.0);
        assert!((kf.g_ww + 2.0 / 75.0).abs() < 1e-14);
        assert_eq!(kf.chi, 0.38);
    }

    fn fd_partials(p: &ModelParams) -> [(f64, f64); 14] {
        let ss = steady_state(p).unwrap();
        let kf = kinetic_forms(&ss, p);
        let (u0, v0) = (ss.u_star, ss.v_star);
        // Hand-coded first partials; second and third partials by central
        // differences of them.
        let fu = |u: f64, v: f64| 1.0 - 2.0 * u / p.k - p.alpha * v / ((1.0 + u) * (1.0 + u));
        let fv = |u: f64, _v: f64| -p.alpha * u / (1.0 + u);
        let gw = |w: f64, v: f64| p.alpha * v / ((1.0 + w) * (1.0 + w));
        let gv = |w: f64, _v: f64| -p.d + p.alpha * w / (1.0 + w);
        let h = 1e-5;
        let hi = 1e-3;
        let dx = |f: &dyn Fn(f64, f64) -> f64, x: f64, y: f64, s: f64| (f(x + s, y) - f(x - s, y)) / (2.0 * s);
        let dy = |f: &dyn Fn(f64, f64) -> f64, x: f64, y: f64, s: f64| (f(x, y + s) - f(x, y - s)) / (2.0 * s);
        // Fourth-order inner stencils so the nested estimate stays accurate.
        let dx4 = |f: &dyn Fn(f64, f64) -> f64, x: f64, y: f64| {
            (-f(x + 2.0 * hi, y) + 8.0 * f(x + hi, y) - 8.0 * f(x - hi, y) + f(x - 2.0 * hi, y)) / (12.0 * hi)
        };
        let dy4 = |f: &dyn Fn(f64, f64) -> f64, x: f64, y: f64| {
            (-f(x, y + 2.0 * hi) + 8.0 * f(x, y + hi) - 8.0 * f(x, y - hi) + f(x, y - 2.0 * hi)) / (12.0 * hi)
        };
        let fuu = |u: f64, v: f64| dx4(&fu, u, v);
        let fuv = |u: f64, v: f64| dy4(&fu, u, v);
        let fvv = |u: f64, v: f64| dy4(&fv, u, v);
        let gww = |w: f64, v: f64| dx4(&gw, w, v);
        let gwv = |w: f64, v: f64| dy4(&gw, w, v);
        let gvv = |w: f64, v: f64| dy4(&gv, w, v);
        [
            (kf.f_uu, dx(&fu, u0, v0, h)),
            (kf.f_uv, dy(&fu, u0, v0, h)),
            (kf.f_vv, dy(&fv, u0, v0, h)),
            (kf.f_uuu, dx(&fuu, u0, v0, h)),
            (kf.f_uuv, dy(&fuu, u0, v0, h)),
            (kf.f_uvv, dy(&fuv, u0, v0, h)),
            (kf.f_vvv, dy(&fvv, u0, v0, h)),
            (kf.g_ww, dx(&gw, u0, v0, h)),
            (kf.g_wv, dy(&gw, u0, v0, h)),
            (kf.g_vv, dy(&gv, u0, v0, h)),
            (kf.g_www, dx(&gww, u0, v0, h)),
            (kf.g_wwv, dy(&gww, u0, v0, h)),
            (kf.g_wvv, dy(&gwv, u0, v0, h)),
            (kf.g_vvv, dy(&gvv, u0, v0, h)),
        ]
    }

    #[test]
    fn forms_match_finite_differences() {
        for d in [0.8, 0.1, 0.45] {
            for (i, (exact, fd)) in fd_partials(&preset_like(d)).into_iter().enumerate() {
                if exact == 0.0 {
                    assert!(fd.abs() < 1e-8, "d={d} entry {i}: {fd}");
                } else {
                    assert!(((exact - fd) / exact).abs() < 1e-6, "d={d} entry {i}: {exact} vs {fd}");
                }
            }
        }
    }
}
