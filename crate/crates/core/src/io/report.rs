//! Comparison of computed quantities with the published values for both
//! readings of the death rate d, and the sign conventions in use.

use serde::{Deserialize, Serialize};

use super::fmt17;
use super::presets::{params, CASE1, CASE2, D_CONSISTENT, D_LITERAL};
use crate::error::{Error, Result};
use crate::lineal::hopf_points;
use crate::model::{kinetic_forms, steady_state};
use crate::normalform::{analyze, Branch, NormalFormConfig};
use crate::spectrum::eigenmode;

/// Published values: (case, quantity, value).
pub const PUBLISHED: &[(u8, &str, f64)] = &[
    (1, "u_star", 4.0),
    (1, "v_star", 1.67),
    (1, "omega_star", 0.1567),
    (1, "tau_c", 9.8270),
    (1, "tau_prime0/rotating", -0.4085),
    (1, "rho_prime0/rotating", 0.1390),
    (1, "tau_prime0/standing", -0.0883),
    (1, "rho_prime0/standing", 0.0402),
    (2, "u_star", 4.0),
    (2, "v_star", 1.67),
    (2, "omega_star", 0.1938),
    (2, "tau_c", 9.5520),
    (2, "tau_prime0/rotating", -0.0631),
    (2, "rho_prime0/rotating", 0.0467),
    (2, "tau_prime0/standing", -0.4942),
    (2, "rho_prime0/standing", 0.1697),
];

pub const CONVENTION: &str = "\
Sign conventions. tau'(0) = Re g21 / Re gamma'(tau_c) and rho'(0) = Im(gamma'(tau_c) conj(g21)) / Re gamma'(tau_c).
With the kernel normalised against the adjoint so that <Psi, Phi> = I, tau'(0) = -2 d(tau)/d|z|^2 along the bifurcating
branch: tau'(0) < 0 means the periodic orbits exist for tau > tau_c, where the steady state has just lost stability
(supercritical, stable branch on the centre manifold). rho'(0) = 2 omega T2 with T2 the relative period change per |z|^2:
rho'(0) > 0 means the period exceeds 2 pi / omega. These are the classical conventions; no sign is inverted.
The empirical check regresses the measured growth rate of the critical-mode amplitude A on A^2 at tau = tau_c
(slope kappa); the branch lies on tau > tau_c exactly when -kappa / Re gamma' > 0, and consistency requires
that side = -sign(tau'(0)).
Rotation sense: theta increases counterclockwise; psi = e^{i omega t} e^{i n theta} is the pattern cos(n theta + omega t),
which turns clockwise. The published rotating case 1 uses phi^c (e^{i n theta}, clockwise) and case 2 uses phi^s
(e^{-i n theta}, counterclockwise).";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyRow {
    pub case: u8,
    pub reading: String,
    pub d: f64,
    pub quantity: String,
    pub published: f64,
    pub computed: f64,
    pub abs_diff: f64,
    pub rel_diff: f64,
}

/// Empirical branch side from simulation, to be listed with the prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSide {
    pub case: u8,
    pub branch: Branch,
    pub kappa: f64,
    pub side: i32,
    pub tau_prime0: f64,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub rows: Vec<DiscrepancyRow>,
    /// Smallest-τ Hopf mode per (case, reading): (case, reading, n, m, τ).
    pub first_modes: Vec<(u8, String, u32, usize, f64)>,
    pub empirical: Vec<EmpiricalSide>,
    pub convention: String,
}

/// Branch used for the published rotating value of each case.
pub fn published_rotating(case: u8) -> Branch {
    if case == 1 {
        Branch::RotatingCw
    } else {
        Branch::RotatingCcw
    }
}

pub fn discrepancy_report(nf: &NormalFormConfig, empirical: Vec<EmpiricalSide>) -> Result<DiscrepancyReport> {
    let mut rows = Vec::new();
    let mut first_modes = Vec::new();
    for (case, chi_tau, n) in [(1u8, CASE1, 1u32), (2, CASE2, 2)] {
        for (reading, d) in [("consistent", D_CONSISTENT), ("literal", D_LITERAL)] {
            let p = params(d, chi_tau);
            let ss = steady_state(&p)?;
            let mode = eigenmode(n, 1, p.radius)?;
            let hp = *hopf_points(&p, &ss, &mode, 0)?
                .first()
                .ok_or_else(|| Error::Numerical(format!("no Hopf point for mode ({n},1) at d = {d}")))?;
            let forms = kinetic_forms(&ss, &p);
            let rot = analyze(&p, &ss, &forms, &hp, published_rotating(case), nf)?.result;
            let std = analyze(&p, &ss, &forms, &hp, Branch::Standing, nf)?.result;
            let computed = |q: &str| match q {
                "u_star" => ss.u_star,
                "v_star" => ss.v_star,
                "omega_star" => hp.omega,
                "tau_c" => hp.tau_c,
                "tau_prime0/rotating" => rot.tau_prime0,
                "rho_prime0/rotating" => rot.rho_prime0,
                "tau_prime0/standing" => std.tau_prime0,
                "rho_prime0/standing" => std.rho_prime0,
                _ => f64::NAN,
            };
            for &(c, q, published) in PUBLISHED.iter().filter(|r| r.0 == case) {
                let value = computed(q);
                rows.push(DiscrepancyRow {
                    case: c,
                    reading: reading.into(),
                    d,
                    quantity: q.into(),
                    published,
                    computed: value,
                    abs_diff: value - published,
                    rel_diff: (value - published) / published.abs(),
                });
            }
            let (_, modes) = crate::lineal::truncated_modes(&p, &ss, 1.5);
            if let Some(first) = crate::lineal::first_critical_delay(&p, &ss, &modes) {
                first_modes.push((case, reading.to_string(), first.n, first.m, first.tau_c));
            }
        }
    }
    Ok(DiscrepancyReport { rows, first_modes, empirical, convention: CONVENTION.into() })
}

impl DiscrepancyReport {
    pub fn to_tsv(&self) -> String {
        super::tsv(
            &["case", "reading", "d", "quantity", "published", "computed", "abs_diff", "rel_diff"],
            self.rows.iter().map(|r| {
                vec![
                    r.case.to_string(),
                    r.reading.clone(),
                    fmt17(r.d),
                    r.quantity.clone(),
                    fmt17(r.published),
                    fmt17(r.computed),
                    fmt17(r.abs_diff),
                    fmt17(r.rel_diff),
                ]
            }),
        )
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("Discrepancy report: published case values versus computed values\n\n");
        for r in &self.rows {
            s.push_str(&format!(
                "case {} {:<10} d={:<4} {:<22} published {:>10.4}  computed {:>14.6e}  rel diff {:>+10.3e}\n",
                r.case, r.reading, r.d, r.quantity, r.published, r.computed, r.rel_diff
            ));
        }
        s.push_str("\nFirst Hopf crossing over all modes (smallest tau_nm^0):\n");
        for (case, reading, n, m, tau) in &self.first_modes {
            s.push_str(&format!("case {case} {reading:<10} mode ({n},{m}) tau = {tau:.6}\n"));
        }
        if !self.empirical.is_empty() {
            s.push_str("\nEmpirical branch side (simulation) versus tau'(0):\n");
            for e in &self.empirical {
                s.push_str(&format!(
                    "case {} {:<13} kappa {:+.3e} side {:+} tau'(0) {:+.4e} consistent {}\n",
                    e.case,
                    e.branch.name(),
                    e.kappa,
                    e.side,
                    e.tau_prime0,
                    e.consistent
                ));
            }
        }
        s.push('\n');
        s.push_str(&self.convention);
        s.push('\n');
        s
    }
}
