//! Parameter sets of the two numerical cases and the six figures.
//!
//! The stated steady state (u*, v*) = (4, 1.67) with K = 6, α = 1 requires
//! d = 0.8; the literal value d = 0.1 gives u* = 1/9. `-consistent` presets
//! use d = 0.8 and `-literal` presets use d = 0.1. Unqualified names use the
//! consistent reading.

use super::config::{ClassifyStage, Config, CurvesStage, NormalFormStage, SpectrumStage};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::simulator::{AngularProfile, InitialHistory, Scheme, SimConfig};

pub const D_CONSISTENT: f64 = 0.8;
pub const D_LITERAL: f64 = 0.1;

/// (χ, τ) of case 1 and case 2.
pub const CASE1: (f64, f64) = (0.38, 9.88);
pub const CASE2: (f64, f64) = (0.46, 9.6);

pub const NAMES: &[&str] = &[
    "case1",
    "case2",
    "case1-consistent",
    "case1-literal",
    "case2-consistent",
    "case2-literal",
    "fig1",
    "fig2",
    "fig3",
    "fig4",
    "fig5",
    "fig6",
];

pub fn params(d: f64, (chi, tau): (f64, f64)) -> ModelParams {
    ModelParams { d1: 0.1, d2: 0.2, chi, k: 6.0, alpha: 1.0, d, tau, radius: 10.0 }
}

fn pattern(u: AngularProfile, v: AngularProfile) -> InitialHistory {
    InitialHistory::Pattern { u, v, amplitude: 0.1 }
}

pub fn simulation(history: InitialHistory) -> SimConfig {
    SimConfig {
        n_r: 64,
        n_theta: 128,
        dt: 0.1,
        t_end: 1500.0,
        output_every: 10,
        history,
        seed: 20_240_101,
        scheme: Scheme::default(),
    }
}

fn config(p: ModelParams, n: u32, sim: Option<SimConfig>) -> Config {
    Config {
        params: p,
        spectrum: SpectrumStage::default(),
        curves: CurvesStage::default(),
        normal_form: NormalFormStage { n, ..NormalFormStage::default() },
        simulation: sim,
        classify: ClassifyStage::default(),
    }
}

/// Figure `k` (1–6) at the given reading of d.
pub fn figure(k: u32, d: f64) -> Result<Config> {
    use AngularProfile::{Cos, Sin};
    let (case, n, hist) = match k {
        1 => (CASE1, 1, None),
        2 => (CASE1, 1, Some(pattern(Cos(1), Cos(1)))),
        3 => (CASE2, 2, Some(pattern(Cos(2), Cos(2)))),
        4 => (CASE1, 1, Some(pattern(Sin(1), Cos(1)))),
        5 => (CASE2, 2, Some(pattern(Cos(2), Sin(2)))),
        6 => (CASE2, 2, Some(InitialHistory::Random { amplitude: 0.05 })),
        _ => return Err(Error::Config(format!("no figure {k}"))),
    };
    Ok(config(params(d, case), n, hist.map(simulation)))
}

/// Named preset as (file stem, configuration) pairs.
pub fn preset(name: &str) -> Result<Vec<(String, Config)>> {
    let (stem, d) = match name.rsplit_once('-') {
        Some((s, "consistent")) => (s, D_CONSISTENT),
        Some((s, "literal")) => (s, D_LITERAL),
        _ => (name, D_CONSISTENT),
    };
    let suffix = if d == D_LITERAL { "-literal" } else { "" };
    let figs: &[u32] = match stem {
        "case1" => &[2, 4],
        "case2" => &[3, 5, 6],
        "fig1" => &[1],
        "fig2" => &[2],
        "fig3" => &[3],
        "fig4" => &[4],
        "fig5" => &[5],
        "fig6" => &[6],
        _ => return Err(Error::Config(format!("unknown preset '{name}'; known: {}", NAMES.join(", ")))),
    };
    figs.iter().map(|&k| Ok((format!("fig{k}{suffix}"), figure(k, d)?))).collect()
}
