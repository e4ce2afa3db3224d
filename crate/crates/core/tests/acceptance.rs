//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`). Failures are reported but the
//! process exits 0 unless `ACCEPTANCE_STRICT=1` is set.

mod common;

use std::time::{Duration, Instant};

use common::*;
use num_complex::Complex64;
use taxis_hopf::cli::classify_trajectory;
use taxis_hopf::diagnostics::WaveClass;
use taxis_hopf::io::config::ClassifyStage;
use taxis_hopf::io::presets;
use taxis_hopf::io::report::{discrepancy_report, published_rotating, EmpiricalSide};
use taxis_hopf::lineal::*;
use taxis_hopf::model::*;
use taxis_hopf::normalform::{analyze, Branch, NormalFormConfig};
use taxis_hopf::simulator::probe::{branch_probe, locate_onset, probe_near_hopf, BranchProbe};
use taxis_hopf::simulator::*;
use taxis_hopf::spectrum::{bessel_jprime_zeros, eigenmode, ModeCache};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn hopf(p: &ModelParams, n: u32) -> HopfPoint {
    let ss = steady_state(p).unwrap();
    hopf_points(p, &ss, &eigenmode(n, 1, p.radius).unwrap(), 0).unwrap()[0]
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn bessel() -> Outcome {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for n in 0..=2 {
        let got = bessel_jprime_zeros(n, 3);
        let want = oracle_jprime_zeros(n, 3);
        for (g, w) in got.iter().zip(&want) {
            worst = worst.max((g - w).abs());
        }
    }
    let el = t.elapsed();
    outcome(worst < 1e-10 && el < Duration::from_secs(1), format!("max |Δβ| = {worst:.2e}, {el:.2?}"))
}

fn residual_suite() -> Outcome {
    let t = Instant::now();
    let cache = ModeCache::new(10.0, 4, 3);
    let chis: Vec<f64> = (0..=60).map(|i| 0.01 * i as f64).collect();
    let (mut count, mut worst_res, mut worst_slope) = (0usize, 0.0f64, 0.0f64);
    for d in [presets::D_CONSISTENT, presets::D_LITERAL] {
        for chi_tau in [presets::CASE1, presets::CASE2] {
            let p = presets::params(d, chi_tau);
            let ss = steady_state(&p).unwrap();
            for &chi in &chis {
                let pc = p.with_chi(chi);
                for mode in cache.iter().filter(|e| e.lambda > 0.0) {
                    let k = CharCoeffs::new(&pc, &ss, mode);
                    for hp in hopf_points_for(&k, 1).unwrap() {
                        count += 1;
                        worst_res = worst_res.max(hp.residual());
                        let h = 1e-4 * hp.tau_c;
                        let g0 = Complex64::new(0.0, hp.omega);
                        let gp = newton_root(&k, hp.tau_c + h, g0).unwrap();
                        let gm = newton_root(&k, hp.tau_c - h, g0).unwrap();
                        let slope = (gp.re - gm.re) / (2.0 * h);
                        worst_slope = worst_slope.max(rel(hp.transversality, slope));
                    }
                }
            }
        }
    }
    let el = t.elapsed();
    outcome(
        count >= 200 && worst_res < 1e-10 && worst_slope < 1e-4 && el < Duration::from_secs(10),
        format!("{count} points, max |Γ(iω)| = {worst_res:.2e}, max slope rel err = {worst_slope:.2e}, {el:.2?}"),
    )
}

fn discrepancy(empirical: Vec<EmpiricalSide>) -> Outcome {
    let rep = match discrepancy_report(&NormalFormConfig::default(), empirical) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("report failed: {e}")),
    };
    let dir = std::path::PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("discrepancy.tsv"), rep.to_tsv()).unwrap();
    std::fs::write(dir.join("discrepancy.txt"), rep.to_text()).unwrap();
    let get = |reading: &str, q: &str| {
        rep.rows.iter().find(|r| r.case == 1 && r.reading == reading && r.quantity == q).map(|r| r.computed)
    };
    let both = ["consistent", "literal"].iter().all(|r| get(r, "omega_star").is_some() && get(r, "tau_c").is_some());
    let has_conv = !rep.convention.is_empty() && rep.empirical.len() == 4;
    outcome(
        both && has_conv,
        format!(
            "case 1: ω* = {:.6} / {:.6}, τ_c = {:.6} / {:.6} (consistent / literal; published 0.1567, 9.8270); written to {}",
            get("consistent", "omega_star").unwrap_or(f64::NAN),
            get("literal", "omega_star").unwrap_or(f64::NAN),
            get("consistent", "tau_c").unwrap_or(f64::NAN),
            get("literal", "tau_c").unwrap_or(f64::NAN),
            dir.display()
        ),
    )
}

fn normal_form() -> Outcome {
    let t = Instant::now();
    let base = NormalFormConfig::default();
    let (mut trunc, mut quad, mut pair, mut gauge, mut rot) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (case, p, n) in [(1u8, case1(), 1), (2, case2(), 2)] {
        let ss = steady_state(&p).unwrap();
        let forms = kinetic_forms(&ss, &p);
        let hp = hopf(&p, n);
        for branch in [published_rotating(case), Branch::Standing] {
            let run = |cfg: NormalFormConfig| analyze(&p, &ss, &forms, &hp, branch, &cfg).unwrap();
            let r0 = run(base);
            let g = r0.result.g21;
            let r_trunc = run(NormalFormConfig { truncation: 2 * base.truncation, ..base });
            let r_quad = run(NormalFormConfig {
                n_r: Some(2 * r0.n_r),
                n_theta: Some(2 * r0.n_theta),
                time_nodes: 2 * base.time_nodes,
                ..base
            });
            let r_gauge = run(NormalFormConfig { gauge: 0.9, ..base });
            let r_rot = run(NormalFormConfig { theta_offset: 0.37, ..base });
            trunc = trunc.max((r_trunc.result.g21 - g).norm() / g.norm());
            quad = quad.max((r_quad.result.g21 - g).norm() / g.norm());
            pair = pair.max(r0.pairing_error).max(r_quad.pairing_error);
            gauge = gauge
                .max(rel(r_gauge.result.tau_prime0, r0.result.tau_prime0))
                .max(rel(r_gauge.result.rho_prime0, r0.result.rho_prime0));
            rot = rot.max((r_rot.result.g21 - g).norm() / g.norm());
        }
    }
    let el = t.elapsed();
    outcome(
        trunc < 1e-4 && quad < 1e-4 && pair < 1e-10 && gauge < 1e-10 && rot < 1e-8 && el < Duration::from_secs(60),
        format!(
            "Δg21 truncation {trunc:.1e}, quadrature {quad:.1e}; pairing {pair:.1e}; gauge {gauge:.1e}; rotation {rot:.1e}; {el:.2?}"
        ),
    )
}

fn linear_probe() -> Outcome {
    let t = Instant::now();
    let p = case1();
    let hp = hopf(&p, 1);
    let cfg = ProbeConfig::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for f in [0.9, 1.0, 1.05] {
        match probe_near_hopf(&p, &hp, f * hp.tau_c, &cfg) {
            Ok((r, pred)) => {
                let im = rel(r.gamma.im, pred.im);
                let re = (r.gamma.re - pred.re).abs();
                ok &= im < 0.02 && re < 5e-3;
                parts.push(format!("{f}τc: γ = {:.5}{:+.5}i vs {:.5}{:+.5}i", r.gamma.re, r.gamma.im, pred.re, pred.im));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{f}τc: {e}"));
            }
        }
    }
    let el = t.elapsed();
    outcome(ok && el < Duration::from_secs(300), format!("{}; {el:.2?}", parts.join("; ")))
}

fn onset() -> Outcome {
    let t = Instant::now();
    let p = case1();
    let hp = hopf(&p, 1);
    match locate_onset(&p, &hp, (0.95 * hp.tau_c, 1.05 * hp.tau_c), 0.01, &ProbeConfig::default()) {
        Ok(r) => {
            let e = rel(r.tau_onset, hp.tau_c);
            outcome(
                e < 0.02,
                format!("τ_onset = {:.4} vs τ_11^0 = {:.4} (rel {e:.2e}, {} runs), {:.2?}", r.tau_onset, hp.tau_c, r.runs.len(), t.elapsed()),
            )
        }
        Err(e) => outcome(false, format!("{e}")),
    }
}

fn wave_classes() -> Outcome {
    let t = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for fig in 2..=5u32 {
        let cfg = presets::figure(fig, presets::D_CONSISTENT).unwrap();
        let sim = cfg.simulation.clone().unwrap();
        let p = cfg.params;
        let ss = steady_state(&p).unwrap();
        let n = sim.history.wavenumber().unwrap();
        let traj = match run(&sim, &p) {
            Ok(t) => t,
            Err(e) => {
                ok = false;
                parts.push(format!("fig{fig}: {e}"));
                continue;
            }
        };
        let (_, rep) = classify_trajectory(&traj.grid, &traj.frames, ss.u_star, p.tau, &ClassifyStage::default()).unwrap();
        let res = |name: &str| rep.residuals.iter().find(|r| r.name == name).map(|r| r.residual).unwrap_or(f64::INFINITY);
        let omega = hopf(&p, n).omega;
        let pass = match fig {
            2 | 3 => {
                rep.class == WaveClass::Standing
                    && rep.n == n
                    && rep.axes.len() == n as usize
                    && res("standing-half-period") < 0.05
                    && res("standing-reflection") < 0.05
            }
            4 => {
                rep.class == WaveClass::RotatingCcw
                    && rep.n == n
                    && rel(rep.phase_velocity, omega / n as f64) < 0.05
                    && res("rotating-ccw") < 0.05
            }
            _ => rep.class == WaveClass::RotatingCw && rep.n == n && res("rotating-cw") < 0.05,
        };
        ok &= pass;
        parts.push(format!(
            "fig{fig}: {:?} n={} T={:.2} balance={:.2} half={:.2} ccw={:.2} cw={:.2}",
            rep.class,
            rep.n,
            rep.period,
            rep.balance,
            res("standing-half-period"),
            res("rotating-ccw"),
            res("rotating-cw")
        ));
    }
    outcome(ok, format!("{}; {:.2?}", parts.join("; "), t.elapsed()))
}

fn equivariance() -> Outcome {
    let p = case1();
    let ss = steady_state(&p).unwrap();
    let grid = PolarGrid::new(24, 48, p.radius).unwrap();
    let h = InitialHistory::Random { amplitude: 0.05 }.evaluator(&ss, &grid, 7).unwrap();
    let f0 = h(0.0);
    let steps = 200;
    let go = |init: Field, scheme: Scheme, steps: usize| {
        let mut st = Stepper::new(grid.clone(), p, scheme, 0.1, &move |_| init.clone()).unwrap();
        for _ in 0..steps {
            st.step().unwrap();
        }
        st.state().clone()
    };
    let base = go(f0.clone(), Scheme::default(), steps);
    let s = 7;
    let rot = go(f0.rotate(&grid, s), Scheme::default(), steps) == base.rotate(&grid, s);
    let refl = go(f0.reflect(&grid), Scheme::default(), steps) == base.reflect(&grid);

    let pure = Scheme { reaction: false, taxis: false, ..Scheme::default() };
    let end = go(f0.clone(), pure, 1000);
    let mass = |q: &[f64]| grid.integrate(q);
    let drift = rel(mass(&end.u), mass(&f0.u)).max(rel(mass(&end.v), mass(&f0.v)));

    let steady = Field::constant(grid.len(), ss.u_star, ss.v_star);
    let one = go(steady.clone(), Scheme::default(), 1);
    let still = one.max_abs_diff(&steady);
    outcome(
        rot && refl && drift < 1e-10 && still < 1e-12,
        format!("rotation bitwise {rot}, reflection bitwise {refl}, mass drift {drift:.1e}/1000 steps, steady drift {still:.1e}/step"),
    )
}

fn convergence() -> Outcome {
    let m = Manufactured::new(case1().with_tau(1.0), 0.01);
    let errs: Vec<f64> = [16, 32, 64].iter().map(|&n| m.error(n, 32, 0.05, 5.0).0).collect();
    let space = (errs[0] / errs[1]).log2().min((errs[1] / errs[2]).log2());

    let p = case1();
    let hist = InitialHistory::Pattern { u: AngularProfile::Cos(1), v: AngularProfile::Cos(1), amplitude: 0.1 };
    let sols: Vec<(PolarGrid, Field)> = [50, 100, 200]
        .iter()
        .map(|&n| integrate(&p, 64, 128, dt_for(p.tau, n), 6.0 * p.tau, &hist, Scheme::default()))
        .collect();
    let g = &sols[0].0;
    let a = l2_diff(g, &sols[0].1.u, &sols[1].1.u);
    let b = l2_diff(g, &sols[1].1.u, &sols[2].1.u);
    let time = (a / b).log2();
    outcome(space >= 1.9 && time >= 1.9, format!("spatial order {space:.3} (Nr 16/32/64), temporal order {time:.3} (dt = τ/50, τ/100, τ/200)"))
}

fn branch_probes() -> Vec<(u8, Branch, HopfPoint, f64, Result<BranchProbe, String>)> {
    let cfg = ProbeConfig { t_skip: 30.0, t_end: 150.0, ..ProbeConfig::default() };
    let amps = [0.02, 0.04, 0.06, 0.08];
    let mut out = Vec::new();
    for (case, p, n) in [(1u8, case1(), 1), (2, case2(), 2)] {
        let hp = hopf(&p, n);
        let ss = steady_state(&p).unwrap();
        let forms = kinetic_forms(&ss, &p);
        for branch in [published_rotating(case), Branch::Standing] {
            let tp = analyze(&p, &ss, &forms, &hp, branch, &NormalFormConfig::default()).unwrap().result.tau_prime0;
            let sign = match branch {
                Branch::RotatingCw => 1,
                Branch::RotatingCcw => -1,
                Branch::Standing => 0,
            };
            let probe = branch_probe(&p, &hp, sign, &amps, &cfg).map_err(|e| e.to_string());
            out.push((case, branch, hp, tp, probe));
        }
    }
    out
}

fn branch_consistency(probes: &[(u8, Branch, HopfPoint, f64, Result<BranchProbe, String>)]) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (case, branch, _, tp, probe) in probes {
        match probe {
            Ok(b) => {
                let c = b.side == -(tp.signum() as i32);
                ok &= c;
                parts.push(format!("case {case} {}: τ′(0) = {tp:.3e}, κ = {:.2e}, side {:+}", branch.name(), b.kappa, b.side));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("case {case} {}: {e}", branch.name()));
            }
        }
    }
    outcome(ok, parts.join("; "))
}

fn main() {
    let t = Instant::now();
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut record = |name: &'static str, f: &dyn Fn() -> Outcome| {
        let s = Instant::now();
        let o = f();
        println!("{} {name}: {} [{:.1?}]", if o.pass { "PASS" } else { "FAIL" }, o.detail, s.elapsed());
        results.push((name, o));
    };
    record("bessel-zeros", &bessel);
    record("characteristic-residuals", &residual_suite);
    let probes = branch_probes();
    let empirical: Vec<EmpiricalSide> = probes
        .iter()
        .filter_map(|(case, branch, _, tp, probe)| {
            probe.as_ref().ok().map(|b| EmpiricalSide {
                case: *case,
                branch: *branch,
                kappa: b.kappa,
                side: b.side,
                tau_prime0: *tp,
                consistent: b.side == -(tp.signum() as i32),
            })
        })
        .collect();
    record("discrepancy-report", &|| discrepancy(empirical.clone()));
    record("normal-form-self-consistency", &normal_form);
    record("linear-probe", &linear_probe);
    record("hopf-onset", &onset);
    record("wave-classes", &wave_classes);
    record("equivariance-conservation", &equivariance);
    record("convergence-orders", &convergence);
    record("branch-direction", &|| branch_consistency(&probes));
    let failed = results.iter().filter(|(_, o)| !o.pass).count();
    println!("acceptance: {}/{} passed in {:.1?}", results.len() - failed, results.len(), t.elapsed());
    if failed > 0 && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
