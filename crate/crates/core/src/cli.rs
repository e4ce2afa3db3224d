//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O, 2 configuration or usage, 3 numerical
//! failure, 4 resonance in the normal-form solve.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::diagnostics::{angular_spectrum, classify, symmetry_residual, transient_length, WaveReport};
use crate::error::{Error, Result};
use crate::io::report::discrepancy_report;
use crate::io::trajectory::{read_trajectory, FrameWriter, TrajectoryManifest, FRAMES_FILE, MANIFEST_FILE};
use crate::io::{fmt17, presets, sha256_file, tsv, Config, RunManifest};
use crate::lineal::{chi_tau_curves, hopf_points, truncated_modes};
use crate::model::{kinetic_forms, steady_state};
use crate::normalform::analyze;
use crate::simulator::{run_with, Frame, PolarGrid};
use crate::spectrum::ModeCache;

#[derive(Debug, Parser)]
#[command(name = "taxis-hopf", version, about = "Hopf analysis and simulation of a delayed predator-prey system with predator-taxis on a disk", arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Neumann eigenpairs of the disk: n, m, beta, lambda.
    Spectrum(StageArgs),
    /// Critical delays tau_nm^k over a range of chi.
    HopfCurves(StageArgs),
    /// Third-order normal-form coefficients and branch properties.
    NormalForm(StageArgs),
    /// Integrate the delay PDE and write a trajectory.
    Simulate(StageArgs),
    /// Classify a recorded trajectory.
    Classify {
        /// Path to trajectory.json written by `simulate`.
        #[arg(long)]
        trajectory: PathBuf,
        /// Optional config providing [classify] settings.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the configuration files of a named preset.
    CasePreset {
        /// case1, case2, case1-consistent, case1-literal, case2-consistent,
        /// case2-literal, fig1 .. fig6 (figures accept the same suffixes).
        name: String,
        #[arg(long)]
        out: PathBuf,
        /// Also compute the discrepancy report against the published values.
        #[arg(long)]
        report: bool,
    },
}

#[derive(Debug, clap::Args)]
struct StageArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// status.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn prepare(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::Config(format!("cannot create {}: {e}", out.display())))
}

fn run(cmd: Command) -> Result<Vec<String>> {
    match cmd {
        Command::Spectrum(a) => spectrum(&Config::load(&a.config)?, &a.out),
        Command::HopfCurves(a) => hopf_curves(&Config::load(&a.config)?, &a.out),
        Command::NormalForm(a) => normal_form(&Config::load(&a.config)?, &a.out),
        Command::Simulate(a) => simulate(&Config::load(&a.config)?, &a.out),
        Command::Classify { trajectory, config, out } => {
            let cfg = config.map(|c| Config::load(&c)).transpose()?;
            classify_stage(&trajectory, cfg.as_ref(), &out)
        }
        Command::CasePreset { name, out, report } => case_preset(&name, &out, report),
    }
}

fn finish(mut m: RunManifest, out: &Path, start: Instant) -> Result<Vec<String>> {
    m.timing.push((m.stage.clone(), start.elapsed().as_secs_f64()));
    let path = m.save(out)?;
    let mut lines: Vec<String> = m.outputs.iter().map(|o| out.join(&o.path).display().to_string()).collect();
    lines.push(path.display().to_string());
    Ok(lines)
}

pub fn spectrum(cfg: &Config, out: &Path) -> Result<Vec<String>> {
    let start = Instant::now();
    prepare(out)?;
    let cache = ModeCache::new(cfg.params.radius, cfg.spectrum.n_max, cfg.spectrum.m_count);
    let rows = cache
        .sorted()
        .into_iter()
        .map(|e| vec![e.n.to_string(), e.m.to_string(), fmt17(e.beta), fmt17(e.lambda)]);
    let mut m = RunManifest::new("spectrum", cfg);
    m.tolerances = json!({ "bessel_zero_abs": 1e-13 });
    m.truncation = json!({ "n_max": cfg.spectrum.n_max, "m_count": cfg.spectrum.m_count });
    m.write_output(out, "spectrum.tsv", tsv(&["n", "m", "beta", "lambda"], rows).as_bytes())?;
    finish(m, out, start)
}

pub fn hopf_curves(cfg: &Config, out: &Path) -> Result<Vec<String>> {
    let start = Instant::now();
    prepare(out)?;
    let p = cfg.params;
    let ss = steady_state(&p)?;
    let (cap, modes) = truncated_modes(&p, &ss, cfg.curves.truncation_factor);
    let chis = cfg.curves.chi_values();
    let mut curves = chi_tau_curves(&p, &ss, &modes, &chis, cfg.curves.k_max)?;
    curves.retain(|c| !c.points.is_empty());
    curves.sort_by_key(|c| (c.n, c.m, c.k));
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for c in &curves {
        for pt in &c.points {
            worst = worst.max(pt.residual);
            rows.push(vec![
                fmt17(pt.chi),
                c.n.to_string(),
                c.m.to_string(),
                c.k.to_string(),
                fmt17(pt.omega),
                fmt17(pt.tau_c),
                fmt17(pt.transversality),
            ]);
        }
    }
    let mut m = RunManifest::new("hopf-curves", cfg);
    m.tolerances = json!({ "characteristic_residual_max": worst });
    m.truncation = json!({ "lambda_cap": cap, "modes": modes.len() });
    m.write_output(
        out,
        "curves.tsv",
        tsv(&["chi", "n", "m", "k", "omega_star", "tau_c", "transversality"], rows).as_bytes(),
    )?;
    let meta = json!({
        "params": p,
        "steady_state": { "u_star": ss.u_star, "v_star": ss.v_star },
        "chi_values": chis.len(),
        "k_max": cfg.curves.k_max,
        "lambda_cap": cap,
        "truncation_factor": cfg.curves.truncation_factor,
        "characteristic_residual_max": worst,
        "chi_lower": curves.iter().filter(|c| c.k == 0).map(|c| json!({"n": c.n, "m": c.m, "chi": c.chi_lower})).collect::<Vec<_>>(),
    });
    m.write_output(out, "curves.json", serde_json::to_string_pretty(&meta)?.as_bytes())?;
    finish(m, out, start)
}

pub fn normal_form(cfg: &Config, out: &Path) -> Result<Vec<String>> {
    let start = Instant::now();
    prepare(out)?;
    let p = cfg.params;
    let nf = &cfg.normal_form;
    let ss = steady_state(&p)?;
    let mode = crate::spectrum::eigenmode(nf.n, nf.m, p.radius)?;
    let hp = hopf_points(&p, &ss, &mode, nf.k)?
        .get(nf.k)
        .copied()
        .ok_or_else(|| Error::Numerical(format!("mode ({},{}) has no Hopf point", nf.n, nf.m)))?;
    let forms = kinetic_forms(&ss, &p);
    let mut reports = Vec::new();
    for &b in &nf.branches {
        reports.push(analyze(&p, &ss, &forms, &hp, b, &nf.numerics)?);
    }
    let rows = reports.iter().map(|r| {
        let x = &r.result;
        vec![
            x.n.to_string(),
            x.m.to_string(),
            x.k.to_string(),
            x.branch.name().to_string(),
            fmt17(x.g21.re),
            fmt17(x.g21.im),
            fmt17(x.tau_prime0),
            fmt17(x.rho_prime0),
            x.supercritical.to_string(),
        ]
    });
    let mut m = RunManifest::new("normal-form", cfg);
    m.tolerances = json!({ "resonance_condition": 1e10 });
    m.truncation = json!({ "radial_modes": nf.numerics.truncation, "time_nodes": nf.numerics.time_nodes });
    m.write_output(
        out,
        "normal_form.tsv",
        tsv(&["n", "m", "k", "branch", "re_g21", "im_g21", "tau_prime0", "rho_prime0", "supercritical"], rows).as_bytes(),
    )?;
    let meta = json!({
        "hopf_point": { "omega": hp.omega, "tau_c": hp.tau_c, "root_velocity": [hp.root_velocity.re, hp.root_velocity.im], "residual": hp.residual() },
        "reports": reports,
        "convention": crate::io::report::CONVENTION,
    });
    m.write_output(out, "normal_form.json", serde_json::to_string_pretty(&meta)?.as_bytes())?;
    finish(m, out, start)
}

pub fn simulate(cfg: &Config, out: &Path) -> Result<Vec<String>> {
    let start = Instant::now();
    let sim = cfg.simulation.as_ref().ok_or_else(|| Error::Config("missing [simulation] section".into()))?;
    sim.validate(&cfg.params)?;
    prepare(out)?;
    let writer = FrameWriter::spawn(&out.join(FRAMES_FILE), 16)?;
    let result = run_with(sim, &cfg.params, |f: Frame| writer.send(f));
    let written = writer.finish()?;
    let st = result?;
    let tm = TrajectoryManifest::new(
        &st.grid,
        st.dt,
        cfg.params,
        sim.seed,
        sim.scheme,
        sim.history.clone(),
        written.clone(),
    );
    let mut m = RunManifest::new("simulate", cfg);
    m.tolerances = json!({ "negative_tolerance": crate::simulator::stepper::NEGATIVE_TOLERANCE, "retries": st.retries() });
    m.record(FRAMES_FILE, written.bytes, written.sha256);
    m.write_output(out, MANIFEST_FILE, serde_json::to_string_pretty(&tm)?.as_bytes())?;
    finish(m, out, start)
}

/// Classifies the trajectory after discarding the transient.
pub fn classify_trajectory(
    grid: &PolarGrid,
    frames: &[Frame],
    u_star: f64,
    tau: f64,
    stage: &crate::io::config::ClassifyStage,
) -> Result<(f64, WaveReport)> {
    let t_last = frames.last().map(|f| f.time).unwrap_or(0.0);
    let trim = match stage.trim {
        Some(t) => t,
        None => {
            let half: Vec<Frame> = frames.iter().filter(|f| f.time >= 0.5 * t_last).cloned().collect();
            match classify(grid, &half, u_star, &stage.thresholds) {
                Ok(r) if r.period > 0.0 => transient_length(r.period, tau),
                _ => 20.0 * tau,
            }
        }
    };
    let window: Vec<Frame> = frames.iter().filter(|f| f.time >= trim).cloned().collect();
    Ok((trim, classify(grid, &window, u_star, &stage.thresholds)?))
}

pub fn classify_stage(traj: &Path, cfg: Option<&Config>, out: &Path) -> Result<Vec<String>> {
    let start = Instant::now();
    let (tm, t) = read_trajectory(traj)?;
    prepare(out)?;
    let cfg = cfg.cloned().unwrap_or_else(|| Config {
        params: tm.params,
        spectrum: Default::default(),
        curves: Default::default(),
        normal_form: Default::default(),
        simulation: None,
        classify: Default::default(),
    });
    let ss = steady_state(&tm.params)?;
    let (trim, report) = classify_trajectory(&t.grid, &t.frames, ss.u_star, tm.params.tau, &cfg.classify)?;
    let window: Vec<Frame> = t.frames.iter().filter(|f| f.time >= trim).cloned().collect();

    // residual table over the full window and its two halves
    let mid = window.len() / 2;
    let mut rows = Vec::new();
    for (name, frames) in [("full", &window[..]), ("first-half", &window[..mid]), ("second-half", &window[mid..])] {
        if frames.is_empty() {
            continue;
        }
        for r in &report.residuals {
            let res = symmetry_residual(&t.grid, frames, ss.u_star, r.relation);
            rows.push(vec![
                name.to_string(),
                fmt17(frames[0].time),
                fmt17(frames[frames.len() - 1].time),
                r.name.clone(),
                r.relation.reflect.to_string(),
                fmt17(res.applied_angle),
                fmt17(r.relation.time_shift),
                fmt17(res.residual),
            ]);
        }
    }
    let band = cfg.classify.band.unwrap_or([0.0, t.grid.radius]);
    let last = window.last().or(t.frames.last()).ok_or_else(|| Error::Config("empty trajectory".into()))?;
    let spec = angular_spectrum(&t.grid, &last.field.u, ss.u_star, (band[0], band[1]));
    let spec_rows = spec
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| vec![k.to_string(), fmt17(c.re), fmt17(c.im), fmt17(c.norm_sqr())]);

    let mut m = RunManifest::new("classify", &cfg);
    m.tolerances = serde_json::to_value(cfg.classify.thresholds)?;
    m.truncation = json!({ "trim": trim, "trajectory_sha256": sha256_file(&traj.parent().unwrap_or(Path::new(".")).join(&tm.frames_file))? });
    let doc = json!({ "trim": trim, "window_frames": window.len(), "report": report });
    m.write_output(out, "wave_report.json", serde_json::to_string_pretty(&doc)?.as_bytes())?;
    m.write_output(
        out,
        "residuals.tsv",
        tsv(&["window", "t_start", "t_end", "relation", "reflect", "angle", "time_shift", "residual"], rows).as_bytes(),
    )?;
    m.write_output(out, "spectrum.tsv", tsv(&["k", "re", "im", "power"], spec_rows).as_bytes())?;
    let mut lines = finish(m, out, start)?;
    lines.insert(0, format!("class {:?} n {} period {:.6}", report.class, report.n, report.period));
    Ok(lines)
}

pub fn case_preset(name: &str, out: &Path, report: bool) -> Result<Vec<String>> {
    let start = Instant::now();
    let configs = presets::preset(name)?;
    prepare(out)?;
    let mut m = RunManifest::new("case-preset", &configs[0].1);
    for (stem, cfg) in &configs {
        m.write_output(out, &format!("{stem}.toml"), cfg.to_toml()?.as_bytes())?;
    }
    if report {
        let r = discrepancy_report(&configs[0].1.normal_form.numerics, Vec::new())?;
        m.write_output(out, "discrepancy.tsv", r.to_tsv().as_bytes())?;
        m.write_output(out, "discrepancy.txt", r.to_text().as_bytes())?;
    }
    finish(m, out, start)
}
