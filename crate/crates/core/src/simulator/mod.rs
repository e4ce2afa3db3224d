//! Delay reaction–diffusion–taxis simulation on the disk.

pub mod angular;
pub mod grid;
pub mod history;
pub mod probe;
pub mod stepper;

use serde::{Deserialize, Serialize};

pub use grid::{Field, PolarGrid};
pub use history::{AngularProfile, HistoryRing, InitialHistory};
pub use probe::{linear_growth_probe, ModeProjector, ProbeConfig};
pub use stepper::{snap_dt, FaceRule, Scheme, Source, Stepper};

use crate::error::{Error, Result};
use crate::model::{steady_state, ModelParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n_r: usize,
    pub n_theta: usize,
    /// Requested step; snapped so that τ/Δt is an integer.
    pub dt: f64,
    pub t_end: f64,
    /// Emit every `output_every` steps (the initial state is always emitted).
    pub output_every: usize,
    pub history: InitialHistory,
    pub seed: u64,
    pub scheme: Scheme,
}

impl SimConfig {
    pub fn validate(&self, p: &ModelParams) -> Result<()> {
        if !(self.t_end > p.tau) {
            return Err(Error::Config(format!("t_end ({}) must exceed tau ({})", self.t_end, p.tau)));
        }
        if self.output_every == 0 {
            return Err(Error::Config("output_every must be >= 1".into()));
        }
        PolarGrid::new(self.n_r, self.n_theta, p.radius)?;
        snap_dt(p.tau, self.dt)?;
        Ok(())
    }
}

/// One emitted frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub step: i64,
    pub time: f64,
    pub field: Field,
}

/// Frames kept in memory.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: PolarGrid,
    pub dt: f64,
    pub frames: Vec<Frame>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f.time).collect()
    }

    /// Frames with time ≥ t0.
    pub fn tail_from(&self, t0: f64) -> Trajectory {
        Trajectory {
            grid: self.grid.clone(),
            dt: self.dt,
            frames: self.frames.iter().filter(|f| f.time >= t0).cloned().collect(),
        }
    }
}

/// Builds the stepper for a configuration.
pub fn build_stepper(cfg: &SimConfig, p: &ModelParams) -> Result<Stepper> {
    cfg.validate(p)?;
    let ss = steady_state(p)?;
    let grid = PolarGrid::new(cfg.n_r, cfg.n_theta, p.radius)?;
    let hist = cfg.history.evaluator(&ss, &grid, cfg.seed)?;
    Stepper::new(grid, *p, cfg.scheme, cfg.dt, &*hist)
}

/// Integrates to `t_end`, handing each output frame to `observer`.
pub fn run_with(
    cfg: &SimConfig,
    p: &ModelParams,
    mut observer: impl FnMut(Frame) -> Result<()>,
) -> Result<Stepper> {
    let mut st = build_stepper(cfg, p)?;
    let n_steps = (cfg.t_end / st.dt).round() as i64;
    observer(Frame { step: 0, time: 0.0, field: st.state().clone() })?;
    while st.step_index() < n_steps {
        st.step()?;
        if st.step_index() % cfg.output_every as i64 == 0 {
            observer(Frame { step: st.step_index(), time: st.time(), field: st.state().clone() })?;
        }
    }
    Ok(st)
}

/// Integrates to `t_end` and keeps every output frame.
pub fn run(cfg: &SimConfig, p: &ModelParams) -> Result<Trajectory> {
    let mut frames = Vec::new();
    let st = run_with(cfg, p, |f| {
        frames.push(f);
        Ok(())
    })?;
    Ok(Trajectory { grid: st.grid.clone(), dt: st.dt, frames })
}
