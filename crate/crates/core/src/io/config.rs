//! TOML run configuration. Unknown keys are rejected at every level.
//!
//! ```toml
//! [params]
//! d1 = 0.1
//! d2 = 0.2
//! chi = 0.38
//! K = 6.0
//! alpha = 1.0
//! d = 0.8
//! tau = 9.88
//! R = 10.0
//!
//! [spectrum]          # optional
//! n_max = 8
//! m_count = 5
//!
//! [curves]            # optional
//! chi_min = 0.0
//! chi_max = 0.6
//! chi_steps = 121
//! k_max = 0
//! truncation_factor = 1.5
//!
//! [normal_form]       # optional
//! n = 1
//! m = 1
//! k = 0
//! branches = ["rotating-cw", "rotating-ccw", "standing"]
//! [normal_form.numerics]
//! truncation = 24
//!
//! [simulation]        # required by `simulate`
//! n_r = 64
//! n_theta = 128
//! dt = 0.1
//! t_end = 1500.0
//! output_every = 10
//! seed = 1
//! [simulation.history]
//! kind = "pattern"
//! u = { cos = 1 }
//! v = { cos = 1 }
//! amplitude = 0.1
//! [simulation.scheme]
//! taxis_face = "central"
//! reaction = true
//! taxis = true
//! diffusion = true
//! max_retries = 4
//!
//! [classify]          # optional
//! band = [0.0, 10.0]
//! [classify.thresholds]
//! residual = 0.05
//! balance = 0.1
//! trend = 0.01
//! axis_drift = 0.05
//! min_periods = 3.0
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diagnostics::ClassifyThresholds;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::normalform::{Branch, NormalFormConfig};
use crate::simulator::SimConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub params: ModelParams,
    #[serde(default)]
    pub spectrum: SpectrumStage,
    #[serde(default)]
    pub curves: CurvesStage,
    #[serde(default)]
    pub normal_form: NormalFormStage,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimConfig>,
    #[serde(default)]
    pub classify: ClassifyStage,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumStage {
    pub n_max: u32,
    pub m_count: usize,
}

impl Default for SpectrumStage {
    fn default() -> Self {
        Self { n_max: 8, m_count: 5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurvesStage {
    pub chi_min: f64,
    pub chi_max: f64,
    pub chi_steps: usize,
    pub k_max: usize,
    /// Modes with λ up to this multiple of the largest Hopf-admitting λ.
    pub truncation_factor: f64,
}

impl Default for CurvesStage {
    fn default() -> Self {
        Self { chi_min: 0.0, chi_max: 0.6, chi_steps: 121, k_max: 0, truncation_factor: 1.5 }
    }
}

impl CurvesStage {
    pub fn chi_values(&self) -> Vec<f64> {
        if self.chi_steps < 2 {
            return vec![self.chi_min];
        }
        let h = (self.chi_max - self.chi_min) / (self.chi_steps - 1) as f64;
        (0..self.chi_steps).map(|i| self.chi_min + i as f64 * h).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalFormStage {
    pub n: u32,
    pub m: usize,
    pub k: usize,
    pub branches: Vec<Branch>,
    pub numerics: NormalFormConfig,
}

impl Default for NormalFormStage {
    fn default() -> Self {
        Self {
            n: 1,
            m: 1,
            k: 0,
            branches: vec![Branch::RotatingCw, Branch::RotatingCcw, Branch::Standing],
            numerics: NormalFormConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyStage {
    pub thresholds: ClassifyThresholds,
    /// Transient to discard; by default max(5 periods, 20τ).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trim: Option<f64>,
    /// Radius band for the reported angular spectrum.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band: Option<[f64; 2]>,
}

impl Default for ClassifyStage {
    fn default() -> Self {
        Self { thresholds: ClassifyThresholds::default(), trim: None, band: None }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.params.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}
