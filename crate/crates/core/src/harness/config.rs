//! Run configuration: one JSON document, with environment and command-line
//! overrides applied on top.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::export::ExportFormat;
use super::mc::McConfig;
use crate::error::{FwisError, Result};
use crate::fbm::RlScheme;
use crate::spde::{GeneralVSpec, SixParamSpec};
use crate::volmodel::{ForwardContract, VolModelSpec};
use crate::wishart::FwisSpec;

/// Process selected by `fwis simulate`, tagged by `kind`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProcessSpec {
    Fwis {
        spec: FwisSpec,
    },
    EpsInt {
        spec: FwisSpec,
        #[serde(default)]
        scheme: RlScheme,
    },
    EpsGeneral {
        spec: GeneralVSpec,
    },
    Six {
        spec: SixParamSpec,
    },
    Volmodel {
        spec: VolModelSpec,
    },
}

impl ProcessSpec {
    /// The command-line name of the process.
    pub fn name(&self) -> &'static str {
        match self {
            ProcessSpec::Fwis { .. } => "fwis",
            ProcessSpec::EpsInt { .. } => "eps-int",
            ProcessSpec::EpsGeneral { .. } => "eps-general",
            ProcessSpec::Six { .. } => "six",
            ProcessSpec::Volmodel { .. } => "volmodel",
        }
    }
}

/// Inputs of `fwis price`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForwardConfig {
    pub spec: GeneralVSpec,
    pub contract: ForwardContract,
    /// Continuously compounded short rate.
    pub r: f64,
}

/// Everything a command needs besides its name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mc: McConfig,
    pub process: Option<ProcessSpec>,
    /// Last simulated time.
    pub horizon: f64,
    /// Spacing of written observations; `None` writes every step.
    pub obs_dt: Option<f64>,
    pub forward: Option<ForwardConfig>,
    pub format: ExportFormat,
    /// Paths for the coupled weak-order estimate; `None` uses `mc.n_paths`.
    pub weak_order_paths: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mc: McConfig::default(),
            process: None,
            horizon: 1.0,
            obs_dt: None,
            forward: None,
            format: ExportFormat::Csv,
            weak_order_paths: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| FwisError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| FwisError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            FwisError::Config(m) => FwisError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.mc.validate()?;
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(FwisError::Config(format!("horizon must be positive, got {}", self.horizon)));
        }
        if let Some(h) = self.obs_dt {
            if !(h > 0.0 && h.is_finite()) {
                return Err(FwisError::Config(format!("obs_dt must be positive, got {h}")));
            }
        }
        if self.weak_order_paths == Some(0) {
            return Err(FwisError::Config("weak_order_paths must be >= 1".into()));
        }
        Ok(())
    }

    /// Applies `FWIS_SEED` and `FWIS_THREADS` given as strings.
    pub fn apply_env(&mut self, seed: Option<&str>, threads: Option<&str>) -> Result<()> {
        if let Some(s) = seed {
            self.mc.master_seed = s
                .trim()
                .parse()
                .map_err(|_| FwisError::Config(format!("FWIS_SEED is not a 64-bit integer: {s:?}")))?;
        }
        if let Some(s) = threads {
            let n: usize = s
                .trim()
                .parse()
                .map_err(|_| FwisError::Config(format!("FWIS_THREADS is not a count: {s:?}")))?;
            if n == 0 {
                return Err(FwisError::Config("FWIS_THREADS must be >= 1".into()));
            }
            self.mc.threads = Some(n);
        }
        Ok(())
    }

    /// Reads the two variables from the process environment.
    pub fn apply_process_env(&mut self) -> Result<()> {
        let seed = std::env::var("FWIS_SEED").ok();
        let threads = std::env::var("FWIS_THREADS").ok();
        self.apply_env(seed.as_deref(), threads.as_deref())
    }

    /// Observation times as multiples of the step: every `stride` steps.
    pub fn obs_stride(&self) -> Result<usize> {
        let Some(h) = self.obs_dt else { return Ok(1) };
        let k = (h / self.mc.dt).round();
        if k < 1.0 || (k * self.mc.dt - h).abs() > 1e-9 * h {
            return Err(FwisError::Config(format!(
                "obs_dt = {h} is not a multiple of dt = {}",
                self.mc.dt
            )));
        }
        Ok(k as usize)
    }

    /// Number of steps to reach the horizon.
    pub fn steps(&self) -> Result<usize> {
        let k = (self.horizon / self.mc.dt).round();
        if k < 1.0 || (k * self.mc.dt - self.horizon).abs() > 1e-9 * self.horizon {
            return Err(FwisError::Config(format!(
                "horizon = {} is not a multiple of dt = {}",
                self.horizon, self.mc.dt
            )));
        }
        Ok(k as usize)
    }
}
