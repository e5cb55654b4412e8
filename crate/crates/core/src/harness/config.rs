use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::FiberParams;
use crate::detectors::DetectorKind;
use crate::error::{Error, Result};
use crate::txrx::SystemConfig;

/// Monte Carlo settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunParams {
    pub seed: u64,
    pub n_bursts: usize,
    pub detectors: Vec<DetectorKind>,
    /// Power grid for `sweep`, dBm.
    pub powers_dbm: Vec<f64>,
    /// Target split-step length, km; refined further if the nonlinear-phase
    /// guard requires it.
    pub ssfm_step_km: f64,
    pub noise: bool,
    /// Write measured wall time; when false the column is 0 so that output
    /// files are byte-reproducible.
    pub report_wall_time: bool,
}

impl Default for RunParams {
    fn default() -> Self {
        Self {
            seed: 1,
            n_bursts: 100,
            detectors: DetectorKind::ALL.to_vec(),
            powers_dbm: vec![-14.0, -12.0, -10.0, -8.0, -6.0],
            ssfm_step_km: 0.1,
            noise: true,
            report_wall_time: true,
        }
    }
}

/// Full experiment description, as read from a TOML file with sections
/// `[system]`, `[fiber]` and `[run]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    pub fiber: FiberParams,
    pub run: RunParams,
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.fiber.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.run.n_bursts == 0 {
            return Err(Error::Config("n_bursts must be >= 1".into()));
        }
        if self.run.detectors.is_empty() {
            return Err(Error::Config("at least one detector is required".into()));
        }
        if !(self.run.ssfm_step_km > 0.0) {
            return Err(Error::Config("ssfm_step_km must be positive".into()));
        }
        if self.run.powers_dbm.iter().any(|p| !p.is_finite()) {
            return Err(Error::Config("powers must be finite".into()));
        }
        Ok(())
    }
}
