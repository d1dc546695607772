//! Experiment configuration, read from TOML.
//!
//! ```toml
//! device = "device.toml"     # optional, relative to this file; defaults built in
//! backend = "device-noisy"   # ideal | device | device-noisy
//! shots = 10000              # per setting and input; ignored when exact = true
//! exact = false              # write exact probabilities instead of sampled counts
//! seed = 1
//! trajectories = 2000        # noisy backend only
//! resamples = 200            # bootstrap, at least 100
//! ramsey_points = 36
//! output = "out"
//!
//! [instance]
//! a_real = [[1.5, 0.5], [0.5, 1.5]]
//! a_imag = [[0.0, 0.0], [0.0, 0.0]]
//! c = 1.0
//!
//! # optional: replaces the 18 default input states, (θ, φ) in radians
//! # inputs = [[0.0, 0.0], [3.14159, 0.0]]
//! ```

use std::path::{Path, PathBuf};

use hhl_core::device::DeviceParams;
use hhl_core::hhl::{BackendKind, LinearSystemInstance};
use hhl_core::linalg::{c64, CMatrix};
use hhl_core::tomography::{InputStateSet, MIN_RESAMPLES};
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InstanceConfig {
    pub a_real: [[f64; 2]; 2],
    pub a_imag: [[f64; 2]; 2],
    pub c: f64,
}

impl Default for InstanceConfig {
    fn default() -> Self {
        Self { a_real: [[1.5, 0.5], [0.5, 1.5]], a_imag: [[0.0; 2]; 2], c: 1.0 }
    }
}

impl InstanceConfig {
    pub fn matrix(&self) -> CMatrix {
        CMatrix::from_fn(2, 2, |r, c| c64(self.a_real[r][c], self.a_imag[r][c]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub device: Option<PathBuf>,
    pub backend: BackendKind,
    pub shots: u64,
    pub exact: bool,
    pub seed: u64,
    pub trajectories: usize,
    pub resamples: usize,
    pub ramsey_points: usize,
    pub output: PathBuf,
    pub instance: InstanceConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inputs: Option<Vec<[f64; 2]>>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            device: None,
            backend: BackendKind::DeviceNoisy,
            shots: 10_000,
            exact: false,
            seed: 1,
            trajectories: 2000,
            resamples: 200,
            ramsey_points: 36,
            output: PathBuf::from("out"),
            instance: InstanceConfig::default(),
            inputs: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Reads a config file; a relative device path is taken relative to it.
    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let (Some(dev), Some(dir)) = (&cfg.device, path.parent()) {
            if dev.is_relative() {
                cfg.device = Some(dir.join(dev));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if let Some(dev) = &self.device {
            if !dev.is_file() {
                return bad(format!("device file {} not found", dev.display()));
            }
        }
        if !self.exact && self.shots == 0 {
            return bad("shots must be positive unless exact = true".into());
        }
        if self.backend == BackendKind::DeviceNoisy && self.trajectories == 0 {
            return bad("the noisy backend needs trajectories > 0".into());
        }
        if self.resamples < MIN_RESAMPLES {
            return bad(format!("resamples must be at least {MIN_RESAMPLES}"));
        }
        if self.ramsey_points < 3 {
            return bad("ramsey_points must be at least 3".into());
        }
        self.input_set()?;
        self.device_params()?;
        self.instance()?;
        Ok(())
    }

    pub fn device_params(&self) -> Result<DeviceParams, HarnessError> {
        let p = match &self.device {
            Some(path) => DeviceParams::from_file(path),
            None => Ok(DeviceParams::default()),
        };
        p.and_then(|p| p.validate().map(|_| p)).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn input_set(&self) -> Result<InputStateSet, HarnessError> {
        match &self.inputs {
            None => Ok(InputStateSet::default_18()),
            Some(list) => InputStateSet::new(list.iter().map(|a| (a[0], a[1])).collect())
                .map_err(|e| HarnessError::Config(e.to_string())),
        }
    }

    /// The configured system with `b` set to the first input state.
    pub fn instance(&self) -> Result<LinearSystemInstance, HarnessError> {
        let b = self.input_set()?.vectors().remove(0);
        LinearSystemInstance::new(self.instance.matrix(), b, self.instance.c)
            .map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn shots(&self) -> Option<u64> {
        (!self.exact).then_some(self.shots)
    }
}
