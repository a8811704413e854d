use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::control::{ControllerGains, DEFAULT_CONTROL_RATE};
use crate::experiments::{BenchHardware, Configuration, ExperimentConfig, ExperimentError, SimulationSettings};
use crate::plant::NonlinearitySwitches;
use crate::signals::ChirpSpec;

pub const SCHEMA_VERSION: u32 = 1;

/// On-disk run description. Every field but `schema_version` is optional
/// and falls back to the bench defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema_version: u32,
    #[serde(default = "all_configurations")]
    pub configurations: Vec<Configuration>,
    #[serde(default = "crate::experiments::default_amplitudes", rename = "torque_amplitudes_nm")]
    pub torque_amplitudes: Vec<f64>,
    #[serde(default)]
    pub chirp: ChirpSpec,
    #[serde(default = "one")]
    pub trials_per_amplitude: usize,
    #[serde(default)]
    pub random_seed: u64,
    #[serde(default)]
    pub hardware: BenchHardware,
    #[serde(default)]
    pub nonlinearities: NonlinearitySwitches,
    #[serde(default)]
    pub controller: ControllerGains,
    #[serde(default = "default_control_rate", rename = "control_rate_hz")]
    pub control_rate: f64,
    #[serde(default)]
    pub simulation: SimulationSettings,
}

fn all_configurations() -> Vec<Configuration> {
    Configuration::ALL.to_vec()
}

fn one() -> usize {
    1
}

fn default_control_rate() -> f64 {
    DEFAULT_CONTROL_RATE
}

impl Default for ConfigFile {
    fn default() -> Self {
        serde_json::from_str(r#"{"schema_version": 1}"#).expect("defaults parse")
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("malformed config {path}: {source}")]
    Parse { path: String, source: serde_json::Error },
    #[error("unsupported schema_version {found}; this build reads version {SCHEMA_VERSION}")]
    Schema { found: u32 },
    #[error("config lists no configurations")]
    NoConfigurations,
    #[error("{configuration}: {source}")]
    Invalid {
        configuration: &'static str,
        source: ExperimentError,
    },
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let display = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: display.clone(),
            source,
        })?;
        let file: ConfigFile =
            serde_json::from_str(&text).map_err(|source| ConfigError::Parse { path: display, source })?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::Schema {
                found: file.schema_version,
            });
        }
        Ok(file)
    }

    /// One validated experiment per listed configuration.
    pub fn experiments(&self) -> Result<Vec<ExperimentConfig>, ConfigError> {
        if self.configurations.is_empty() {
            return Err(ConfigError::NoConfigurations);
        }
        self.configurations
            .iter()
            .map(|&configuration| {
                let config = ExperimentConfig {
                    configuration,
                    torque_amplitudes: self.torque_amplitudes.clone(),
                    chirp: self.chirp,
                    trials_per_amplitude: self.trials_per_amplitude,
                    hardware: self.hardware.clone(),
                    switches: self.nonlinearities,
                    gains: self.controller,
                    control_rate: self.control_rate,
                    random_seed: self.random_seed,
                    settings: self.simulation.clone(),
                };
                config.validate().map_err(|source| ConfigError::Invalid {
                    configuration: configuration.as_str(),
                    source,
                })?;
                Ok(config)
            })
            .collect()
    }
}
