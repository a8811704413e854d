//! Test-rig orchestration: the four bench configurations, torque-amplitude
//! sweeps, summary statistics, regime fits and virtual calibration
//! procedures.

mod analysis;
mod config;
mod measurements;
mod rig;

pub use analysis::{
    fit_saturation_regime, peak_acceleration_requirement, peak_velocity_requirement, predicted_saturation_constant,
    summary_stats, SaturationFit, SummaryStats, BENCH_REFERENCE,
};
pub use config::{default_amplitudes, BenchHardware, Configuration, ExperimentConfig, SimulationSettings};
pub use measurements::{virtual_backlash_measurement, virtual_encoder_calibration, EncoderCalibration};
pub use rig::{
    run_configuration, run_trial, simulate_run, torque_sweep, Analysis, RunRecord, SweepCurve, SweepPoint, TrialRun,
    TrialStatus,
};

use thiserror::Error;

use crate::control::ControlError;
use crate::plant::PlantError;
use crate::signals::SignalError;
use crate::sysid::SysidError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error(transparent)]
    Plant(#[from] PlantError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Sysid(#[from] SysidError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
    #[error("NoMotion: peak output torque {peak:.3e} Nm never left the stiction band")]
    NoMotion { peak: f64 },
    #[error("EmptyCurve: no successful amplitude in the sweep")]
    EmptyCurve,
    #[error("InsufficientPoints: {found} amplitudes above the regime split, need {needed}")]
    InsufficientPoints { found: usize, needed: usize },
    #[error("DomainError: {0}")]
    Domain(String),
}

impl ExperimentError {
    /// Short error-case name, used in CLI diagnostics and sweep CSVs.
    pub fn case_name(&self) -> &'static str {
        match self {
            ExperimentError::Plant(PlantError::SpringOverload { .. }) => "SpringOverload",
            ExperimentError::Plant(PlantError::NumericalDivergence { .. }) => "NumericalDivergence",
            ExperimentError::Plant(_) => "PlantError",
            ExperimentError::Signal(_) => "SignalError",
            ExperimentError::Sysid(SysidError::InsufficientData(_)) => "InsufficientData",
            ExperimentError::Sysid(SysidError::ZeroInputPower { .. }) => "ZeroInputPower",
            ExperimentError::Sysid(SysidError::EmptyBode) => "EmptyBode",
            ExperimentError::Sysid(_) => "SysidError",
            ExperimentError::Control(_) => "ControlError",
            ExperimentError::InvalidConfig(_) => "InvalidConfig",
            ExperimentError::NoMotion { .. } => "NoMotion",
            ExperimentError::EmptyCurve => "EmptyCurve",
            ExperimentError::InsufficientPoints { .. } => "InsufficientPoints",
            ExperimentError::Domain(_) => "DomainError",
        }
    }

    /// Whether the error is a configuration problem rather than a run-time one.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            ExperimentError::InvalidConfig(_)
                | ExperimentError::Plant(PlantError::InvalidParams(_))
                | ExperimentError::Signal(SignalError::InvalidChirp(_))
                | ExperimentError::Control(_)
        )
    }
}
