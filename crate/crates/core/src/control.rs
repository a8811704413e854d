//! Discrete force controller: feedforward plus proportional feedback on the
//! torque error, updated at a fixed control rate and held between ticks.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::plant::SpringParams;
use crate::signals::quantize;

/// Rate actually achieved by the bench controller.
pub const DEFAULT_CONTROL_RATE: f64 = 603.0;

/// Slowest closed-loop time constant identified from a force step, in s.
pub const BENCH_SLOWEST_TIME_CONSTANT: f64 = 0.04178;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("DomainError: {0}")]
    Domain(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerGains {
    pub feedforward_gain: f64,
    pub feedback_gain: f64,
    /// Reserved; the bench ran proportional-only.
    #[serde(default)]
    pub derivative_gain: f64,
}

impl Default for ControllerGains {
    fn default() -> Self {
        Self {
            feedforward_gain: 1.0,
            feedback_gain: 1.0,
            derivative_gain: 0.0,
        }
    }
}

impl ControllerGains {
    pub fn validate(&self) -> Result<(), ControlError> {
        if !self.feedforward_gain.is_finite() || !self.feedback_gain.is_finite() {
            return Err(ControlError::Domain("controller gains must be finite".into()));
        }
        if self.feedback_gain < 0.0 {
            return Err(ControlError::Domain(format!(
                "feedback gain must be >= 0, got {}",
                self.feedback_gain
            )));
        }
        if self.derivative_gain != 0.0 {
            return Err(ControlError::Domain("derivative gain is reserved and must be 0".into()));
        }
        Ok(())
    }
}

/// Where the feedback torque comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackSource {
    None,
    SeaDeflection,
    RigidSensor,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopConfig {
    pub control_rate: f64,
    pub feedback_source: FeedbackSource,
}

impl LoopConfig {
    pub fn validate(&self) -> Result<(), ControlError> {
        if !(self.control_rate > 0.0) || !self.control_rate.is_finite() {
            return Err(ControlError::Domain(format!(
                "control rate must be > 0, got {}",
                self.control_rate
            )));
        }
        Ok(())
    }
}

/// `u = C_ff r + C_fb (r - y)`.
pub fn control_step(reference_torque: f64, measured_torque: f64, gains: &ControllerGains) -> f64 {
    gains.feedforward_gain * reference_torque + gains.feedback_gain * (reference_torque - measured_torque)
}

/// Lowest control rate giving 20 samples per slowest time constant.
pub fn min_control_rate(slowest_time_constant: f64) -> Result<f64, ControlError> {
    if !(slowest_time_constant > 0.0) {
        return Err(ControlError::Domain(format!(
            "time constant must be > 0, got {slowest_time_constant}"
        )));
    }
    Ok(20.0 / slowest_time_constant)
}

/// Torque from an encoder reading of the series element deflection.
pub fn deflection_to_torque(deflection: f64, spring: &SpringParams, angle_resolution: f64) -> f64 {
    spring.stiffness * quantize(deflection, angle_resolution)
}

/// Closed- to open-loop natural frequency ratio under proportional gain `kp`.
pub fn predicted_frequency_ratio(feedback_gain: f64) -> Result<f64, ControlError> {
    if feedback_gain < -1.0 || feedback_gain.is_nan() {
        return Err(ControlError::Domain(format!(
            "feedback gain must be >= -1, got {feedback_gain}"
        )));
    }
    Ok((feedback_gain + 1.0).sqrt())
}

/// Zero-order-held controller output for one simulation loop.
#[derive(Debug, Clone)]
pub struct ForceController {
    pub gains: ControllerGains,
    pub config: LoopConfig,
    held_command: f64,
    ticks: u64,
}

impl ForceController {
    pub fn new(gains: ControllerGains, config: LoopConfig) -> Self {
        Self {
            gains,
            config,
            held_command: 0.0,
            ticks: 0,
        }
    }

    pub fn period(&self) -> f64 {
        1.0 / self.config.control_rate
    }

    /// Time of the next control update.
    pub fn next_tick_time(&self) -> f64 {
        self.ticks as f64 / self.config.control_rate
    }

    /// Compute and hold a new command; `measured_torque` is ignored when the
    /// loop has no feedback source.
    pub fn tick(&mut self, reference_torque: f64, measured_torque: f64) -> f64 {
        self.held_command = match self.config.feedback_source {
            FeedbackSource::None => self.gains.feedforward_gain * reference_torque,
            _ => control_step(reference_torque, measured_torque, &self.gains),
        };
        self.ticks += 1;
        self.held_command
    }

    pub fn command(&self) -> f64 {
        self.held_command
    }
}
