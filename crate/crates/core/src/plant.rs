//! Fixed-load bench model: motor rotor, gear-train with backlash, series
//! compliance to ground.
//!
//! The rotor is integrated in its own frame. Motor torque and spring torque
//! are output-referred and divided by the gear ratio before they reach the
//! rotor; friction acts on the rotor directly. The output shaft is massless,
//! so with the compliance grounded the gear play collapses to a dead-zone
//! centred on the spring's rest position.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default plant integration step.
pub const DEFAULT_DT: f64 = 2.0e-5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlantError {
    #[error("SpringOverload: {torque:.3} Nm exceeds the {limit:.3} Nm element limit")]
    SpringOverload { torque: f64, limit: f64 },
    #[error("NumericalDivergence: non-finite state at t = {time:.6} s")]
    NumericalDivergence { time: f64 },
    #[error("DomainError: {0}")]
    Domain(String),
    #[error("invalid plant parameters: {0}")]
    InvalidParams(String),
}

/// Motor, driver and gear-train description.
///
/// Friction and inertia are rotor-side; speeds, torques and backlash are
/// output-side unless noted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotorParams {
    #[serde(rename = "torque_constant_nm_per_a")]
    pub torque_constant: f64,
    #[serde(rename = "rotor_inertia_kg_m2")]
    pub rotor_inertia: f64,
    pub gear_ratio: f64,
    #[serde(rename = "electrical_time_constant_s")]
    pub electrical_time_constant: f64,
    #[serde(rename = "stall_torque_nm")]
    pub stall_torque: f64,
    /// Output speed at which the available torque reaches zero.
    #[serde(rename = "no_load_speed_rad_per_s")]
    pub no_load_speed: f64,
    #[serde(rename = "viscous_damping_nm_s_per_rad")]
    pub viscous_damping: f64,
    #[serde(rename = "coulomb_friction_nm")]
    pub coulomb_friction: f64,
    #[serde(rename = "static_friction_nm")]
    pub static_friction: f64,
    #[serde(rename = "stiction_velocity_threshold_rad_per_s")]
    pub stiction_velocity_threshold: f64,
    #[serde(rename = "backlash_total_rad")]
    pub backlash_total: f64,
    #[serde(rename = "current_limit_a")]
    pub current_limit: f64,
    #[serde(rename = "supply_voltage_v")]
    pub supply_voltage: f64,
}

impl MotorParams {
    /// Bench-measured RMD X8 V2 values (12 V supply, 6 A limit).
    pub fn rmd_x8_v2() -> Self {
        let torque_constant = 1.393;
        let supply_voltage = 12.0;
        Self {
            torque_constant,
            rotor_inertia: 0.00026,
            gear_ratio: 9.0,
            electrical_time_constant: 0.42e-4,
            stall_torque: 9.0,
            no_load_speed: supply_voltage / torque_constant,
            viscous_damping: 0.0324,
            coulomb_friction: 0.02,
            static_friction: 0.044,
            stiction_velocity_threshold: 1.0e-3,
            backlash_total: 0.3336_f64.to_radians(),
            current_limit: 6.0,
            supply_voltage,
        }
    }

    /// Rotor inertia referred through the gear ratio squared.
    pub fn reflected_inertia(&self) -> f64 {
        self.rotor_inertia * self.gear_ratio * self.gear_ratio
    }

    /// Output torque at which the driver's current limit binds.
    pub fn current_limited_torque(&self) -> f64 {
        self.torque_constant * self.current_limit * self.gear_ratio
    }

    /// Static friction seen at the output shaft.
    pub fn static_friction_at_output(&self) -> f64 {
        self.static_friction * self.gear_ratio
    }

    pub fn validate(&self) -> Result<(), PlantError> {
        let fields = [
            ("torque_constant", self.torque_constant),
            ("rotor_inertia", self.rotor_inertia),
            ("electrical_time_constant", self.electrical_time_constant),
            ("stall_torque", self.stall_torque),
            ("no_load_speed", self.no_load_speed),
            ("viscous_damping", self.viscous_damping),
            ("coulomb_friction", self.coulomb_friction),
            ("static_friction", self.static_friction),
            ("stiction_velocity_threshold", self.stiction_velocity_threshold),
            ("backlash_total", self.backlash_total),
            ("current_limit", self.current_limit),
            ("supply_voltage", self.supply_voltage),
        ];
        for (name, value) in fields {
            if !value.is_finite() || value < 0.0 {
                return Err(PlantError::InvalidParams(format!(
                    "{name} must be finite and non-negative, got {value}"
                )));
            }
        }
        if !(self.gear_ratio >= 1.0) {
            return Err(PlantError::InvalidParams(format!(
                "gear_ratio must be >= 1, got {}",
                self.gear_ratio
            )));
        }
        if self.rotor_inertia == 0.0 {
            return Err(PlantError::InvalidParams("rotor_inertia must be > 0".into()));
        }
        if self.static_friction < self.coulomb_friction {
            return Err(PlantError::InvalidParams(
                "static_friction must be >= coulomb_friction".into(),
            ));
        }
        Ok(())
    }
}

/// Torsional compliance between the gear output and ground.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpringParams {
    #[serde(rename = "stiffness_nm_per_rad")]
    pub stiffness: f64,
    #[serde(rename = "torque_limit_nm", default)]
    pub torque_limit: Option<f64>,
}

impl SpringParams {
    /// Laser-cut torsional disc used as the series elastic element.
    pub fn se_element() -> Self {
        Self {
            stiffness: 2155.4,
            torque_limit: None,
        }
    }

    /// Six-axis force sensor treated as a stiff torsional element.
    pub fn ati_gamma() -> Self {
        Self {
            stiffness: 16_400.0,
            torque_limit: Some(82.0),
        }
    }

    /// Two elements carrying the same torque.
    pub fn in_series(&self, other: &SpringParams) -> SpringParams {
        let stiffness = self.stiffness * other.stiffness / (self.stiffness + other.stiffness);
        let torque_limit = match (self.torque_limit, other.torque_limit) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        SpringParams {
            stiffness,
            torque_limit,
        }
    }

    pub fn validate(&self) -> Result<(), PlantError> {
        if !(self.stiffness > 0.0) || !self.stiffness.is_finite() {
            return Err(PlantError::InvalidParams(format!(
                "spring stiffness must be > 0, got {}",
                self.stiffness
            )));
        }
        if let Some(limit) = self.torque_limit {
            if !(limit > 0.0) {
                return Err(PlantError::InvalidParams(format!(
                    "spring torque limit must be > 0, got {limit}"
                )));
            }
        }
        Ok(())
    }
}

/// Measurement chain characteristics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorParams {
    #[serde(rename = "torque_resolution_nm")]
    pub torque_resolution: f64,
    #[serde(rename = "sample_rate_hz")]
    pub sample_rate: f64,
    #[serde(rename = "range_nm")]
    pub range: f64,
    #[serde(rename = "series_stiffness_nm_per_rad", default)]
    pub series_stiffness: Option<f64>,
    #[serde(rename = "angle_resolution_rad")]
    pub angle_resolution: f64,
}

impl SensorParams {
    pub fn ati_gamma() -> Self {
        Self {
            torque_resolution: 0.125,
            sample_rate: 1400.0,
            range: 10.0,
            series_stiffness: Some(16_400.0),
            angle_resolution: 0.125 / 16_400.0,
        }
    }

    /// Magnetic tape encoder reading the series element deflection.
    pub fn deflection_encoder(spring: &SpringParams) -> Self {
        let angle_resolution = 1.109e-5;
        Self {
            torque_resolution: angle_resolution * spring.stiffness,
            sample_rate: 10_000.0,
            range: 1.0e9,
            series_stiffness: None,
            angle_resolution,
        }
    }

    pub fn validate(&self) -> Result<(), PlantError> {
        if !(self.torque_resolution > 0.0) || !(self.angle_resolution > 0.0) {
            return Err(PlantError::InvalidParams("sensor resolutions must be > 0".into()));
        }
        if !(self.sample_rate > 0.0) || !(self.range > 0.0) {
            return Err(PlantError::InvalidParams(
                "sensor sample rate and range must be > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Which nonlinear effects the integrator applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearitySwitches {
    pub backlash_enabled: bool,
    pub stiction_enabled: bool,
    pub saturation_enabled: bool,
    pub quantization_enabled: bool,
}

impl NonlinearitySwitches {
    pub const ALL: Self = Self {
        backlash_enabled: true,
        stiction_enabled: true,
        saturation_enabled: true,
        quantization_enabled: true,
    };
    pub const LINEAR: Self = Self {
        backlash_enabled: false,
        stiction_enabled: false,
        saturation_enabled: false,
        quantization_enabled: false,
    };
}

impl Default for NonlinearitySwitches {
    fn default() -> Self {
        Self::ALL
    }
}

/// Motor plus the compliance chain it drives.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantParams {
    pub motor: MotorParams,
    pub spring: SpringParams,
}

impl PlantParams {
    pub fn validate(&self) -> Result<(), PlantError> {
        self.motor.validate()?;
        self.spring.validate()
    }

    /// Locked-output mode of the rotor against the compliance chain, in Hz.
    pub fn natural_frequency(&self) -> Result<f64, PlantError> {
        natural_frequency(self.motor.reflected_inertia(), self.spring.stiffness)
    }

    /// Largest step that keeps 20 samples per period of the stiffest mode.
    pub fn max_stable_dt(&self) -> Result<f64, PlantError> {
        Ok(1.0 / (20.0 * self.natural_frequency()?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlantState {
    /// Rotor angle, rotor frame.
    pub rotor_angle: f64,
    /// Rotor velocity, rotor frame.
    pub rotor_velocity: f64,
    /// Input minus output angle at the gear, output frame.
    pub gear_offset: f64,
    /// Output-referred motor torque after the electrical lag.
    pub lagged_torque: f64,
    pub time: f64,
}

impl PlantState {
    pub fn at_rest() -> Self {
        Self::default()
    }

    /// Gear input angle, output frame.
    pub fn input_angle(&self, motor: &MotorParams) -> f64 {
        self.rotor_angle / motor.gear_ratio
    }

    /// Gear output angle, which is also the deflection of the grounded chain.
    pub fn output_angle(&self, motor: &MotorParams) -> f64 {
        self.input_angle(motor) - self.gear_offset
    }

    pub fn output_velocity(&self, motor: &MotorParams) -> f64 {
        self.rotor_velocity / motor.gear_ratio
    }

    /// Rotor kinetic energy plus spring potential energy.
    pub fn energy(&self, params: &PlantParams) -> f64 {
        let deflection = self.output_angle(&params.motor);
        0.5 * params.motor.rotor_inertia * self.rotor_velocity * self.rotor_velocity
            + 0.5 * params.spring.stiffness * deflection * deflection
    }
}

/// Torque the driver can deliver at the given output speed.
///
/// Available torque falls linearly from the stall torque at rest to zero
/// at the no-load speed; the current limit caps it independently.
pub fn torque_speed_envelope(commanded_torque: f64, output_velocity: f64, motor: &MotorParams) -> f64 {
    let speed_ratio = output_velocity.abs() / motor.no_load_speed;
    let available = if speed_ratio < 1.0 {
        motor.stall_torque * (1.0 - speed_ratio)
    } else {
        0.0
    };
    let limit = available.min(motor.current_limited_torque());
    commanded_torque.clamp(-limit, limit)
}

/// Result of moving the input side of a play element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BacklashOutput {
    /// Output displacement caused by the input move.
    pub output_motion: f64,
    pub gear_offset: f64,
    pub engaged: bool,
}

/// Hysteretic play operator.
///
/// Moves the input by `input_motion` starting from `prior_gear_offset`
/// (input minus output angle). The output only follows once the input has
/// taken up the free play on one side; `engaged` reports flank contact.
pub fn backlash_transmission(input_motion: f64, prior_gear_offset: f64, backlash_total: f64) -> BacklashOutput {
    let half = 0.5 * backlash_total;
    let free = prior_gear_offset + input_motion;
    let gear_offset = free.clamp(-half, half);
    BacklashOutput {
        output_motion: free - gear_offset,
        gear_offset,
        engaged: gear_offset.abs() >= half,
    }
}

/// Grounded-spring dead-zone: output angle for a given input angle.
pub fn grounded_deadzone(input_angle: f64, backlash_total: f64) -> f64 {
    let half = 0.5 * backlash_total;
    if input_angle > half {
        input_angle - half
    } else if input_angle < -half {
        input_angle + half
    } else {
        0.0
    }
}

/// Karnopp stick-slip friction, applied in whatever frame `motor` describes.
pub fn friction_torque(applied_torque: f64, velocity: f64, motor: &MotorParams) -> f64 {
    let in_stick_band = velocity.abs() < motor.stiction_velocity_threshold;
    if in_stick_band && applied_torque.abs() <= motor.static_friction {
        return 0.0;
    }
    let direction = if in_stick_band {
        applied_torque.signum()
    } else {
        velocity.signum()
    };
    applied_torque - motor.coulomb_friction * direction - motor.viscous_damping * velocity
}

/// Hooke's law. Reaching the rated limit counts as an overload.
pub fn spring_torque(deflection: f64, spring: &SpringParams) -> Result<f64, PlantError> {
    let torque = spring.stiffness * deflection;
    match spring.torque_limit {
        Some(limit) if torque.abs() >= limit => Err(PlantError::SpringOverload { torque, limit }),
        _ => Ok(torque),
    }
}

/// Undamped natural frequency `sqrt(k/J) / 2π` in Hz.
pub fn natural_frequency(reflected_inertia: f64, stiffness: f64) -> Result<f64, PlantError> {
    if !(reflected_inertia > 0.0) || !(stiffness > 0.0) {
        return Err(PlantError::Domain(format!(
            "natural frequency needs positive inertia and stiffness, got J = {reflected_inertia}, k = {stiffness}"
        )));
    }
    Ok((stiffness / reflected_inertia).sqrt() / (2.0 * PI))
}

/// Output torque carried by the grounded chain in `state`.
pub fn output_torque(state: &PlantState, params: &PlantParams) -> Result<f64, PlantError> {
    spring_torque(state.output_angle(&params.motor), &params.spring)
}

/// Advance the plant by one semi-implicit Euler step.
///
/// `command_torque` is output-referred.
pub fn step(
    state: &PlantState,
    command_torque: f64,
    dt: f64,
    params: &PlantParams,
    switches: NonlinearitySwitches,
) -> Result<PlantState, PlantError> {
    let motor = &params.motor;
    let ratio = motor.gear_ratio;

    let lag_weight = if motor.electrical_time_constant > 0.0 {
        1.0 - (-dt / motor.electrical_time_constant).exp()
    } else {
        1.0
    };
    let lagged_torque = state.lagged_torque + (command_torque - state.lagged_torque) * lag_weight;

    let delivered = if switches.saturation_enabled {
        torque_speed_envelope(lagged_torque, state.output_velocity(motor), motor)
    } else {
        lagged_torque
    };

    let load = output_torque(state, params)?;
    let applied = (delivered - load) / ratio;
    let velocity = state.rotor_velocity;

    let (net, stuck) = if switches.stiction_enabled {
        let net = friction_torque(applied, velocity, motor);
        let stuck = velocity.abs() < motor.stiction_velocity_threshold && applied.abs() <= motor.static_friction;
        (net, stuck)
    } else {
        (applied - motor.viscous_damping * velocity, false)
    };

    let mut rotor_velocity = velocity + net / motor.rotor_inertia * dt;
    if switches.stiction_enabled
        && (stuck || (rotor_velocity * velocity < 0.0 && applied.abs() <= motor.static_friction))
    {
        // Friction cannot reverse the motion on its own: the rotor sticks.
        rotor_velocity = 0.0;
    }
    let rotor_angle = state.rotor_angle + rotor_velocity * dt;

    let input_angle = rotor_angle / ratio;
    let output_angle = if switches.backlash_enabled {
        grounded_deadzone(input_angle, motor.backlash_total)
    } else {
        input_angle
    };

    let next = PlantState {
        rotor_angle,
        rotor_velocity,
        gear_offset: input_angle - output_angle,
        lagged_torque,
        time: state.time + dt,
    };
    if !(next.rotor_angle.is_finite() && next.rotor_velocity.is_finite() && next.lagged_torque.is_finite()) {
        return Err(PlantError::NumericalDivergence { time: next.time });
    }
    Ok(next)
}
