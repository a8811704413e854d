use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::control::{
    min_control_rate, ControllerGains, FeedbackSource, LoopConfig, BENCH_SLOWEST_TIME_CONSTANT, DEFAULT_CONTROL_RATE,
};
use crate::plant::{MotorParams, NonlinearitySwitches, PlantParams, SensorParams, SpringParams, DEFAULT_DT};
use crate::signals::ChirpSpec;
use crate::sysid::DEFAULT_DC_BINS;

/// The four fixed-load bench arrangements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Configuration {
    /// Motor straight into the force sensor, feedforward only.
    OriginalMotor,
    /// Series element fitted, feedforward only.
    PassiveSea,
    /// Series element with deflection-encoder feedback.
    ClosedLoopSea,
    /// Series element in line with the force sensor, sensor feedback.
    ClosedLoopRigidSensor,
}

impl Configuration {
    pub const ALL: [Configuration; 4] = [
        Configuration::OriginalMotor,
        Configuration::PassiveSea,
        Configuration::ClosedLoopSea,
        Configuration::ClosedLoopRigidSensor,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Configuration::OriginalMotor => "original_motor",
            Configuration::PassiveSea => "passive_sea",
            Configuration::ClosedLoopSea => "closed_loop_sea",
            Configuration::ClosedLoopRigidSensor => "closed_loop_rigid_sensor",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }

    /// Row label used in summary tables.
    pub fn label(&self) -> &'static str {
        match self {
            Configuration::OriginalMotor => "Motor",
            Configuration::PassiveSea => "Open Loop SEA",
            Configuration::ClosedLoopSea => "Closed Loop SEA",
            Configuration::ClosedLoopRigidSensor => "Closed Loop ATI",
        }
    }

    pub fn feedback_source(&self) -> FeedbackSource {
        match self {
            Configuration::OriginalMotor | Configuration::PassiveSea => FeedbackSource::None,
            Configuration::ClosedLoopSea => FeedbackSource::SeaDeflection,
            Configuration::ClosedLoopRigidSensor => FeedbackSource::RigidSensor,
        }
    }

    fn index(&self) -> u64 {
        *self as u64
    }
}

/// Physical parts available on the bench.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchHardware {
    pub motor: MotorParams,
    pub se_spring: SpringParams,
    /// The force sensor as a compliant element of the load path.
    pub force_sensor_element: SpringParams,
    pub force_sensor: SensorParams,
    #[serde(rename = "encoder_angle_resolution_rad")]
    pub encoder_angle_resolution: f64,
}

impl Default for BenchHardware {
    fn default() -> Self {
        Self {
            motor: MotorParams::rmd_x8_v2(),
            se_spring: SpringParams::se_element(),
            force_sensor_element: SpringParams::ati_gamma(),
            force_sensor: SensorParams::ati_gamma(),
            encoder_angle_resolution: 1.109e-5,
        }
    }
}

/// Integration, recording and estimator settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSettings {
    #[serde(rename = "dt_s")]
    pub dt: f64,
    /// Rate at which reference and output torque are logged for analysis.
    #[serde(rename = "record_rate_hz")]
    pub record_rate: f64,
    /// Standard deviation of additive measurement noise (0 disables it).
    #[serde(rename = "sensor_noise_nm")]
    pub sensor_noise: f64,
    /// Welch segment length as a fraction of the record.
    pub frf_segment_fraction: f64,
    pub frf_overlap: f64,
    pub dc_bins: usize,
    /// Used to validate the control rate.
    #[serde(rename = "slowest_time_constant_s")]
    pub slowest_time_constant: f64,
}

impl Default for SimulationSettings {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            record_rate: 1400.0,
            sensor_noise: 0.0,
            frf_segment_fraction: 0.25,
            frf_overlap: 0.5,
            dc_bins: DEFAULT_DC_BINS,
            slowest_time_constant: BENCH_SLOWEST_TIME_CONSTANT,
        }
    }
}

/// Everything needed to run one configuration across an amplitude sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub configuration: Configuration,
    pub torque_amplitudes: Vec<f64>,
    /// Sweep template; its amplitude is replaced per run.
    pub chirp: ChirpSpec,
    pub trials_per_amplitude: usize,
    pub hardware: BenchHardware,
    pub switches: NonlinearitySwitches,
    pub gains: ControllerGains,
    pub control_rate: f64,
    pub random_seed: u64,
    pub settings: SimulationSettings,
}

/// 0.25 Nm to 6.0 Nm in 0.25 Nm steps.
pub fn default_amplitudes() -> Vec<f64> {
    (1..=24).map(|i| 0.25 * i as f64).collect()
}

impl ExperimentConfig {
    /// Bench defaults for one configuration.
    pub fn bench(configuration: Configuration) -> Self {
        Self {
            configuration,
            torque_amplitudes: default_amplitudes(),
            chirp: ChirpSpec::default(),
            trials_per_amplitude: 1,
            hardware: BenchHardware::default(),
            switches: NonlinearitySwitches::ALL,
            gains: ControllerGains::default(),
            control_rate: DEFAULT_CONTROL_RATE,
            random_seed: 0,
            settings: SimulationSettings::default(),
        }
    }

    pub fn with_configuration(&self, configuration: Configuration) -> Self {
        Self {
            configuration,
            ..self.clone()
        }
    }

    pub fn loop_config(&self) -> LoopConfig {
        LoopConfig {
            control_rate: self.control_rate,
            feedback_source: self.configuration.feedback_source(),
        }
    }

    /// Compliance chain between the gear output and ground.
    pub fn load_path(&self) -> SpringParams {
        let hw = &self.hardware;
        match self.configuration {
            Configuration::OriginalMotor => hw.force_sensor_element.clone(),
            Configuration::PassiveSea | Configuration::ClosedLoopSea => hw.se_spring.clone(),
            Configuration::ClosedLoopRigidSensor => hw.se_spring.in_series(&hw.force_sensor_element),
        }
    }

    /// Quiet lead-in (and ring-down) around the sweep, long enough that the
    /// first and last instants of the sweep sit at the centre of a Welch
    /// segment rather than under the window's tapered edge.
    pub fn lead_time(&self) -> f64 {
        let f = self.settings.frf_segment_fraction;
        self.chirp.duration * f / (2.0 * (1.0 - f))
    }

    pub fn plant(&self) -> PlantParams {
        PlantParams {
            motor: self.hardware.motor.clone(),
            spring: self.load_path(),
        }
    }

    /// Stable seed for one (amplitude, trial) run.
    pub(crate) fn run_seed(&self, amplitude: f64, trial: usize) -> u64 {
        let mut x = self.random_seed
            ^ self.configuration.index().wrapping_mul(0x9E37_79B9_7F4A_7C15)
            ^ amplitude.to_bits().wrapping_mul(0xBF58_476D_1CE4_E5B9)
            ^ (trial as u64).wrapping_mul(0x94D0_49BB_1331_11EB);
        // splitmix64 finaliser
        x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        x ^ (x >> 31)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let invalid = |msg: String| Err(ExperimentError::InvalidConfig(msg));
        let hw = &self.hardware;
        hw.motor.validate()?;
        hw.se_spring.validate()?;
        hw.force_sensor_element.validate()?;
        hw.force_sensor.validate()?;
        if !(hw.encoder_angle_resolution > 0.0) {
            return invalid("encoder angle resolution must be > 0".into());
        }
        self.chirp.validate()?;
        self.gains.validate()?;
        self.loop_config().validate()?;

        if self.torque_amplitudes.is_empty() {
            return invalid("at least one torque amplitude is required".into());
        }
        if self.torque_amplitudes.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return invalid("torque amplitudes must be positive".into());
        }
        if self.torque_amplitudes.windows(2).any(|w| !(w[1] > w[0])) {
            return invalid("torque amplitudes must be strictly ascending".into());
        }
        if self.trials_per_amplitude == 0 {
            return invalid("trials_per_amplitude must be >= 1".into());
        }

        let s = &self.settings;
        if !(s.dt > 0.0) {
            return invalid(format!("dt must be > 0, got {}", s.dt));
        }
        let max_dt = self.plant().max_stable_dt()?;
        if s.dt > max_dt {
            return invalid(format!(
                "dt = {} s exceeds 1/(20 f_n) = {max_dt:.3e} s for this load path",
                s.dt
            ));
        }
        let min_rate = min_control_rate(s.slowest_time_constant)?;
        if self.control_rate < min_rate {
            return invalid(format!(
                "control rate {} Hz is below the {min_rate:.1} Hz minimum",
                self.control_rate
            ));
        }
        for (name, rate) in [
            ("control", self.control_rate),
            ("record", s.record_rate),
            ("sensor", hw.force_sensor.sample_rate),
        ] {
            if !(rate > 0.0) || rate * s.dt > 1.0 + 1e-12 {
                return invalid(format!("{name} rate {rate} Hz must be positive and at most 1/dt"));
            }
        }
        if self.chirp.end_frequency >= 0.5 * s.record_rate {
            return invalid(format!(
                "sweep end {} Hz must lie below the record Nyquist frequency {} Hz",
                self.chirp.end_frequency,
                0.5 * s.record_rate
            ));
        }
        // Above 0.4 a 50% overlap cannot yield four segments.
        if !(s.frf_segment_fraction > 0.0 && s.frf_segment_fraction <= 0.4) {
            return invalid("frf_segment_fraction must lie in (0, 0.4]".into());
        }
        if !(0.0..1.0).contains(&s.frf_overlap) {
            return invalid("frf_overlap must lie in [0, 1)".into());
        }
        if s.dc_bins == 0 {
            return invalid("dc_bins must be >= 1".into());
        }
        if !(s.sensor_noise >= 0.0) {
            return invalid("sensor_noise must be >= 0".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bench_defaults_validate() {
        for c in Configuration::ALL {
            ExperimentConfig::bench(c).validate().unwrap();
        }
    }

    #[test]
    fn default_amplitude_grid() {
        let a = default_amplitudes();
        assert_eq!(a.len(), 24);
        assert_eq!(a[0], 0.25);
        assert_eq!(a[23], 6.0);
    }

    #[test]
    fn load_paths_per_configuration() {
        let k = |c| ExperimentConfig::bench(c).load_path().stiffness;
        assert_eq!(k(Configuration::OriginalMotor), 16_400.0);
        assert_eq!(k(Configuration::PassiveSea), 2155.4);
        assert_eq!(k(Configuration::ClosedLoopSea), 2155.4);
        assert!((k(Configuration::ClosedLoopRigidSensor) - 1905.028).abs() < 0.001);
    }

    #[test]
    fn slow_controller_is_rejected() {
        let mut c = ExperimentConfig::bench(Configuration::ClosedLoopSea);
        c.control_rate = 400.0;
        assert!(matches!(c.validate(), Err(ExperimentError::InvalidConfig(_))));
    }

    #[test]
    fn coarse_step_is_rejected() {
        let mut c = ExperimentConfig::bench(Configuration::OriginalMotor);
        c.settings.dt = 1e-3;
        assert!(c.validate().is_err());
    }

    #[test]
    fn unsorted_amplitudes_are_rejected() {
        let mut c = ExperimentConfig::bench(Configuration::PassiveSea);
        c.torque_amplitudes = vec![1.0, 0.5];
        assert!(c.validate().is_err());
    }

    #[test]
    fn run_seeds_differ() {
        let c = ExperimentConfig::bench(Configuration::PassiveSea);
        assert_ne!(c.run_seed(0.25, 0), c.run_seed(0.25, 1));
        assert_ne!(c.run_seed(0.25, 0), c.run_seed(0.5, 0));
        assert_eq!(c.run_seed(1.5, 2), c.run_seed(1.5, 2));
    }

    #[test]
    fn configuration_names_round_trip() {
        for c in Configuration::ALL {
            assert_eq!(Configuration::parse(c.as_str()), Some(c));
        }
        assert_eq!(Configuration::parse("bogus"), None);
    }
}
