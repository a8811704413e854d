//! Excitation, sampling and quantization.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignalError {
    #[error("time {t} s lies outside the sweep [0, {duration}] s")]
    OutOfRange { t: f64, duration: f64 },
    #[error("UpsampleRequested: target rate {target} Hz exceeds source rate {source_rate} Hz")]
    UpsampleRequested { target: f64, source_rate: f64 },
    #[error("invalid chirp: {0}")]
    InvalidChirp(String),
    #[error("invalid time series: {0}")]
    InvalidSeries(String),
}

/// Linear frequency sweep `T_max sin(2π(f0 t + (f1 - f0) t² / 2T))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChirpSpec {
    #[serde(rename = "amplitude_nm")]
    pub amplitude: f64,
    #[serde(rename = "start_frequency_hz")]
    pub start_frequency: f64,
    #[serde(rename = "end_frequency_hz")]
    pub end_frequency: f64,
    #[serde(rename = "duration_s")]
    pub duration: f64,
}

impl Default for ChirpSpec {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            start_frequency: 0.1,
            end_frequency: 60.0,
            duration: 120.0,
        }
    }
}

impl ChirpSpec {
    pub fn with_amplitude(self, amplitude: f64) -> Self {
        Self { amplitude, ..self }
    }

    pub fn validate(&self) -> Result<(), SignalError> {
        if !(self.amplitude > 0.0) {
            return Err(SignalError::InvalidChirp(format!(
                "amplitude must be > 0, got {}",
                self.amplitude
            )));
        }
        if !(self.start_frequency >= 0.0 && self.start_frequency <= self.end_frequency) {
            return Err(SignalError::InvalidChirp(format!(
                "need 0 <= f0 <= f1, got f0 = {}, f1 = {}",
                self.start_frequency, self.end_frequency
            )));
        }
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(SignalError::InvalidChirp(format!(
                "duration must be > 0, got {}",
                self.duration
            )));
        }
        Ok(())
    }

    /// Phase argument in cycles at time `t` (no range check).
    pub fn phase_cycles(&self, t: f64) -> f64 {
        self.start_frequency * t + (self.end_frequency - self.start_frequency) / (2.0 * self.duration) * t * t
    }

    fn check_time(&self, t: f64) -> Result<(), SignalError> {
        if t >= 0.0 && t <= self.duration {
            Ok(())
        } else {
            Err(SignalError::OutOfRange {
                t,
                duration: self.duration,
            })
        }
    }
}

pub fn chirp(t: f64, spec: &ChirpSpec) -> Result<f64, SignalError> {
    spec.check_time(t)?;
    Ok(spec.amplitude * (2.0 * PI * spec.phase_cycles(t)).sin())
}

pub fn instantaneous_frequency(t: f64, spec: &ChirpSpec) -> Result<f64, SignalError> {
    spec.check_time(t)?;
    if t == spec.duration {
        return Ok(spec.end_frequency);
    }
    Ok(spec.start_frequency + (spec.end_frequency - spec.start_frequency) * t / spec.duration)
}

/// Nearest multiple of `resolution`, ties away from zero. A zero
/// resolution passes the value through.
pub fn quantize(value: f64, resolution: f64) -> f64 {
    if resolution <= 0.0 {
        return value;
    }
    (value / resolution).round() * resolution
}

/// Uniformly sampled signal.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub dt: f64,
    pub start_time: f64,
    pub samples: Vec<f64>,
}

impl TimeSeries {
    pub fn new(dt: f64, start_time: f64, samples: Vec<f64>) -> Result<Self, SignalError> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(SignalError::InvalidSeries(format!("dt must be > 0, got {dt}")));
        }
        Ok(Self {
            dt,
            start_time,
            samples,
        })
    }

    /// Sample `f` at `n` points spaced by `dt` from zero.
    pub fn from_fn(dt: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self, SignalError> {
        Self::new(dt, 0.0, (0..n).map(|i| f(i as f64 * dt)).collect())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_rate(&self) -> f64 {
        1.0 / self.dt
    }

    pub fn time_at(&self, index: usize) -> f64 {
        self.start_time + index as f64 * self.dt
    }

    /// Largest absolute difference between consecutive samples.
    pub fn max_jump(&self) -> f64 {
        self.samples.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max)
    }
}

/// Zero-order-hold mapping from output sample index to source sample index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoldSchedule {
    source_per_target: f64,
}

impl HoldSchedule {
    pub fn new(source_dt: f64, target_rate: f64) -> Result<Self, SignalError> {
        let source_rate = 1.0 / source_dt;
        // Relative slack so that equal rates given as dt and 1/dt still match.
        if target_rate > source_rate * (1.0 + 1e-12) {
            return Err(SignalError::UpsampleRequested {
                target: target_rate,
                source_rate,
            });
        }
        if !(target_rate > 0.0) {
            return Err(SignalError::InvalidSeries(format!(
                "target rate must be > 0, got {target_rate}"
            )));
        }
        Ok(Self {
            source_per_target: source_rate / target_rate,
        })
    }

    /// Most recent source index at or before output sample `k`.
    pub fn source_index(&self, k: usize) -> usize {
        (k as f64 * self.source_per_target + 1e-9).floor() as usize
    }
}

/// Zero-order-hold decimation with no anti-alias filter.
pub fn sample_hold(series: &TimeSeries, target_rate: f64) -> Result<TimeSeries, SignalError> {
    let schedule = HoldSchedule::new(series.dt, target_rate)?;
    let samples = (0..)
        .map(|k| schedule.source_index(k))
        .take_while(|&i| i < series.len())
        .map(|i| series.samples[i])
        .collect();
    TimeSeries::new(1.0 / target_rate, series.start_time, samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sweep() -> ChirpSpec {
        ChirpSpec {
            amplitude: 1.0,
            start_frequency: 0.1,
            end_frequency: 50.0,
            duration: 60.0,
        }
    }

    #[test]
    fn chirp_starts_at_zero() {
        assert_eq!(chirp(0.0, &sweep()).unwrap(), 0.0);
    }

    #[test]
    fn equal_endpoints_degenerate_to_sine() {
        let spec = ChirpSpec {
            amplitude: 1.0,
            start_frequency: 1.0,
            end_frequency: 1.0,
            duration: 10.0,
        };
        assert!((chirp(0.25, &spec).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phase_at_end_of_sweep() {
        // 0.1 * 60 + 49.9 / 120 * 3600 = 6 + 1497 = 1503 cycles.
        assert!((sweep().phase_cycles(60.0) - 1503.0).abs() < 1e-9);
    }

    #[test]
    fn chirp_rejects_times_outside_sweep() {
        assert!(matches!(chirp(-0.1, &sweep()), Err(SignalError::OutOfRange { .. })));
        assert!(matches!(chirp(60.5, &sweep()), Err(SignalError::OutOfRange { .. })));
        assert!(instantaneous_frequency(61.0, &sweep()).is_err());
    }

    #[test]
    fn instantaneous_frequency_is_linear_ramp() {
        let spec = sweep();
        assert_eq!(instantaneous_frequency(0.0, &spec).unwrap(), 0.1);
        assert_eq!(instantaneous_frequency(60.0, &spec).unwrap(), 50.0);
        assert!((instantaneous_frequency(30.0, &spec).unwrap() - 25.05).abs() < 1e-12);
    }

    #[test]
    fn chirp_validation() {
        assert!(sweep().validate().is_ok());
        assert!(ChirpSpec {
            amplitude: 0.0,
            ..sweep()
        }
        .validate()
        .is_err());
        assert!(ChirpSpec {
            start_frequency: 60.0,
            ..sweep()
        }
        .validate()
        .is_err());
        assert!(ChirpSpec {
            duration: 0.0,
            ..sweep()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn quantize_examples() {
        assert_eq!(quantize(0.3, 0.125), 0.25);
        assert_eq!(quantize(0.0626, 0.125), 0.125);
        assert_eq!(quantize(0.0625, 0.125), 0.125);
        assert_eq!(quantize(-0.0625, 0.125), -0.125);
        assert_eq!(quantize(0.123_456, 0.0), 0.123_456);
    }

    #[test]
    fn sample_hold_identity_and_decimation() {
        let ramp = TimeSeries::from_fn(1e-4, 1000, |t| t).unwrap();
        assert_eq!(sample_hold(&ramp, 1e4).unwrap(), ramp);

        let held = sample_hold(&ramp, 1e3).unwrap();
        assert_eq!(held.len(), 100);
        for (k, v) in held.samples.iter().enumerate() {
            assert_eq!(*v, ramp.samples[10 * k]);
        }
        assert!((held.dt - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn sample_hold_rejects_upsampling() {
        let s = TimeSeries::from_fn(1e-3, 10, |_| 1.0).unwrap();
        assert!(matches!(
            sample_hold(&s, 2e3),
            Err(SignalError::UpsampleRequested { .. })
        ));
    }

    #[test]
    fn sample_hold_of_constant_is_constant() {
        let s = TimeSeries::from_fn(2e-5, 5000, |_| 3.5).unwrap();
        let held = sample_hold(&s, 1400.0).unwrap();
        assert!(held.samples.iter().all(|&v| v == 3.5));
    }

    proptest! {
        #[test]
        fn chirp_bounded_by_amplitude(t in 0.0..120.0f64, amp in 0.01..10.0f64) {
            let spec = ChirpSpec { amplitude: amp, start_frequency: 0.1, end_frequency: 60.0, duration: 120.0 };
            prop_assert!(chirp(t, &spec).unwrap().abs() <= amp);
        }

        #[test]
        fn quantize_is_idempotent(x in -100.0..100.0f64, r in 1e-6..1.0f64) {
            let once = quantize(x, r);
            prop_assert_eq!(quantize(once, r), once);
        }

        #[test]
        fn quantize_is_odd(x in -100.0..100.0f64, r in 1e-6..1.0f64) {
            prop_assert_eq!(quantize(-x, r), -quantize(x, r));
        }

        #[test]
        fn sample_hold_twice_is_idempotent(n in 10usize..2000, rate in 50.0..1000.0f64) {
            let s = TimeSeries::from_fn(1e-3, n, |t| (7.0 * t).sin()).unwrap();
            let once = sample_hold(&s, rate).unwrap();
            let twice = sample_hold(&once, rate).unwrap();
            prop_assert_eq!(once, twice);
        }
    }
}
