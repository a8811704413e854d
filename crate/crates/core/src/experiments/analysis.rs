use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{Configuration, ExperimentError, SweepCurve, TrialStatus};

/// Bandwidth summary of one sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    #[serde(rename = "b_avg_hz")]
    pub b_avg: f64,
    #[serde(rename = "b_min_hz")]
    pub b_min: f64,
    #[serde(rename = "b_max_hz")]
    pub b_max: f64,
    #[serde(rename = "t_at_b_max_nm")]
    pub t_at_b_max: f64,
}

/// Hardware measurements of the four configurations, kept for side-by-side
/// reports. The simulator is not expected to reproduce these values.
pub const BENCH_REFERENCE: [(Configuration, SummaryStats); 4] = [
    (
        Configuration::OriginalMotor,
        SummaryStats {
            b_avg: 5.122,
            b_min: 0.420,
            b_max: 10.32,
            t_at_b_max: 1.00,
        },
    ),
    (
        Configuration::PassiveSea,
        SummaryStats {
            b_avg: 4.780,
            b_min: 1.175,
            b_max: 8.125,
            t_at_b_max: 5.00,
        },
    ),
    (
        Configuration::ClosedLoopSea,
        SummaryStats {
            b_avg: 15.86,
            b_min: 1.100,
            b_max: 30.32,
            t_at_b_max: 1.25,
        },
    ),
    (
        Configuration::ClosedLoopRigidSensor,
        SummaryStats {
            b_avg: 22.43,
            b_min: 15.60,
            b_max: 28.17,
            t_at_b_max: 1.50,
        },
    ),
];

/// Statistics over every successful trial; stuck and failed runs are left out.
pub fn summary_stats(curve: &SweepCurve) -> Result<SummaryStats, ExperimentError> {
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut b_min = f64::INFINITY;
    let mut best: Option<(f64, f64)> = None;
    for p in curve.points.iter().filter(|p| p.status == TrialStatus::Ok) {
        let Some(b) = p.bandwidth else { continue };
        sum += b;
        count += 1;
        b_min = b_min.min(b);
        if best.is_none_or(|(bmax, _)| b > bmax) {
            best = Some((b, p.amplitude));
        }
    }
    let (b_max, t_at_b_max) = best.ok_or(ExperimentError::EmptyCurve)?;
    // Clamp guards the ordering against rounding in the mean.
    let b_avg = (sum / count as f64).clamp(b_min, b_max);
    Ok(SummaryStats {
        b_avg,
        b_min,
        b_max,
        t_at_b_max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaturationFit {
    /// `c` in `B = c / T`, in Hz·Nm.
    pub constant: f64,
    pub r_squared: f64,
    pub points: usize,
    /// Amplitudes at or below this value were excluded.
    #[serde(rename = "regime_split_nm")]
    pub regime_split: f64,
}

/// Least-squares fit of `B = c / T` to successful trials above the split.
///
/// The split defaults to the amplitude of the largest bandwidth.
pub fn fit_saturation_regime(curve: &SweepCurve, regime_split: Option<f64>) -> Result<SaturationFit, ExperimentError> {
    let split = match regime_split {
        Some(s) => s,
        None => summary_stats(curve)?.t_at_b_max,
    };
    let pts: Vec<(f64, f64)> = curve
        .points
        .iter()
        .filter(|p| p.status == TrialStatus::Ok && p.amplitude > split)
        .filter_map(|p| p.bandwidth.map(|b| (p.amplitude, b)))
        .collect();
    let mut amplitudes: Vec<f64> = pts.iter().map(|p| p.0).collect();
    amplitudes.dedup();
    if amplitudes.len() < 3 {
        return Err(ExperimentError::InsufficientPoints {
            found: amplitudes.len(),
            needed: 3,
        });
    }

    let sxy: f64 = pts.iter().map(|(t, b)| b / t).sum();
    let sxx: f64 = pts.iter().map(|(t, _)| 1.0 / (t * t)).sum();
    let constant = sxy / sxx;

    let mean = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let ss_tot: f64 = pts.iter().map(|(_, b)| (b - mean).powi(2)).sum();
    let ss_res: f64 = pts.iter().map(|(t, b)| (b - constant / t).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 0.0 };
    Ok(SaturationFit {
        constant,
        r_squared,
        points: pts.len(),
        regime_split: split,
    })
}

fn check_stiffness(stiffness: f64) -> Result<(), ExperimentError> {
    if stiffness > 0.0 {
        Ok(())
    } else {
        Err(ExperimentError::Domain(format!(
            "stiffness must be > 0, got {stiffness}"
        )))
    }
}

/// Peak output velocity `2π f T / k` needed to track a sinusoid of torque
/// amplitude `T` at `f` through a spring of stiffness `k`.
pub fn peak_velocity_requirement(
    frequency: f64,
    torque_amplitude: f64,
    stiffness: f64,
) -> Result<f64, ExperimentError> {
    check_stiffness(stiffness)?;
    Ok(2.0 * PI * frequency * torque_amplitude / stiffness)
}

/// Peak output acceleration `4π² f² T / k`.
pub fn peak_acceleration_requirement(
    frequency: f64,
    torque_amplitude: f64,
    stiffness: f64,
) -> Result<f64, ExperimentError> {
    check_stiffness(stiffness)?;
    Ok(4.0 * PI * PI * frequency * frequency * torque_amplitude / stiffness)
}

/// `c = V_sat k / 2π`: the frequency-amplitude product at which the peak
/// velocity requirement reaches the no-load speed.
pub fn predicted_saturation_constant(no_load_speed: f64, stiffness: f64) -> Result<f64, ExperimentError> {
    check_stiffness(stiffness)?;
    Ok(no_load_speed * stiffness / (2.0 * PI))
}
