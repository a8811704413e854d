//! Virtual versions of the bench calibration procedures.

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::plant::{backlash_transmission, MotorParams, NonlinearitySwitches};

/// Encoder count for an output angle; the reading origin is deliberately
/// off-grid so that no move lands on a rounding tie.
fn pulses(angle: f64, resolution: f64) -> i64 {
    (angle / resolution + 0.37).round() as i64
}

/// Free play seen at the output with the rotor held: push the output one
/// way until it meets a flank, then the other way, and difference the
/// encoder counts.
pub fn virtual_backlash_measurement(motor: &MotorParams, switches: NonlinearitySwitches, angle_resolution: f64) -> f64 {
    let total = if switches.backlash_enabled {
        motor.backlash_total
    } else {
        0.0
    };
    let increment = angle_resolution / 50.0;

    // Moving the output by +d relative to the held input shifts the gear
    // offset by -d; the play operator reports how much of that motion it
    // could absorb before a flank was reached.
    let push = |direction: f64, offset: &mut f64, output: &mut f64| loop {
        let r = backlash_transmission(-direction * increment, *offset, total);
        let absorbed = increment - r.output_motion.abs();
        *offset = r.gear_offset;
        *output += direction * absorbed;
        if r.engaged {
            break;
        }
    };

    let mut offset = 0.0;
    let mut output = 0.0;
    push(1.0, &mut offset, &mut output);
    let forward = pulses(output, angle_resolution);
    push(-1.0, &mut offset, &mut output);
    let backward = pulses(output, angle_resolution);
    (forward - backward) as f64 * angle_resolution
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncoderCalibration {
    pub pulses_per_rad: f64,
    pub forward_pulses_per_rad: f64,
    pub backward_pulses_per_rad: f64,
}

/// Step the gear input through `rotations` moves of `step_deg` each way and
/// average the output encoder counts per commanded radian. Play is taken up
/// with an uncounted move before each direction.
pub fn virtual_encoder_calibration(
    motor: &MotorParams,
    switches: NonlinearitySwitches,
    angle_resolution: f64,
    rotations: usize,
    step_deg: f64,
) -> Result<EncoderCalibration, ExperimentError> {
    if rotations == 0 {
        return Err(ExperimentError::Domain("at least one rotation is required".into()));
    }
    if !(step_deg > 0.0) || !(angle_resolution > 0.0) {
        return Err(ExperimentError::Domain("step and resolution must be > 0".into()));
    }
    let total = if switches.backlash_enabled {
        motor.backlash_total
    } else {
        0.0
    };
    let step = step_deg.to_radians();

    let mut offset = 0.0;
    let mut output = 0.0;
    let mut run = |direction: f64| {
        let take_up = backlash_transmission(direction * step, offset, total);
        offset = take_up.gear_offset;
        output += take_up.output_motion;
        let mut counted = 0i64;
        for _ in 0..rotations {
            let before = pulses(output, angle_resolution);
            let r = backlash_transmission(direction * step, offset, total);
            offset = r.gear_offset;
            output += r.output_motion;
            counted += (pulses(output, angle_resolution) - before).abs();
        }
        counted as f64 / (rotations as f64 * step)
    };
    let forward = run(1.0);
    let backward = run(-1.0);
    Ok(EncoderCalibration {
        pulses_per_rad: 0.5 * (forward + backward),
        forward_pulses_per_rad: forward,
        backward_pulses_per_rad: backward,
    })
}
