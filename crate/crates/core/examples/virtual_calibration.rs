//! Recover the gear backlash and the encoder scale with the virtual bench
//! procedures.
//!
//! cargo run --example virtual_calibration

use seabench::experiments::{virtual_backlash_measurement, virtual_encoder_calibration};
use seabench::plant::{MotorParams, NonlinearitySwitches};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let resolution = 1.109e-5;
    for degrees in [0.1, 0.3336, 1.0] {
        let motor = MotorParams {
            backlash_total: f64::to_radians(degrees),
            ..MotorParams::rmd_x8_v2()
        };
        let measured = virtual_backlash_measurement(&motor, NonlinearitySwitches::ALL, resolution);
        println!("backlash {degrees:.4} deg -> measured {:.4} deg", measured.to_degrees());
    }
    let cal = virtual_encoder_calibration(
        &MotorParams::rmd_x8_v2(),
        NonlinearitySwitches::ALL,
        resolution,
        15,
        2.0,
    )?;
    println!(
        "calibration: {:.1} pulses/rad (forward {:.1}, backward {:.1}), nominal {:.1}",
        cal.pulses_per_rad,
        cal.forward_pulses_per_rad,
        cal.backward_pulses_per_rad,
        1.0 / resolution
    );
    Ok(())
}
