//! Drive the grounded motor with slow torque ramps and watch stiction and
//! backlash shape the output torque.
//!
//! cargo run --example plant_nonlinearities

use seabench::plant::{
    output_torque, step, MotorParams, NonlinearitySwitches, PlantParams, PlantState, SpringParams, DEFAULT_DT,
};

fn ramp(params: &PlantParams, switches: NonlinearitySwitches, label: &str) -> Result<(), Box<dyn std::error::Error>> {
    let mut state = PlantState::at_rest();
    let steps = 50_000; // 1 s
    println!("{label}");
    for i in 0..=steps {
        let command = 0.8 * i as f64 / steps as f64;
        if i % 10_000 == 0 {
            println!(
                "  command {command:.2} Nm -> output {:.3} Nm, rotor {:.3} rad/s",
                output_torque(&state, params)?,
                state.rotor_velocity
            );
        }
        state = step(&state, command, DEFAULT_DT, params, switches)?;
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = PlantParams {
        motor: MotorParams::rmd_x8_v2(),
        spring: SpringParams::se_element(),
    };
    println!(
        "static friction at the output: {:.3} Nm",
        params.motor.static_friction_at_output()
    );
    ramp(&params, NonlinearitySwitches::LINEAR, "linear")?;
    ramp(
        &params,
        NonlinearitySwitches {
            stiction_enabled: true,
            ..NonlinearitySwitches::LINEAR
        },
        "stiction",
    )?;
    ramp(
        &params,
        NonlinearitySwitches {
            backlash_enabled: true,
            ..NonlinearitySwitches::LINEAR
        },
        "backlash",
    )?;
    Ok(())
}
