//! High-torque regime: with a low no-load speed the bandwidth falls as
//! c / T. Fits c and compares it with the velocity-limit prediction.
//!
//! cargo run --release --example saturation_regime

use seabench::experiments::{
    fit_saturation_regime, peak_velocity_requirement, predicted_saturation_constant, torque_sweep, Configuration,
    ExperimentConfig,
};
use seabench::plant::NonlinearitySwitches;
use seabench::signals::ChirpSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let no_load_speed = 0.00575;
    let mut cfg = ExperimentConfig::bench(Configuration::OriginalMotor);
    cfg.chirp = ChirpSpec {
        amplitude: 1.0,
        start_frequency: 0.5,
        end_frequency: 150.0,
        duration: 60.0,
    };
    cfg.switches = NonlinearitySwitches {
        saturation_enabled: true,
        ..NonlinearitySwitches::LINEAR
    };
    cfg.hardware.motor.no_load_speed = no_load_speed;
    let k = cfg.load_path().stiffness;

    let curve = torque_sweep(&cfg)?;
    for (amplitude, mean) in curve.mean_by_amplitude() {
        let needed = peak_velocity_requirement(mean, amplitude, k)?;
        println!("{amplitude:>5.2} Nm  {mean:>7.2} Hz  needs {needed:.5} rad/s");
    }
    let fit = fit_saturation_regime(&curve, None)?;
    println!(
        "c = {:.2} Hz*Nm (R^2 {:.3}), predicted {:.2}",
        fit.constant,
        fit.r_squared,
        predicted_saturation_constant(no_load_speed, k)?
    );
    Ok(())
}
