//! Closed-loop bandwidth gain of the SEA for several feedback gains, against
//! sqrt(Kp + 1), on the linear plant with a fast controller.
//!
//! cargo run --release --example closed_loop_gain

use seabench::control::{min_control_rate, predicted_frequency_ratio, BENCH_SLOWEST_TIME_CONSTANT};
use seabench::experiments::{run_configuration, Configuration, ExperimentConfig};
use seabench::plant::NonlinearitySwitches;
use seabench::signals::ChirpSpec;

fn setup(configuration: Configuration, kp: f64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::bench(configuration);
    cfg.chirp = ChirpSpec {
        amplitude: 1.0,
        start_frequency: 1.0,
        end_frequency: 300.0,
        duration: 30.0,
    };
    cfg.switches = NonlinearitySwitches::LINEAR;
    cfg.control_rate = 20_000.0;
    cfg.gains.feedback_gain = kp;
    cfg
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!(
        "minimum control rate: {:.1} Hz",
        min_control_rate(BENCH_SLOWEST_TIME_CONSTANT)?
    );
    let (_, open) = run_configuration(&setup(Configuration::PassiveSea, 0.0), 1.0)?;
    println!("open loop: {:.2} Hz", open.bandwidth);
    for kp in [0.5, 1.0, 2.0, 3.0] {
        let (_, closed) = run_configuration(&setup(Configuration::ClosedLoopSea, kp), 1.0)?;
        println!(
            "Kp = {kp}: {:.2} Hz, ratio {:.3}, predicted {:.3}",
            closed.bandwidth,
            closed.bandwidth / open.bandwidth,
            predicted_frequency_ratio(kp)?
        );
    }
    Ok(())
}
