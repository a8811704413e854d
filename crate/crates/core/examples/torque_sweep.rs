//! Bandwidth against chirp amplitude for every configuration on the full
//! nonlinear plant, with the summary statistics per configuration.
//!
//! cargo run --release --example torque_sweep

use seabench::experiments::{summary_stats, torque_sweep, Configuration, ExperimentConfig};
use seabench::signals::ChirpSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for configuration in Configuration::ALL {
        let mut cfg = ExperimentConfig::bench(configuration);
        cfg.chirp = ChirpSpec {
            amplitude: 1.0,
            start_frequency: 0.2,
            end_frequency: 120.0,
            duration: 30.0,
        };
        cfg.torque_amplitudes = vec![0.25, 0.5, 1.0, 2.0, 4.0];
        let curve = torque_sweep(&cfg)?;
        println!("{}", configuration.label());
        for (amplitude, mean) in curve.mean_by_amplitude() {
            println!("  {amplitude:>5.2} Nm  {mean:>7.2} Hz");
        }
        match summary_stats(&curve) {
            Ok(s) => println!(
                "  avg {:.2}, min {:.2}, max {:.2} Hz at {} Nm",
                s.b_avg, s.b_min, s.b_max, s.t_at_b_max
            ),
            Err(e) => println!("  no statistics: {e}"),
        }
    }
    Ok(())
}
