//! Print a short linear chirp and its instantaneous frequency.
//!
//! cargo run --example chirp_signal

use seabench::signals::{chirp, instantaneous_frequency, ChirpSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ChirpSpec {
        amplitude: 1.5,
        start_frequency: 0.5,
        end_frequency: 20.0,
        duration: 2.0,
    };
    println!("time_s,torque_nm,frequency_hz");
    for i in 0..=40 {
        let t = spec.duration * i as f64 / 40.0;
        println!(
            "{t:.3},{:.5},{:.4}",
            chirp(t, &spec)?,
            instantaneous_frequency(t, &spec)?
        );
    }
    Ok(())
}
