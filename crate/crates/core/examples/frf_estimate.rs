//! Estimate the frequency response of a first-order low-pass from a chirp
//! and compare it with the exact response.
//!
//! cargo run --example frf_estimate

use std::f64::consts::PI;

use seabench::signals::{chirp, ChirpSpec, TimeSeries};
use seabench::sysid::{estimate_frf, FrfOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dt = 1e-3;
    let spec = ChirpSpec {
        amplitude: 1.0,
        start_frequency: 0.5,
        end_frequency: 100.0,
        duration: 60.0,
    };
    let pad = 10.0;
    let n = ((spec.duration + 2.0 * pad) / dt) as usize;
    let input = TimeSeries::from_fn(dt, n, |t| {
        let t = t - pad;
        if (0.0..=spec.duration).contains(&t) {
            chirp(t, &spec).unwrap()
        } else {
            0.0
        }
    })?;

    // First-order low-pass at 10 Hz, discretised exactly.
    let tau = 1.0 / (2.0 * PI * 10.0);
    let a = (-dt / tau).exp();
    let mut y = 0.0;
    let output: Vec<f64> = input
        .samples
        .iter()
        .map(|&u| {
            y = a * y + (1.0 - a) * u;
            y
        })
        .collect();
    let output = TimeSeries::new(dt, 0.0, output)?;

    let bode = estimate_frf(
        &input,
        &output,
        &FrfOptions::for_band(spec.start_frequency, spec.end_frequency),
    )?;
    println!("frequency_hz  estimated_db  exact_db");
    for i in (0..bode.len()).step_by(bode.len() / 15) {
        let f = bode.frequencies()[i];
        let exact = -10.0 * (1.0 + (2.0 * PI * f * tau).powi(2)).log10();
        println!("{f:>12.2}  {:>12.2}  {exact:>8.2}", bode.magnitude_db()[i]);
    }
    Ok(())
}
