//! Compare the phase-recovery bandwidth with the classic first -3 dB drop on
//! a response with a temporary dip, or on a bode CSV given as argument.
//!
//! cargo run --example bandwidth_extraction [-- bode.csv]

use seabench::cli::csv_io::read_bode;
use seabench::sysid::{bandwidth, classic_bandwidth, BodePlot, DEFAULT_DC_BINS};

/// Linear interpolation through `(x, y)` knots, flat outside them.
fn knots(points: &[(f64, f64)], x: f64) -> f64 {
    let i = points.iter().position(|p| p.0 >= x).unwrap_or(points.len() - 1);
    if i == 0 || points[i].0 < x {
        return points[i].1;
    }
    let ((x0, y0), (x1, y1)) = (points[i - 1], points[i]);
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Magnitude dips below -3 dB near 8 Hz and recovers; the phase dips and
/// climbs back past its low-frequency value by 12 Hz.
fn dip_and_recover() -> Result<BodePlot, Box<dyn std::error::Error>> {
    let f: Vec<f64> = (1..=160).map(|i| i as f64 * 0.25).collect();
    let mag = [
        (0.0, 0.0),
        (6.0, -0.5),
        (8.0, -6.0),
        (9.0, -5.0),
        (10.0, -1.0),
        (20.0, -1.5),
        (40.0, -20.0),
    ];
    let phase = [(0.0, -2.0), (8.5, -80.0), (12.0, -1.0), (40.0, -75.0)];
    let m = f.iter().map(|&x| knots(&mag, x)).collect();
    let p = f.iter().map(|&x| knots(&phase, x)).collect();
    Ok(BodePlot::new(f, m, p)?)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bode = match std::env::args().nth(1) {
        Some(path) => read_bode(std::fs::File::open(path)?)?,
        None => dip_and_recover()?,
    };
    let result = bandwidth(&bode, DEFAULT_DC_BINS)?;
    println!("{}", serde_json::to_string_pretty(&result)?);
    println!(
        "classic first drop: {:.2} Hz",
        classic_bandwidth(&bode, DEFAULT_DC_BINS)?
    );
    Ok(())
}
