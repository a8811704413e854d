//! Acceptance suite. Each test prints one `acceptance N ... PASS|FAIL` line
//! and then asserts, so `cargo test --test acceptance -- --nocapture`
//! gives a readable report.

use std::path::Path;
use std::time::Instant;

use rustfft::num_complex::Complex;
use seabench::cli::cmd_sweep;
use seabench::control::min_control_rate;
use seabench::experiments::{
    fit_saturation_regime, predicted_saturation_constant, run_configuration, run_trial, summary_stats, torque_sweep,
    virtual_backlash_measurement, virtual_encoder_calibration, Analysis, Configuration, ExperimentConfig,
};
use seabench::plant::{MotorParams, NonlinearitySwitches};
use seabench::signals::{chirp, instantaneous_frequency, ChirpSpec};
use seabench::sysid::{bandwidth, classic_bandwidth, BandwidthMethod, BodePlot};

fn report(n: u32, what: &str, pass: bool, detail: String) {
    println!(
        "acceptance {n:>2} {:<4} {what}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn second_order(f: f64, fnat: f64, zeta: f64) -> Complex<f64> {
    let s = Complex::new(0.0, 2.0 * std::f64::consts::PI * f);
    let w = 2.0 * std::f64::consts::PI * fnat;
    w * w / (s * s + 2.0 * zeta * w * s + w * w)
}

/// Frequency above the resonance where |H|^2 equals `power_ratio`.
fn second_order_crossing(fnat: f64, zeta: f64, power_ratio: f64) -> f64 {
    let b = 4.0 * zeta * zeta - 2.0;
    let c = 1.0 - 1.0 / power_ratio;
    let u2 = (-b + (b * b - 4.0 * c).sqrt()) / 2.0;
    fnat * u2.sqrt()
}

#[test]
fn acceptance_01_second_order_bandwidth() {
    let start = Instant::now();
    let grid: Vec<f64> = (1..=2000).map(|i| i as f64 * 0.05).collect();
    let mut worst = 0.0f64;
    for zeta in [0.5, 0.707, 1.0] {
        for fnat in [5.0, 10.0, 20.0] {
            let bode = BodePlot::from_response(&grid, |f| second_order(f, fnat, zeta)).unwrap();
            let got = bandwidth(&bode, 3).unwrap().bandwidth;
            let dc_db = grid[..3]
                .iter()
                .map(|&f| 20.0 * second_order(f, fnat, zeta).norm().log10())
                .sum::<f64>()
                / 3.0;
            let expected = second_order_crossing(fnat, zeta, 10f64.powf((dc_db - 3.0) / 10.0));
            worst = worst.max((got - expected).abs());
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst <= 0.05 && elapsed < 1.0;
    report(
        1,
        "second-order bandwidth within one 0.05 Hz bin",
        pass,
        format!("worst error {worst:.4} Hz in {elapsed:.3} s"),
    );
    assert!(pass);
}

/// Straight transcription of the seven-step rule, kept separate from the library.
fn literal_phase_recovery(f: &[f64], mag: &[f64], phase: &[f64]) -> Option<(f64, f64)> {
    let dc = (mag[0] + mag[1] + mag[2]) / 3.0;
    let in_band: Vec<f64> = f
        .iter()
        .zip(mag)
        .filter(|(_, &m)| m >= dc - 3.0)
        .map(|(&f, _)| f)
        .collect();
    let mut i_min = 0;
    for i in 0..phase.len() {
        if phase[i] < phase[i_min] {
            i_min = i;
        }
    }
    let w_min = f[i_min];
    let phi1: Vec<f64> = f
        .iter()
        .zip(phase)
        .filter(|(&w, _)| w <= w_min)
        .map(|(_, &p)| p)
        .collect();
    let phi2: Vec<(f64, f64)> = f
        .iter()
        .zip(phase)
        .filter(|(&w, _)| w >= w_min)
        .map(|(&w, &p)| (w, p))
        .collect();
    let phi1_max = phi1.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w_c = phi2.iter().find(|(_, p)| *p > phi1_max)?.0;
    let w_b = in_band
        .iter()
        .copied()
        .filter(|&w| w <= w_c)
        .fold(f64::NEG_INFINITY, f64::max);
    Some((w_b, w_c))
}

fn piecewise(points: &[(f64, f64)], x: f64) -> f64 {
    if x <= points[0].0 {
        return points[0].1;
    }
    for w in points.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if x <= x1 {
            return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
        }
    }
    points[points.len() - 1].1
}

#[test]
fn acceptance_02_phase_recovery_branch() {
    let f: Vec<f64> = (1..=120).map(|i| i as f64 * 0.25).collect();
    let mag_pts = [
        (0.0, 0.0),
        (6.0, 0.0),
        (8.0, -5.0),
        (9.0, -5.0),
        (10.0, -1.0),
        (20.0, -1.0),
        (30.0, -15.0),
    ];
    let phase_pts = [(0.25, -5.0), (8.5, -80.0), (12.0, -4.0), (30.0, -70.0)];
    let mag: Vec<f64> = f.iter().map(|&x| piecewise(&mag_pts, x)).collect();
    let phase: Vec<f64> = f.iter().map(|&x| piecewise(&phase_pts, x)).collect();
    let bode = BodePlot::new(f.clone(), mag.clone(), phase.clone()).unwrap();

    let got = bandwidth(&bode, 3).unwrap();
    let (w_b, w_c) = literal_phase_recovery(&f, &mag, &phase).expect("constructed phase recovers");
    let classic = classic_bandwidth(&bode, 3).unwrap();
    let pass = got.method == BandwidthMethod::PhaseRecovery
        && got.bandwidth == w_b
        && got.crossover == Some(w_c)
        && w_c == 12.0
        && classic < got.bandwidth;
    report(
        2,
        "phase-recovery result equals literal execution; classic is smaller",
        pass,
        format!(
            "bandwidth {} Hz (literal {w_b}), crossover {:?} (literal {w_c}), classic {classic} Hz",
            got.bandwidth, got.crossover
        ),
    );
    assert!(pass);
}

#[test]
fn acceptance_03_feedback_gain_law() {
    let start = Instant::now();
    let setup = |c: Configuration, kp: f64| {
        let mut cfg = ExperimentConfig::bench(c);
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
    };
    let open = run_configuration(&setup(Configuration::PassiveSea, 0.0), 1.0)
        .unwrap()
        .1
        .bandwidth;
    let mut pass = true;
    let mut detail = format!("open loop {open:.2} Hz");
    for kp in [0.0, 1.0, 3.0] {
        let closed = run_configuration(&setup(Configuration::ClosedLoopSea, kp), 1.0)
            .unwrap()
            .1
            .bandwidth;
        let ratio = closed / open;
        let target = (kp + 1.0f64).sqrt();
        pass &= (ratio / target - 1.0).abs() <= 0.05;
        detail.push_str(&format!("; Kp={kp}: ratio {ratio:.3} vs {target:.3}"));
    }
    let elapsed = start.elapsed().as_secs_f64();
    pass &= elapsed < 30.0;
    report(
        3,
        "closed/open bandwidth ratio = sqrt(Kp+1) within 5%",
        pass,
        format!("{detail}; {elapsed:.1} s"),
    );
    assert!(pass);
}

#[test]
fn acceptance_04_inverse_torque_regime() {
    let no_load_speed = 0.00575;
    let mut cfg = ExperimentConfig::bench(Configuration::OriginalMotor);
    cfg.chirp = ChirpSpec {
        amplitude: 1.0,
        start_frequency: 0.5,
        end_frequency: 150.0,
        duration: 120.0,
    };
    cfg.switches = NonlinearitySwitches {
        saturation_enabled: true,
        ..NonlinearitySwitches::LINEAR
    };
    cfg.hardware.motor.no_load_speed = no_load_speed;
    let curve = torque_sweep(&cfg).unwrap();
    let fit = fit_saturation_regime(&curve, None).unwrap();
    let predicted = predicted_saturation_constant(no_load_speed, cfg.load_path().stiffness).unwrap();
    let error = fit.constant / predicted - 1.0;
    let pass = fit.r_squared >= 0.95 && error.abs() <= 0.15;
    report(
        4,
        "B = c/T fit beyond the peak: R^2 >= 0.95, c within 15% of V*k/(2 pi)",
        pass,
        format!(
            "c = {:.2} vs {predicted:.2} ({:+.1}%), R^2 = {:.4}, {} points above {} Nm",
            fit.constant,
            error * 100.0,
            fit.r_squared,
            fit.points,
            fit.regime_split
        ),
    );
    assert!(pass);
}

#[test]
fn acceptance_05_stiction_low_force_regime() {
    let mut cfg = ExperimentConfig::bench(Configuration::PassiveSea);
    cfg.chirp = ChirpSpec {
        amplitude: 1.0,
        start_frequency: 0.5,
        end_frequency: 60.0,
        duration: 30.0,
    };
    assert_eq!(cfg.hardware.motor.static_friction, 0.044);
    let result = |amplitude: f64| match run_trial(&cfg, amplitude, 0).unwrap().analysis {
        Analysis::Measured { bandwidth, .. } => (bandwidth.bandwidth, false),
        Analysis::NoMotion { .. } => (0.0, true),
    };
    let (low, low_stuck) = result(0.1);
    let (high, high_stuck) = result(1.0);
    let breakaway = cfg.hardware.motor.static_friction_at_output();
    let pass = low < high && low_stuck && !high_stuck && low == 0.0;
    report(
        5,
        "stiction: B(0.1 Nm) < B(1.0 Nm), zero below breakaway",
        pass,
        format!("B(0.1) = {low} Hz (stuck: {low_stuck}), B(1.0) = {high:.2} Hz, breakaway {breakaway:.3} Nm"),
    );
    assert!(pass);
}

fn max_bandwidth(configuration: Configuration, backlash: bool) -> f64 {
    let mut cfg = ExperimentConfig::bench(configuration);
    cfg.chirp = ChirpSpec {
        amplitude: 1.0,
        start_frequency: 0.1,
        end_frequency: 300.0,
        duration: 120.0,
    };
    cfg.switches = NonlinearitySwitches {
        backlash_enabled: backlash,
        ..NonlinearitySwitches::ALL
    };
    summary_stats(&torque_sweep(&cfg).unwrap()).unwrap().b_max
}

#[test]
fn acceptance_06_configuration_ordering() {
    let motor = max_bandwidth(Configuration::OriginalMotor, true);
    let open = max_bandwidth(Configuration::PassiveSea, true);
    let closed = max_bandwidth(Configuration::ClosedLoopSea, true);
    let motor_nb = max_bandwidth(Configuration::OriginalMotor, false);
    let open_nb = max_bandwidth(Configuration::PassiveSea, false);
    let closed_nb = max_bandwidth(Configuration::ClosedLoopSea, false);

    let a = open < motor;
    let b = closed > 2.0 * motor;
    let ratio_nb = closed_nb / open_nb;
    let c = (ratio_nb / 2f64.sqrt() - 1.0).abs() <= 0.15 && closed_nb < 2.0 * motor_nb;
    report(
        6,
        "ordering: open SEA < motor; closed SEA > 2x motor with backlash; ~sqrt(2) without",
        a && b && c,
        format!(
            "with backlash motor {motor:.1}, open SEA {open:.1}, closed SEA {closed:.1} Hz [a {a}, b {b}]; \
             without: motor {motor_nb:.1}, open {open_nb:.1}, closed {closed_nb:.1}, ratio {ratio_nb:.3} [c {c}]"
        ),
    );
    assert!(a, "open-loop SEA should trail the motor");
    assert!(b, "closed-loop SEA should exceed twice the motor with backlash");
    assert!(c, "without backlash the closed-loop gain should be near sqrt(2)");
}

#[test]
fn acceptance_07_chirp_exactness() {
    let spec = ChirpSpec {
        amplitude: 2.5,
        start_frequency: 0.1,
        end_frequency: 60.0,
        duration: 120.0,
    };
    let f0 = instantaneous_frequency(0.0, &spec).unwrap();
    let f1 = instantaneous_frequency(spec.duration, &spec).unwrap();
    let tol = 4.0 * f64::EPSILON * spec.end_frequency;
    let n = 1_200_000;
    let peak = (0..=n)
        .map(|i| chirp(spec.duration * i as f64 / n as f64, &spec).unwrap().abs())
        .fold(0.0, f64::max);
    let pass =
        (f0 - spec.start_frequency).abs() <= tol && (f1 - spec.end_frequency).abs() <= tol && peak <= spec.amplitude;
    report(
        7,
        "chirp endpoints exact, |signal| <= amplitude",
        pass,
        format!("f(0) = {f0}, f(T) = {f1}, peak {peak}"),
    );
    assert!(pass);
}

#[test]
fn acceptance_08_virtual_measurements() {
    let motor = MotorParams::rmd_x8_v2();
    let resolution = 1.109e-5;
    let measured = virtual_backlash_measurement(&motor, NonlinearitySwitches::ALL, resolution);
    let backlash_err = (measured - motor.backlash_total).abs();
    let cal = virtual_encoder_calibration(&motor, NonlinearitySwitches::ALL, resolution, 15, 2.0).unwrap();
    let expected = 1.0 / resolution;
    let cal_err = cal.pulses_per_rad / expected - 1.0;
    let pass = backlash_err <= resolution && cal_err.abs() <= 1e-3;
    report(
        8,
        "backlash within one pulse, calibration within 0.1%",
        pass,
        format!(
            "backlash {:.5} deg (configured {:.4}, error {:.2} pulses); {:.1} pulses/rad ({:+.4}%)",
            measured.to_degrees(),
            motor.backlash_total.to_degrees(),
            backlash_err / resolution,
            cal.pulses_per_rad,
            cal_err * 100.0
        ),
    );
    assert!(pass);
}

#[test]
fn acceptance_09_sampling_rule() {
    let rate = min_control_rate(0.04178).unwrap();
    let pass = (rate - 478.7).abs() < 0.05 && rate.round() == 479.0;
    report(9, "minimum control rate for 41.78 ms", pass, format!("{rate:.3} Hz"));
    assert!(pass);
}

fn sweep_once(config: &Path, out: &Path, jobs: usize) -> Vec<u8> {
    let (mut stdout, mut stderr) = (Vec::new(), Vec::new());
    let code = cmd_sweep(config, out, Some(jobs), Some(1234), false, &mut stdout, &mut stderr);
    assert_eq!(code, 0, "{}", String::from_utf8_lossy(&stderr));
    std::fs::read(out.join("sweep.csv")).unwrap()
}

#[test]
fn acceptance_10_sweep_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        r#"{
  "schema_version": 1,
  "configurations": ["passive_sea", "closed_loop_sea"],
  "torque_amplitudes_nm": [0.5, 1.0, 2.0],
  "trials_per_amplitude": 2,
  "chirp": {"amplitude_nm": 1.0, "start_frequency_hz": 1.0, "end_frequency_hz": 40.0, "duration_s": 8.0},
  "simulation": {"sensor_noise_nm": 0.05}
}"#,
    )
    .unwrap();
    let first = sweep_once(&config, &dir.path().join("a"), 1);
    let second = sweep_once(&config, &dir.path().join("b"), 2);
    let pass = first == second && !first.is_empty();
    report(
        10,
        "identical config and seed give byte-identical sweep CSVs",
        pass,
        format!("{} bytes", first.len()),
    );
    assert!(pass);
}
