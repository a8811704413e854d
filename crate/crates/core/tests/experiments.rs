use seabench::control::predicted_frequency_ratio;
use seabench::experiments::{
    run_configuration, simulate_run, torque_sweep, Configuration, ExperimentConfig, TrialStatus,
};
use seabench::plant::NonlinearitySwitches;
use seabench::signals::ChirpSpec;

fn bench(configuration: Configuration, chirp: ChirpSpec) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::bench(configuration);
    cfg.chirp = chirp;
    cfg
}

#[test]
fn feedback_gain_of_one_at_the_bench_rate_gives_about_sqrt_two() {
    let chirp = ChirpSpec {
        amplitude: 1.0,
        start_frequency: 1.0,
        end_frequency: 300.0,
        duration: 30.0,
    };
    let mut open = bench(Configuration::PassiveSea, chirp);
    open.switches = NonlinearitySwitches::LINEAR;
    let mut closed = bench(Configuration::ClosedLoopSea, chirp);
    closed.switches = NonlinearitySwitches::LINEAR;
    let (_, b_open) = run_configuration(&open, 1.0).unwrap();
    let (_, b_closed) = run_configuration(&closed, 1.0).unwrap();
    let ratio = b_closed.bandwidth / b_open.bandwidth;
    assert!(
        (ratio / predicted_frequency_ratio(1.0).unwrap() - 1.0).abs() < 0.05,
        "ratio {ratio}"
    );
}

#[test]
fn stiff_sensor_reading_jumps_more_than_deflection_reading() {
    let chirp = ChirpSpec {
        amplitude: 1.0,
        start_frequency: 0.5,
        end_frequency: 40.0,
        duration: 10.0,
    };
    let stiff = simulate_run(&bench(Configuration::OriginalMotor, chirp), 2.0, 0).unwrap();
    let soft = simulate_run(&bench(Configuration::ClosedLoopSea, chirp), 2.0, 0).unwrap();
    let stiff_jump = stiff.sensor_series().max_jump();
    let soft_jump = soft.deflection_series().max_jump();
    assert!(stiff_jump > 2.0 * soft_jump, "stiff {stiff_jump} vs soft {soft_jump}");
}

#[test]
fn bandwidth_rises_through_the_low_force_region() {
    let chirp = ChirpSpec {
        amplitude: 1.0,
        start_frequency: 0.2,
        end_frequency: 120.0,
        duration: 20.0,
    };
    let mut cfg = bench(Configuration::ClosedLoopSea, chirp);
    cfg.torque_amplitudes = vec![0.5, 1.0, 2.0];
    let curve = torque_sweep(&cfg).unwrap();
    assert!(curve.points.iter().all(|p| p.status == TrialStatus::Ok));
    let b: Vec<f64> = curve.points.iter().map(|p| p.bandwidth.unwrap()).collect();
    assert!(b.windows(2).all(|w| w[1] > w[0]), "{b:?}");
}

#[test]
fn saturated_motor_rises_then_falls() {
    let mut cfg = bench(
        Configuration::OriginalMotor,
        ChirpSpec {
            amplitude: 1.0,
            start_frequency: 0.5,
            end_frequency: 150.0,
            duration: 30.0,
        },
    );
    cfg.switches = NonlinearitySwitches {
        saturation_enabled: true,
        stiction_enabled: true,
        ..NonlinearitySwitches::LINEAR
    };
    cfg.hardware.motor.no_load_speed = 0.00575;
    cfg.torque_amplitudes = vec![0.1, 0.5, 1.0, 3.0, 6.0];
    let curve = torque_sweep(&cfg).unwrap();
    let b: Vec<f64> = curve.points.iter().map(|p| p.bandwidth.unwrap()).collect();
    assert_eq!(curve.points[0].status, TrialStatus::Stuck);
    let peak = b
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |m, (i, v)| if v > m.1 { (i, v) } else { m })
        .0;
    assert!(peak > 0 && peak < b.len() - 1, "{b:?}");
    assert!(b[peak..].windows(2).all(|w| w[1] < w[0]), "{b:?}");
}
