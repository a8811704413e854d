use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Configuration, ExperimentConfig, ExperimentError};
use crate::control::{deflection_to_torque, FeedbackSource, ForceController};
use crate::plant::{output_torque, step, PlantError, PlantState};
use crate::signals::{chirp, quantize, HoldSchedule, TimeSeries};
use crate::sysid::{bandwidth, estimate_frf, BandwidthMethod, BandwidthResult, BodePlot, FrfOptions};

/// Runs whose peak output torque stays below this fraction of the
/// commanded amplitude are reported as stuck.
const NO_MOTION_FRACTION: f64 = 0.01;

/// Signals logged at the record rate during one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub dt: f64,
    /// Quiet time before the sweep starts; the same length of ring-down
    /// follows it.
    pub lead_time: f64,
    pub reference: Vec<f64>,
    pub command: Vec<f64>,
    /// Output torque as seen by the analysis (true torque plus noise).
    pub measured: Vec<f64>,
    pub rotor_velocity: Vec<f64>,
    /// Torque inferred from the quantized series-element deflection.
    pub deflection_torque: Vec<f64>,
    /// Held force-sensor reading.
    pub sensor_torque: Vec<f64>,
    pub peak_output_torque: f64,
}

impl RunRecord {
    pub fn len(&self) -> usize {
        self.reference.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reference.is_empty()
    }

    pub fn time(&self, index: usize) -> f64 {
        index as f64 * self.dt
    }

    fn series(&self, samples: &[f64]) -> TimeSeries {
        TimeSeries {
            dt: self.dt,
            start_time: 0.0,
            samples: samples.to_vec(),
        }
    }

    pub fn reference_series(&self) -> TimeSeries {
        self.series(&self.reference)
    }

    pub fn measured_series(&self) -> TimeSeries {
        self.series(&self.measured)
    }

    pub fn deflection_series(&self) -> TimeSeries {
        self.series(&self.deflection_torque)
    }

    pub fn sensor_series(&self) -> TimeSeries {
        self.series(&self.sensor_torque)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Analysis {
    Measured {
        bode: BodePlot,
        bandwidth: BandwidthResult,
    },
    /// Output never moved; reported as zero bandwidth.
    NoMotion {
        peak: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRun {
    pub record: RunRecord,
    pub analysis: Analysis,
}

struct Noise {
    rng: ChaCha8Rng,
    dist: Option<Normal<f64>>,
}

impl Noise {
    fn new(seed: u64, sigma: f64) -> Self {
        let dist = (sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("sigma validated"));
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            dist,
        }
    }

    fn sample(&mut self) -> f64 {
        match &self.dist {
            Some(d) => d.sample(&mut self.rng),
            None => 0.0,
        }
    }
}

/// Simulate one chirp run and log it at the record rate.
pub fn simulate_run(config: &ExperimentConfig, amplitude: f64, trial: usize) -> Result<RunRecord, ExperimentError> {
    let plant = config.plant();
    let hw = &config.hardware;
    let settings = &config.settings;
    let dt = settings.dt;
    let spec = config.chirp.with_amplitude(amplitude);
    spec.validate()?;
    if let Some(limit) = plant.spring.torque_limit {
        if amplitude >= limit {
            return Err(PlantError::SpringOverload {
                torque: amplitude,
                limit,
            }
            .into());
        }
    }
    let switches = config.switches;
    let mut noise = Noise::new(config.run_seed(amplitude, trial), settings.sensor_noise);

    let lead = config.lead_time();
    let lead_steps = (lead / dt).round() as usize;
    let sweep_steps = (spec.duration / dt).round() as usize;
    let n_steps = sweep_steps + 2 * lead_steps;
    let reference_at = |i: usize| -> Result<f64, ExperimentError> {
        if i < lead_steps || i > lead_steps + sweep_steps {
            return Ok(0.0);
        }
        let t = ((i - lead_steps) as f64 * dt).min(spec.duration);
        Ok(chirp(t, &spec)?)
    };
    let control = HoldSchedule::new(dt, config.control_rate)?;
    let sensing = HoldSchedule::new(dt, hw.force_sensor.sample_rate)?;
    let recording = HoldSchedule::new(dt, settings.record_rate)?;
    let (mut next_control, mut next_sensor, mut next_record) = (0usize, 0usize, 0usize);

    let mut controller = ForceController::new(config.gains, config.loop_config());
    let mut state = PlantState::at_rest();
    let mut sensor_reading = 0.0;

    let capacity = (n_steps as f64 * dt * settings.record_rate) as usize + 2;
    let mut record = RunRecord {
        dt: 1.0 / settings.record_rate,
        lead_time: lead_steps as f64 * dt,
        reference: Vec::with_capacity(capacity),
        command: Vec::with_capacity(capacity),
        measured: Vec::with_capacity(capacity),
        rotor_velocity: Vec::with_capacity(capacity),
        deflection_torque: Vec::with_capacity(capacity),
        sensor_torque: Vec::with_capacity(capacity),
        peak_output_torque: 0.0,
    };

    let deflection_reading = |torque: f64, noise: &mut Noise| {
        let deflection = torque / hw.se_spring.stiffness;
        let reading = if switches.quantization_enabled {
            deflection_to_torque(deflection, &hw.se_spring, hw.encoder_angle_resolution)
        } else {
            torque
        };
        reading + noise.sample()
    };

    for i in 0..=n_steps {
        let torque = output_torque(&state, &plant)?;
        record.peak_output_torque = record.peak_output_torque.max(torque.abs());

        if i == sensing.source_index(next_sensor) {
            let raw = torque + noise.sample();
            sensor_reading = if switches.quantization_enabled {
                let range = hw.force_sensor.range;
                quantize(raw.clamp(-range, range), hw.force_sensor.torque_resolution)
            } else {
                raw
            };
            next_sensor += 1;
        }

        if i == control.source_index(next_control) {
            let reference = reference_at(i)?;
            let feedback = match config.configuration.feedback_source() {
                FeedbackSource::None => 0.0,
                FeedbackSource::SeaDeflection => deflection_reading(torque, &mut noise),
                FeedbackSource::RigidSensor => sensor_reading,
            };
            controller.tick(reference, feedback);
            next_control += 1;
        }

        if i == recording.source_index(next_record) {
            record.reference.push(reference_at(i)?);
            record.command.push(controller.command());
            record.measured.push(torque + noise.sample());
            record.rotor_velocity.push(state.rotor_velocity);
            record.deflection_torque.push(deflection_reading(torque, &mut noise));
            record.sensor_torque.push(sensor_reading);
            next_record += 1;
        }

        if i < n_steps {
            state = step(&state, controller.command(), dt, &plant, switches)?;
        }
    }
    Ok(record)
}

fn analyse(config: &ExperimentConfig, record: &RunRecord, amplitude: f64) -> Result<Analysis, ExperimentError> {
    if record.peak_output_torque < NO_MOTION_FRACTION * amplitude {
        return Ok(Analysis::NoMotion {
            peak: record.peak_output_torque,
        });
    }
    let settings = &config.settings;
    let options = FrfOptions {
        segment_length: Some((settings.frf_segment_fraction * record.len() as f64).round() as usize),
        overlap: settings.frf_overlap,
        min_frequency: config.chirp.start_frequency,
        max_frequency: config.chirp.end_frequency,
    };
    let bode = estimate_frf(&record.reference_series(), &record.measured_series(), &options)?;
    let bandwidth = bandwidth(&bode, settings.dc_bins)?;
    Ok(Analysis::Measured { bode, bandwidth })
}

/// Simulate and analyse one run of the configured sweep.
pub fn run_trial(config: &ExperimentConfig, amplitude: f64, trial: usize) -> Result<TrialRun, ExperimentError> {
    config.validate()?;
    let record = simulate_run(config, amplitude, trial)?;
    let analysis = analyse(config, &record, amplitude)?;
    Ok(TrialRun { record, analysis })
}

/// Bode plot and bandwidth of the first trial at `amplitude`.
pub fn run_configuration(
    config: &ExperimentConfig,
    amplitude: f64,
) -> Result<(BodePlot, BandwidthResult), ExperimentError> {
    match run_trial(config, amplitude, 0)?.analysis {
        Analysis::Measured { bode, bandwidth } => Ok((bode, bandwidth)),
        Analysis::NoMotion { peak } => Err(ExperimentError::NoMotion { peak }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Ok,
    Stuck,
    Failed,
}

impl TrialStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrialStatus::Ok => "ok",
            TrialStatus::Stuck => "stuck",
            TrialStatus::Failed => "failed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [TrialStatus::Ok, TrialStatus::Stuck, TrialStatus::Failed]
            .into_iter()
            .find(|v| v.as_str() == s)
    }
}

/// One (amplitude, trial) cell of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub amplitude: f64,
    pub trial: usize,
    /// Zero for stuck runs, absent for failed ones.
    pub bandwidth: Option<f64>,
    pub method: Option<BandwidthMethod>,
    pub status: TrialStatus,
    /// Error case for failed runs.
    pub error: Option<String>,
}

impl SweepPoint {
    pub fn from_result(amplitude: f64, trial: usize, result: Result<Analysis, ExperimentError>) -> Self {
        let base = SweepPoint {
            amplitude,
            trial,
            bandwidth: None,
            method: None,
            status: TrialStatus::Failed,
            error: None,
        };
        match result {
            Ok(Analysis::Measured { bandwidth, .. }) => SweepPoint {
                bandwidth: Some(bandwidth.bandwidth),
                method: Some(bandwidth.method),
                status: TrialStatus::Ok,
                ..base
            },
            Ok(Analysis::NoMotion { .. }) => SweepPoint {
                bandwidth: Some(0.0),
                status: TrialStatus::Stuck,
                ..base
            },
            Err(e) => SweepPoint {
                error: Some(e.to_string()),
                ..base
            },
        }
    }
}

/// Bandwidth against amplitude for one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCurve {
    pub configuration: Configuration,
    pub points: Vec<SweepPoint>,
}

impl SweepCurve {
    /// Mean bandwidth of successful trials at each amplitude that had one.
    pub fn mean_by_amplitude(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64, usize)> = Vec::new();
        for p in self.points.iter().filter(|p| p.status == TrialStatus::Ok) {
            let bw = p.bandwidth.unwrap_or(0.0);
            match out.last_mut() {
                Some(last) if last.0 == p.amplitude => {
                    last.1 += bw;
                    last.2 += 1;
                }
                _ => out.push((p.amplitude, bw, 1)),
            }
        }
        out.into_iter().map(|(a, s, n)| (a, s / n as f64)).collect()
    }
}

/// Run every amplitude and trial of `config`, in parallel on the current
/// rayon pool. The result order and values do not depend on scheduling.
pub fn torque_sweep(config: &ExperimentConfig) -> Result<SweepCurve, ExperimentError> {
    config.validate()?;
    let jobs: Vec<(f64, usize)> = config
        .torque_amplitudes
        .iter()
        .flat_map(|&a| (0..config.trials_per_amplitude).map(move |t| (a, t)))
        .collect();
    let points = jobs
        .par_iter()
        .map(|&(amplitude, trial)| {
            let result = simulate_run(config, amplitude, trial).and_then(|r| analyse(config, &r, amplitude));
            SweepPoint::from_result(amplitude, trial, result)
        })
        .collect();
    Ok(SweepCurve {
        configuration: config.configuration,
        points,
    })
}
