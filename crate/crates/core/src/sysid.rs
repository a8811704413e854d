//! Frequency-response estimation from swept-sine records and bandwidth
//! extraction.
//!
//! The bandwidth rule tolerates a temporary magnitude dip below -3 dB as
//! long as the phase later recovers past the maximum it held before its
//! global minimum:
//!
//! 1. DC gain from the lowest bins.
//! 2. In-band set: every bin within 3 dB of the DC gain (inclusive).
//! 3. Locate the global phase minimum.
//! 4. Split the phase curve into the bins at or below that frequency and
//!    the bins at or above it.
//! 5. Take the maximum phase of the lower part.
//! 6. Crossover: lowest frequency in the upper part whose phase reaches
//!    that maximum.
//! 7. Bandwidth: highest in-band frequency not above the crossover.
//!
//! Without a phase recovery the rule reduces to the classic first -3 dB
//! crossing.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signals::TimeSeries;

pub const DEFAULT_DC_BINS: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SysidError {
    #[error("InsufficientData: {0}")]
    InsufficientData(String),
    #[error("ZeroInputPower: input auto-spectrum vanishes at {frequency:.4} Hz")]
    ZeroInputPower { frequency: f64 },
    #[error("EmptyBode: no frequency bins")]
    EmptyBode,
    #[error("FitFailed: {0}")]
    FitFailed(String),
    #[error("invalid Bode plot: {0}")]
    InvalidBode(String),
    #[error("invalid estimator options: {0}")]
    InvalidOptions(String),
}

/// Magnitude in dB and unwrapped phase in degrees on an ascending grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BodePlot {
    frequencies: Vec<f64>,
    magnitude_db: Vec<f64>,
    phase_deg: Vec<f64>,
}

impl BodePlot {
    /// Build from already-unwrapped phase.
    pub fn new(frequencies: Vec<f64>, magnitude_db: Vec<f64>, phase_deg: Vec<f64>) -> Result<Self, SysidError> {
        if frequencies.len() != magnitude_db.len() || frequencies.len() != phase_deg.len() {
            return Err(SysidError::InvalidBode(format!(
                "length mismatch: {} frequencies, {} magnitudes, {} phases",
                frequencies.len(),
                magnitude_db.len(),
                phase_deg.len()
            )));
        }
        if let Some(w) = frequencies.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(SysidError::InvalidBode(format!(
                "frequencies must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if let Some(w) = phase_deg.windows(2).find(|w| (w[1] - w[0]).abs() >= 180.0) {
            return Err(SysidError::InvalidBode(format!(
                "phase is not unwrapped ({} then {} deg)",
                w[0], w[1]
            )));
        }
        Ok(Self {
            frequencies,
            magnitude_db,
            phase_deg,
        })
    }

    /// Build from phase wrapped to (-180, 180].
    pub fn from_wrapped(
        frequencies: Vec<f64>,
        magnitude_db: Vec<f64>,
        wrapped_phase_deg: &[f64],
    ) -> Result<Self, SysidError> {
        Self::new(frequencies, magnitude_db, unwrap_phase_deg(wrapped_phase_deg))
    }

    /// Evaluate a complex response on a frequency grid.
    pub fn from_response(frequencies: &[f64], response: impl Fn(f64) -> Complex<f64>) -> Result<Self, SysidError> {
        let values: Vec<Complex<f64>> = frequencies.iter().map(|&f| response(f)).collect();
        let magnitude = values.iter().map(|h| 20.0 * h.norm().log10()).collect();
        let wrapped: Vec<f64> = values.iter().map(|h| h.arg().to_degrees()).collect();
        Self::from_wrapped(frequencies.to_vec(), magnitude, &wrapped)
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn magnitude_db(&self) -> &[f64] {
        &self.magnitude_db
    }

    pub fn phase_deg(&self) -> &[f64] {
        &self.phase_deg
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Same response with every magnitude shifted by `offset_db`.
    pub fn with_magnitude_offset(&self, offset_db: f64) -> Self {
        Self {
            magnitude_db: self.magnitude_db.iter().map(|m| m + offset_db).collect(),
            ..self.clone()
        }
    }

    /// Same response with every phase shifted by `offset_deg`.
    pub fn with_phase_offset(&self, offset_deg: f64) -> Self {
        Self {
            phase_deg: self.phase_deg.iter().map(|p| p + offset_deg).collect(),
            ..self.clone()
        }
    }
}

/// Remove ±360° jumps, anchored at the first sample.
pub fn unwrap_phase_deg(wrapped: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(wrapped.len());
    let mut correction = 0.0;
    let mut prev = None;
    for &p in wrapped {
        if let Some(prev) = prev {
            let diff: f64 = p - prev;
            correction -= 360.0 * (diff / 360.0).round();
        }
        prev = Some(p);
        out.push(p + correction);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandwidthMethod {
    PhaseRecovery,
    ClassicMinus3dbFallback,
    FullBand,
}

impl BandwidthMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            BandwidthMethod::PhaseRecovery => "phase_recovery",
            BandwidthMethod::ClassicMinus3dbFallback => "classic_minus3db_fallback",
            BandwidthMethod::FullBand => "full_band",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "phase_recovery" => Some(BandwidthMethod::PhaseRecovery),
            "classic_minus3db_fallback" => Some(BandwidthMethod::ClassicMinus3dbFallback),
            "full_band" => Some(BandwidthMethod::FullBand),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthResult {
    #[serde(rename = "bandwidth_hz")]
    pub bandwidth: f64,
    #[serde(rename = "crossover_hz")]
    pub crossover: Option<f64>,
    pub dc_gain_db: f64,
    pub method: BandwidthMethod,
}

/// Welch-style H1 estimator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrfOptions {
    /// Samples per segment; `None` uses a quarter of the record.
    pub segment_length: Option<usize>,
    pub overlap: f64,
    /// Bins below this frequency are discarded (the sweep start).
    pub min_frequency: f64,
    /// Bins above this frequency are discarded (the sweep end).
    pub max_frequency: f64,
}

impl FrfOptions {
    pub fn for_band(min_frequency: f64, max_frequency: f64) -> Self {
        Self {
            segment_length: None,
            overlap: 0.5,
            min_frequency,
            max_frequency,
        }
    }
}

fn hann(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos())
        .collect()
}

/// H1 estimate `S_xy / S_xx` from Hann-tapered, overlapped segments.
pub fn estimate_frf(input: &TimeSeries, output: &TimeSeries, options: &FrfOptions) -> Result<BodePlot, SysidError> {
    if input.len() != output.len() || (input.dt - output.dt).abs() > 1e-12 * input.dt {
        return Err(SysidError::InsufficientData(format!(
            "input and output must share dt and length ({} vs {} samples)",
            input.len(),
            output.len()
        )));
    }
    if !(0.0..1.0).contains(&options.overlap) {
        return Err(SysidError::InvalidOptions(format!(
            "overlap must lie in [0, 1), got {}",
            options.overlap
        )));
    }
    let n = input.len();
    let seg = options.segment_length.unwrap_or(n / 4);
    if seg < 2 || seg > n {
        return Err(SysidError::InsufficientData(format!(
            "segment length {seg} does not fit a record of {n} samples"
        )));
    }
    let hop = (((1.0 - options.overlap) * seg as f64).floor() as usize).max(1);
    let segments = (n - seg) / hop + 1;
    if segments < 4 {
        return Err(SysidError::InsufficientData(format!(
            "only {segments} segments; at least 4 required"
        )));
    }

    let window = hann(seg);
    let fft = FftPlanner::new().plan_fft_forward(seg);
    let half = seg / 2;
    let mut sxx = vec![0.0; half + 1];
    let mut sxy = vec![Complex::new(0.0, 0.0); half + 1];
    let mut xbuf = vec![Complex::new(0.0, 0.0); seg];
    let mut ybuf = vec![Complex::new(0.0, 0.0); seg];

    for s in 0..segments {
        let start = s * hop;
        let xs = &input.samples[start..start + seg];
        let ys = &output.samples[start..start + seg];
        let xmean = xs.iter().sum::<f64>() / seg as f64;
        let ymean = ys.iter().sum::<f64>() / seg as f64;
        for i in 0..seg {
            xbuf[i] = Complex::new((xs[i] - xmean) * window[i], 0.0);
            ybuf[i] = Complex::new((ys[i] - ymean) * window[i], 0.0);
        }
        fft.process(&mut xbuf);
        fft.process(&mut ybuf);
        for k in 0..=half {
            sxx[k] += xbuf[k].norm_sqr();
            sxy[k] += xbuf[k].conj() * ybuf[k];
        }
    }

    let df = 1.0 / (seg as f64 * input.dt);
    let retained: Vec<usize> = (1..=half)
        .filter(|&k| {
            let f = k as f64 * df;
            f >= options.min_frequency && f <= options.max_frequency
        })
        .collect();
    let peak = retained.iter().map(|&k| sxx[k]).fold(0.0, f64::max);
    let mut frequencies = Vec::with_capacity(retained.len());
    let mut magnitude = Vec::with_capacity(retained.len());
    let mut wrapped = Vec::with_capacity(retained.len());
    for &k in &retained {
        let f = k as f64 * df;
        if !(sxx[k] > 1e-14 * peak) {
            return Err(SysidError::ZeroInputPower { frequency: f });
        }
        let h = sxy[k] / sxx[k];
        frequencies.push(f);
        // Floor at -300 dB so a blocked output stays finite.
        magnitude.push(20.0 * h.norm().max(1e-15).log10());
        wrapped.push(h.arg().to_degrees());
    }
    BodePlot::from_wrapped(frequencies, magnitude, &wrapped)
}

/// Mean magnitude of the `n_bins` lowest-frequency bins.
pub fn dc_gain(bode: &BodePlot, n_bins: usize) -> Result<f64, SysidError> {
    if bode.is_empty() {
        return Err(SysidError::EmptyBode);
    }
    if n_bins == 0 || n_bins > bode.len() {
        return Err(SysidError::InvalidOptions(format!(
            "need 1 <= n_bins <= {}, got {n_bins}",
            bode.len()
        )));
    }
    Ok(bode.magnitude_db[..n_bins].iter().sum::<f64>() / n_bins as f64)
}

fn in_band_mask(bode: &BodePlot, dc: f64) -> Vec<bool> {
    bode.magnitude_db.iter().map(|&m| m >= dc - 3.0).collect()
}

/// Highest frequency of the contiguous in-band run starting at the lowest bin.
fn first_drop(bode: &BodePlot, in_band: &[bool]) -> f64 {
    let run = in_band.iter().take_while(|&&b| b).count();
    bode.frequencies[run.saturating_sub(1)]
}

/// Classic definition: where the magnitude first drops below DC - 3 dB.
pub fn classic_bandwidth(bode: &BodePlot, n_dc_bins: usize) -> Result<f64, SysidError> {
    let dc = dc_gain(bode, n_dc_bins)?;
    Ok(first_drop(bode, &in_band_mask(bode, dc)))
}

/// Phase-recovery bandwidth rule (see module docs).
pub fn bandwidth(bode: &BodePlot, n_dc_bins: usize) -> Result<BandwidthResult, SysidError> {
    let dc_gain_db = dc_gain(bode, n_dc_bins)?;
    let in_band = in_band_mask(bode, dc_gain_db);
    let f = &bode.frequencies;
    let phase = &bode.phase_deg;

    if in_band.iter().all(|&b| b) {
        return Ok(BandwidthResult {
            bandwidth: f[f.len() - 1],
            crossover: None,
            dc_gain_db,
            method: BandwidthMethod::FullBand,
        });
    }

    let min_index = phase
        .iter()
        .enumerate()
        .fold(0, |best, (i, &p)| if p < phase[best] { i } else { best });
    let pre_min_max = phase[..=min_index].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let recovered = if pre_min_max > phase[min_index] {
        (min_index + 1..phase.len()).find(|&i| phase[i] > pre_min_max)
    } else {
        None
    };

    if let Some(cross) = recovered {
        let crossover = f[cross];
        if let Some(i) = (0..=cross).rev().find(|&i| in_band[i]) {
            return Ok(BandwidthResult {
                bandwidth: f[i],
                crossover: Some(crossover),
                dc_gain_db,
                method: BandwidthMethod::PhaseRecovery,
            });
        }
    }

    Ok(BandwidthResult {
        bandwidth: first_drop(bode, &in_band),
        crossover: None,
        dc_gain_db,
        method: BandwidthMethod::ClassicMinus3dbFallback,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeConstantFit {
    pub time_constant: f64,
    /// RMS residual of the log-linear fit.
    pub residual: f64,
    pub points: usize,
}

/// First-order time constant from a step response via a least-squares fit
/// of `ln(1 - progress)` against time over the 10-90% rise.
pub fn estimate_time_constant(step_response: &TimeSeries, final_value: f64) -> Result<TimeConstantFit, SysidError> {
    let initial = *step_response
        .samples
        .first()
        .ok_or_else(|| SysidError::FitFailed("empty response".into()))?;
    let span = final_value - initial;
    if span == 0.0 {
        return Err(SysidError::FitFailed("final value equals initial value".into()));
    }
    let progress = |y: f64| (y - initial) / span;
    let peak = step_response
        .samples
        .iter()
        .map(|&y| progress(y))
        .fold(f64::NEG_INFINITY, f64::max);
    if peak < 1.0 - (-1.0f64).exp() {
        return Err(SysidError::FitFailed(format!(
            "response reaches only {:.1}% of the final value",
            100.0 * peak
        )));
    }

    let points: Vec<(f64, f64)> = step_response
        .samples
        .iter()
        .enumerate()
        .filter_map(|(i, &y)| {
            let p = progress(y);
            (0.1..=0.9)
                .contains(&p)
                .then(|| (step_response.time_at(i), (1.0 - p).ln()))
        })
        .collect();
    if points.len() < 2 {
        return Err(SysidError::FitFailed(
            "fewer than two samples inside the 10-90% rise".into(),
        ));
    }

    let n = points.len() as f64;
    let mean_t = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_l = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_t).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_t) * (p.1 - mean_l)).sum();
    if sxx == 0.0 {
        return Err(SysidError::FitFailed("rise samples share one timestamp".into()));
    }
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return Err(SysidError::FitFailed(
            "response does not approach the final value".into(),
        ));
    }
    let intercept = mean_l - slope * mean_t;
    let residual = (points
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(TimeConstantFit {
        time_constant: -1.0 / slope,
        residual,
        points: points.len(),
    })
}
