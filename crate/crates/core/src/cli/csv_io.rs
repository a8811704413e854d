//! CSV schemas for bode plots, time series and sweeps. Floats are written
//! with the shortest representation that parses back to the same value.

use std::io::{Read, Write};

use crate::experiments::{Configuration, RunRecord, SweepCurve, SweepPoint, TrialStatus};
use crate::sysid::{BandwidthMethod, BodePlot, SysidError};

pub const BODE_HEADER: [&str; 3] = ["frequency_hz", "magnitude_db", "phase_deg"];
pub const TIMESERIES_HEADER: [&str; 5] = [
    "time_s",
    "reference_torque_nm",
    "command_torque_nm",
    "measured_torque_nm",
    "rotor_velocity_rad_s",
];
pub const SWEEP_HEADER: [&str; 6] = [
    "configuration",
    "amplitude_nm",
    "trial",
    "bandwidth_hz",
    "method",
    "status",
];

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("expected header {expected:?}, found {found:?}")]
    Header { expected: Vec<String>, found: Vec<String> },
    #[error("line {line}: {message}")]
    Field { line: u64, message: String },
    #[error(transparent)]
    Bode(#[from] SysidError),
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn reader<R: Read>(input: R, expected: &[&str]) -> Result<csv::Reader<R>, CsvError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let found: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if found.is_empty() || found.iter().map(String::as_str).ne(expected.iter().copied()) {
        return Err(CsvError::Header {
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found,
        });
    }
    Ok(rdr)
}

fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn float(record: &csv::StringRecord, index: usize) -> Result<f64, CsvError> {
    let raw = record.get(index).unwrap_or("");
    raw.trim().parse::<f64>().map_err(|_| CsvError::Field {
        line: line_of(record),
        message: format!("column {index}: {raw:?} is not a number"),
    })
}

fn field_error(record: &csv::StringRecord, message: String) -> CsvError {
    CsvError::Field {
        line: line_of(record),
        message,
    }
}

pub fn write_bode<W: Write>(out: W, bode: &BodePlot) -> Result<(), CsvError> {
    let mut w = writer(out);
    w.write_record(BODE_HEADER)?;
    for i in 0..bode.len() {
        w.write_record([
            bode.frequencies()[i].to_string(),
            bode.magnitude_db()[i].to_string(),
            bode.phase_deg()[i].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Parse a bode CSV. Wrapped phase is unwrapped; an already unwrapped
/// column passes through unchanged.
pub fn read_bode<R: Read>(input: R) -> Result<BodePlot, CsvError> {
    let mut rdr = reader(input, &BODE_HEADER)?;
    let (mut f, mut m, mut p) = (Vec::new(), Vec::new(), Vec::new());
    for record in rdr.records() {
        let record = record?;
        f.push(float(&record, 0)?);
        m.push(float(&record, 1)?);
        p.push(float(&record, 2)?);
    }
    if f.is_empty() {
        return Err(SysidError::EmptyBode.into());
    }
    Ok(BodePlot::from_wrapped(f, m, &p)?)
}

pub fn write_timeseries<W: Write>(out: W, record: &RunRecord) -> Result<(), CsvError> {
    let mut w = writer(out);
    w.write_record(TIMESERIES_HEADER)?;
    for i in 0..record.len() {
        w.write_record([
            record.time(i).to_string(),
            record.reference[i].to_string(),
            record.command[i].to_string(),
            record.measured[i].to_string(),
            record.rotor_velocity[i].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep<W: Write>(out: W, curves: &[SweepCurve]) -> Result<(), CsvError> {
    let mut w = writer(out);
    w.write_record(SWEEP_HEADER)?;
    for curve in curves {
        for p in &curve.points {
            w.write_record([
                curve.configuration.as_str().to_string(),
                p.amplitude.to_string(),
                p.trial.to_string(),
                p.bandwidth.map(|b| b.to_string()).unwrap_or_default(),
                p.method.map(|m| m.as_str().to_string()).unwrap_or_default(),
                p.status.as_str().to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Parse a sweep CSV back into per-configuration curves, in file order.
/// Error text of failed trials is not part of the schema and comes back
/// empty.
pub fn read_sweep<R: Read>(input: R) -> Result<Vec<SweepCurve>, CsvError> {
    let mut rdr = reader(input, &SWEEP_HEADER)?;
    let mut curves: Vec<SweepCurve> = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let name = record.get(0).unwrap_or("");
        let configuration = Configuration::parse(name)
            .ok_or_else(|| field_error(&record, format!("unknown configuration {name:?}")))?;
        let trial = record
            .get(2)
            .unwrap_or("")
            .parse::<usize>()
            .map_err(|_| field_error(&record, "trial is not a count".into()))?;
        let bandwidth = match record.get(3).unwrap_or("") {
            "" => None,
            _ => Some(float(&record, 3)?),
        };
        let method = match record.get(4).unwrap_or("") {
            "" => None,
            m => Some(BandwidthMethod::parse(m).ok_or_else(|| field_error(&record, format!("unknown method {m:?}")))?),
        };
        let status_raw = record.get(5).unwrap_or("");
        let status = TrialStatus::parse(status_raw)
            .ok_or_else(|| field_error(&record, format!("unknown status {status_raw:?}")))?;
        let point = SweepPoint {
            amplitude: float(&record, 1)?,
            trial,
            bandwidth,
            method,
            status,
            error: None,
        };
        match curves.last_mut() {
            Some(c) if c.configuration == configuration => c.points.push(point),
            _ => curves.push(SweepCurve {
                configuration,
                points: vec![point],
            }),
        }
    }
    Ok(curves)
}
