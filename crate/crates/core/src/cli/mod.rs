//! Batch front end: `simulate`, `sweep` and `bandwidth` subcommands.
//!
//! Exit codes: 0 success, 2 bad input (config, CSV, paths), 3 simulation
//! error, 4 empty bode plot. Data goes to stdout, diagnostics to stderr.

pub mod config;
pub mod csv_io;
pub mod plot;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::experiments::{
    run_trial, summary_stats, torque_sweep, Analysis, ExperimentConfig, SummaryStats, SweepCurve, BENCH_REFERENCE,
};
use crate::sysid::{bandwidth, SysidError, DEFAULT_DC_BINS};
use config::ConfigFile;
use csv_io::CsvError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_SIMULATION: i32 = 3;
pub const EXIT_EMPTY_BODE: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "seabench",
    version,
    about = "Bench simulator and bandwidth analysis for series elastic actuators"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one chirp per configuration and write time series, bode plot and bandwidth.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Chirp amplitude in Nm.
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Sweep every configured amplitude and write the sweep CSV and summary table.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; defaults to the number of cores.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Also write bandwidth_vs_amplitude.svg.
        #[arg(long)]
        plot: bool,
    },
    /// Extract the bandwidth of a bode CSV and print it as JSON.
    Bandwidth { path: PathBuf },
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match cli.command {
        Command::Simulate {
            config,
            amplitude,
            out: dir,
            seed,
        } => cmd_simulate(&config, amplitude, &dir, seed, out, err),
        Command::Sweep {
            config,
            out: dir,
            jobs,
            seed,
            plot,
        } => cmd_sweep(&config, &dir, jobs, seed, plot, out, err),
        Command::Bandwidth { path } => cmd_bandwidth(&path, out, err),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Record of one command invocation and the files it produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_path: String,
    pub output_dir: String,
    pub artifacts: Vec<Artifact>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    fn new(config_path: &Path, output_dir: &Path) -> Self {
        Self {
            config_path: config_path.display().to_string(),
            output_dir: output_dir.display().to_string(),
            artifacts: Vec::new(),
        }
    }

    fn write_file(&mut self, name: &str, bytes: &[u8]) -> std::io::Result<()> {
        let path = Path::new(&self.output_dir).join(name);
        let mut f = BufWriter::new(File::create(path)?);
        f.write_all(bytes)?;
        f.flush()?;
        self.artifacts.push(Artifact {
            file: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    fn save(&self) -> std::io::Result<()> {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes") + "\n";
        std::fs::write(Path::new(&self.output_dir).join(MANIFEST_FILE), json)
    }

    pub fn load(dir: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(dir.join(MANIFEST_FILE)).map_err(|e| e.to_string())?;
        serde_json::from_str(&text).map_err(|e| e.to_string())
    }

    /// Check every artifact exists under `dir` and matches its digest.
    pub fn verify(&self, dir: &Path) -> Result<(), String> {
        for a in &self.artifacts {
            let bytes = std::fs::read(dir.join(&a.file)).map_err(|e| format!("{}: {e}", a.file))?;
            if sha256_hex(&bytes) != a.sha256 {
                return Err(format!("{}: digest mismatch", a.file));
            }
        }
        Ok(())
    }
}

fn load_experiments(path: &Path, seed: Option<u64>, err: &mut dyn Write) -> Result<Vec<ExperimentConfig>, i32> {
    let mut file = ConfigFile::load(path).map_err(|e| {
        let _ = writeln!(err, "error: {e}");
        EXIT_INPUT
    })?;
    if let Some(seed) = seed {
        file.random_seed = seed;
    }
    file.experiments().map_err(|e| {
        let _ = writeln!(err, "error: {e}");
        EXIT_INPUT
    })
}

fn prepare_dir(dir: &Path, err: &mut dyn Write) -> Result<(), i32> {
    std::fs::create_dir_all(dir).map_err(|e| {
        let _ = writeln!(err, "error: cannot create {}: {e}", dir.display());
        EXIT_INPUT
    })
}

fn io_failure(err: &mut dyn Write, e: impl std::fmt::Display) -> i32 {
    let _ = writeln!(err, "error: writing outputs: {e}");
    EXIT_INPUT
}

#[derive(Serialize)]
struct SimulationSummary<'a> {
    configuration: &'a str,
    amplitude_nm: f64,
    status: &'a str,
    bandwidth_hz: f64,
    crossover_hz: Option<f64>,
    dc_gain_db: Option<f64>,
    method: Option<&'a str>,
    peak_output_torque_nm: f64,
}

pub fn cmd_simulate(
    config_path: &Path,
    amplitude: f64,
    dir: &Path,
    seed: Option<u64>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    if !(amplitude > 0.0) || !amplitude.is_finite() {
        let _ = writeln!(err, "error: amplitude must be a positive number of Nm, got {amplitude}");
        return EXIT_INPUT;
    }
    let experiments = match load_experiments(config_path, seed, err) {
        Ok(e) => e,
        Err(code) => return code,
    };
    if let Err(code) = prepare_dir(dir, err) {
        return code;
    }
    let mut manifest = RunManifest::new(config_path, dir);

    for config in &experiments {
        let name = config.configuration.as_str();
        let run = match run_trial(config, amplitude, 0) {
            Ok(run) => run,
            Err(e) => {
                let _ = writeln!(err, "error: {name} at {amplitude} Nm: {e}");
                return if e.is_config_error() {
                    EXIT_INPUT
                } else {
                    EXIT_SIMULATION
                };
            }
        };

        let mut ts = Vec::new();
        if let Err(e) = csv_io::write_timeseries(&mut ts, &run.record) {
            return io_failure(err, e);
        }
        if let Err(e) = manifest.write_file(&format!("{name}_timeseries.csv"), &ts) {
            return io_failure(err, e);
        }

        let summary = match &run.analysis {
            Analysis::Measured { bode, bandwidth } => {
                let mut buf = Vec::new();
                if let Err(e) = csv_io::write_bode(&mut buf, bode) {
                    return io_failure(err, e);
                }
                if let Err(e) = manifest.write_file(&format!("{name}_bode.csv"), &buf) {
                    return io_failure(err, e);
                }
                SimulationSummary {
                    configuration: name,
                    amplitude_nm: amplitude,
                    status: "ok",
                    bandwidth_hz: bandwidth.bandwidth,
                    crossover_hz: bandwidth.crossover,
                    dc_gain_db: Some(bandwidth.dc_gain_db),
                    method: Some(bandwidth.method.as_str()),
                    peak_output_torque_nm: run.record.peak_output_torque,
                }
            }
            Analysis::NoMotion { peak } => {
                let _ = writeln!(
                    err,
                    "warning: {name} at {amplitude} Nm never broke away; bandwidth reported as 0"
                );
                SimulationSummary {
                    configuration: name,
                    amplitude_nm: amplitude,
                    status: "stuck",
                    bandwidth_hz: 0.0,
                    crossover_hz: None,
                    dc_gain_db: None,
                    method: None,
                    peak_output_torque_nm: *peak,
                }
            }
        };
        let json = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
        if let Err(e) = manifest.write_file(&format!("{name}_bandwidth.json"), json.as_bytes()) {
            return io_failure(err, e);
        }
        let _ = writeln!(out, "{}", serde_json::to_string(&summary).expect("summary serializes"));
    }

    if let Err(e) = manifest.save() {
        return io_failure(err, e);
    }
    EXIT_OK
}

/// Summary table laid out like the bench report.
pub fn format_summary_table(rows: &[(&str, Option<SummaryStats>)]) -> String {
    let mut s = String::from("Summary Bandwidth statistics\n");
    s.push_str(&format!(
        "{:<18} {:>10} {:>10} {:>10} {:>13}\n",
        "System", "B_avg [Hz]", "B_min [Hz]", "B_max [Hz]", "T(B_max) [Nm]"
    ));
    for (label, stats) in rows {
        match stats {
            Some(st) => s.push_str(&format!(
                "{:<18} {:>10.3} {:>10.3} {:>10.3} {:>13.2}\n",
                label, st.b_avg, st.b_min, st.b_max, st.t_at_b_max
            )),
            None => s.push_str(&format!(
                "{:<18} {:>10} {:>10} {:>10} {:>13}\n",
                label, "n/a", "n/a", "n/a", "n/a"
            )),
        }
    }
    s
}

pub fn cmd_sweep(
    config_path: &Path,
    dir: &Path,
    jobs: Option<usize>,
    seed: Option<u64>,
    plot: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let experiments = match load_experiments(config_path, seed, err) {
        Ok(e) => e,
        Err(code) => return code,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            let _ = writeln!(err, "error: --jobs must be at least 1");
            return EXIT_INPUT;
        }
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start worker pool: {e}");
            return EXIT_SIMULATION;
        }
    };
    if let Err(code) = prepare_dir(dir, err) {
        return code;
    }

    let mut curves: Vec<SweepCurve> = Vec::with_capacity(experiments.len());
    for config in &experiments {
        match pool.install(|| torque_sweep(config)) {
            Ok(curve) => {
                for p in curve.points.iter().filter(|p| p.error.is_some()) {
                    let _ = writeln!(
                        err,
                        "warning: {} at {} Nm, trial {}: {}",
                        config.configuration.as_str(),
                        p.amplitude,
                        p.trial,
                        p.error.as_deref().unwrap_or_default()
                    );
                }
                curves.push(curve);
            }
            Err(e) => {
                let _ = writeln!(err, "error: {}: {e}", config.configuration.as_str());
                return if e.is_config_error() {
                    EXIT_INPUT
                } else {
                    EXIT_SIMULATION
                };
            }
        }
    }

    let mut manifest = RunManifest::new(config_path, dir);
    let mut buf = Vec::new();
    if let Err(e) = csv_io::write_sweep(&mut buf, &curves) {
        return io_failure(err, e);
    }
    if let Err(e) = manifest.write_file("sweep.csv", &buf) {
        return io_failure(err, e);
    }

    let rows: Vec<(&str, Option<SummaryStats>)> = curves
        .iter()
        .map(|c| (c.configuration.label(), summary_stats(c).ok()))
        .collect();
    let table = format_summary_table(&rows);
    let reference: Vec<(&str, Option<SummaryStats>)> = BENCH_REFERENCE
        .iter()
        .filter(|(c, _)| curves.iter().any(|curve| curve.configuration == *c))
        .map(|(c, s)| (c.label(), Some(*s)))
        .collect();
    let report = format!(
        "{table}\nBench reference (hardware)\n{}",
        format_summary_table(&reference)
    );
    if let Err(e) = manifest.write_file("summary.txt", report.as_bytes()) {
        return io_failure(err, e);
    }
    let _ = write!(out, "{table}");

    if plot {
        let svg = plot::bandwidth_svg(&curves);
        if let Err(e) = manifest.write_file("bandwidth_vs_amplitude.svg", svg.as_bytes()) {
            return io_failure(err, e);
        }
    }
    if let Err(e) = manifest.save() {
        return io_failure(err, e);
    }
    EXIT_OK
}

pub fn cmd_bandwidth(path: &Path, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) => {
            let _ = writeln!(err, "error: cannot read {}: {e}", path.display());
            return EXIT_INPUT;
        }
    };
    let bode = match csv_io::read_bode(file) {
        Ok(b) => b,
        Err(CsvError::Bode(SysidError::EmptyBode)) => {
            let _ = writeln!(err, "error: EmptyBode: {} has no data rows", path.display());
            return EXIT_EMPTY_BODE;
        }
        Err(e) => {
            let _ = writeln!(err, "error: malformed bode CSV {}: {e}", path.display());
            return EXIT_INPUT;
        }
    };
    match bandwidth(&bode, DEFAULT_DC_BINS.min(bode.len())) {
        Ok(result) => {
            let _ = writeln!(out, "{}", serde_json::to_string(&result).expect("result serializes"));
            EXIT_OK
        }
        Err(SysidError::EmptyBode) => {
            let _ = writeln!(err, "error: EmptyBode");
            EXIT_EMPTY_BODE
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_layout() {
        let t = format_summary_table(&[
            (
                "Motor",
                Some(SummaryStats {
                    b_avg: 5.122,
                    b_min: 0.42,
                    b_max: 10.32,
                    t_at_b_max: 1.0,
                }),
            ),
            ("Closed Loop SEA", None),
        ]);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], "Summary Bandwidth statistics");
        assert!(lines[2].starts_with("Motor") && lines[2].contains("10.320") && lines[2].ends_with("1.00"));
        assert!(lines[3].contains("n/a"));
    }

    #[test]
    fn cli_parses_all_flags() {
        let cli = Cli::try_parse_from([
            "seabench", "sweep", "--config", "c.json", "--out", "o", "--jobs", "2", "--seed", "9", "--plot",
        ])
        .unwrap();
        match cli.command {
            Command::Sweep { jobs, seed, plot, .. } => assert_eq!((jobs, seed, plot), (Some(2), Some(9), true)),
            other => panic!("{other:?}"),
        }
        assert!(Cli::try_parse_from(["seabench", "simulate", "--config", "c.json"]).is_err());
    }

    #[test]
    fn digest_is_sha256() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
