//! Verification suites and flow experiments driven by JSON configs.
//!
//! A run writes `<suite>.csv` (one row per draw, point or ladder rung) and
//! `manifest.json` (config echo, version, wall time, assertions) to the
//! output directory. CSV bytes depend only on the config and seed.

pub mod config;
pub mod suites;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use tma_core::jets::ExpressionSpec;

pub use config::{ExperimentConfig, Suite};
pub use suites::{Assertion, SuiteOutput};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Spec(#[from] tma_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Spec(_) => 2,
            CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub suite: &'static str,
    pub version: &'static str,
    pub core_version: &'static str,
    pub config: ExperimentConfig,
    pub workers: usize,
    pub wall_seconds: f64,
    pub rows: usize,
    pub csv: PathBuf,
    pub assertions: Vec<Assertion>,
    pub passed: bool,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub manifest: Manifest,
    pub output: SuiteOutput,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.manifest.passed {
            0
        } else {
            1
        }
    }
}

/// Runs the suite on a pool of `workers` threads and writes the report.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path, workers: usize) -> Result<RunOutcome, CliError> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("workers: {e}")))?;
    let start = Instant::now();
    let output = pool.install(|| suites::run_suite(cfg));
    let wall_seconds = start.elapsed().as_secs_f64();
    std::fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join(format!("{}.csv", cfg.suite.name()));
    let manifest = Manifest {
        suite: cfg.suite.name(),
        version: env!("CARGO_PKG_VERSION"),
        core_version: tma_core::VERSION,
        config: cfg.clone(),
        workers: workers.max(1),
        wall_seconds,
        rows: output.rows.len(),
        csv: csv_path.clone(),
        passed: output.assertions.iter().all(|a| a.pass),
        assertions: output.assertions.clone(),
    };
    let csv_result = write_csv(&csv_path, &output);
    std::fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n",
    )?;
    csv_result?;
    Ok(RunOutcome { manifest, output })
}

/// RFC 4180 with `\n` line endings.
pub fn write_csv(path: &Path, output: &SuiteOutput) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    w.write_record(&output.header)?;
    for row in &output.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads one specification or an array of them.
pub fn ingest_function_specs(path: &Path) -> Result<Vec<ExpressionSpec>, CliError> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| {
        CliError::Spec(tma_core::Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    })?;
    match value {
        serde_json::Value::Array(items) => items
            .iter()
            .map(|v| Ok(ExpressionSpec::from_json(&v.to_string())?))
            .collect(),
        _ => Ok(vec![ExpressionSpec::from_json(&text)?]),
    }
}

pub fn ingest_function_spec(path: &Path) -> Result<ExpressionSpec, CliError> {
    let text = std::fs::read_to_string(path)?;
    Ok(ExpressionSpec::from_json(&text)?)
}
