//! Seeded, replicated experiment runner.
//!
//! Replica `r` of an experiment with master seed `s` uses `split_seed(s, r)`,
//! and replica results are gathered in index order, so every output file is a
//! function of the config alone.

mod config;
mod ops;

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

pub use config::{BoundaryMode, ExperimentConfig, Operation, Reference, RootLaw, SourceSpec};

use crate::contraction::ContractionError;
use crate::ends::EndsError;
use crate::network::NetworkError;
use crate::oracle::OracleError;
use crate::parallel::default_workers;
use crate::source::SourceError;
use crate::update::UpdateError;
use crate::walk::WalkError;
use crate::wilson::WilsonError;

/// p-values at or below this fail a statistical check.
pub const STAT_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{0}")]
    Runtime(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Budget(_) => 3,
            HarnessError::Io(_) | HarnessError::Runtime(_) => 1,
        }
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for HarnessError {
    fn from(e: serde_json::Error) -> Self {
        HarnessError::Runtime(e.to_string())
    }
}

impl From<NetworkError> for HarnessError {
    fn from(e: NetworkError) -> Self {
        HarnessError::Config(format!("{} ({})", e, e.code()))
    }
}

impl From<SourceError> for HarnessError {
    fn from(e: SourceError) -> Self {
        match e {
            SourceError::RejectionBudget { .. } => HarnessError::Budget(e.to_string()),
            SourceError::Classifier(_) => HarnessError::Runtime(e.to_string()),
            SourceError::Network(n) => n.into(),
            _ => HarnessError::Config(e.to_string()),
        }
    }
}

impl From<ContractionError> for HarnessError {
    fn from(e: ContractionError) -> Self {
        match e {
            ContractionError::Source(s) => s.into(),
            ContractionError::Network(n) => n.into(),
            _ => HarnessError::Config(e.to_string()),
        }
    }
}

impl From<WalkError> for HarnessError {
    fn from(e: WalkError) -> Self {
        match e {
            WalkError::StepBudgetExceeded { .. } => HarnessError::Budget(e.to_string()),
            _ => HarnessError::Runtime(e.to_string()),
        }
    }
}

impl From<WilsonError> for HarnessError {
    fn from(e: WilsonError) -> Self {
        match e {
            WilsonError::Walk(w) => w.into(),
            WilsonError::Contraction(c) => c.into(),
            WilsonError::Network(n) => n.into(),
            _ => HarnessError::Config(e.to_string()),
        }
    }
}

impl From<UpdateError> for HarnessError {
    fn from(e: UpdateError) -> Self {
        match e {
            UpdateError::Walk(w) => w.into(),
            _ => HarnessError::Runtime(e.to_string()),
        }
    }
}

impl From<OracleError> for HarnessError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::EdgeBudget { .. } | OracleError::StateBudget { .. } => HarnessError::Budget(e.to_string()),
            OracleError::Contraction(c) => c.into(),
            OracleError::Update(u) => u.into(),
            OracleError::BoundaryVertex | OracleError::UnknownVertex(_) => HarnessError::Config(e.to_string()),
            _ => HarnessError::Runtime(e.to_string()),
        }
    }
}

impl From<EndsError> for HarnessError {
    fn from(e: EndsError) -> Self {
        match e {
            EndsError::Update(u) => u.into(),
            EndsError::Contraction(c) => c.into(),
            EndsError::Network(n) => n.into(),
            _ => HarnessError::Config(e.to_string()),
        }
    }
}

/// How a completed run judged its own checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Passed,
    CertificationFailed,
    StatisticalFailed,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Passed => 0,
            Verdict::CertificationFailed => 4,
            Verdict::StatisticalFailed => 5,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub workers: usize,
    /// Overrides the config's output path.
    pub out_dir: Option<PathBuf>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            workers: default_workers(),
            out_dir: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub verdict: Verdict,
    pub out_dir: PathBuf,
    /// Written files, relative to `out_dir`, in write order.
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        self.verdict.exit_code()
    }
}

/// Collects output files under one directory.
pub(crate) struct Outputs {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Outputs {
    fn create(dir: &Path) -> Result<Self, HarnessError> {
        fs::create_dir_all(dir)?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub(crate) fn write(&mut self, name: &str, contents: &[u8]) -> Result<(), HarnessError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, contents)?;
        self.files.push(PathBuf::from(name));
        Ok(())
    }

    pub(crate) fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), HarnessError> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub(crate) fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), HarnessError> {
        let mut text = header.join(",");
        text.push('\n');
        for row in rows {
            let fields: Vec<String> = row.iter().map(|f| csv_field(f)).collect();
            text.push_str(&fields.join(","));
            text.push('\n');
        }
        self.write(name, text.as_bytes())
    }
}

fn csv_field(f: &str) -> String {
    if f.contains([',', '"', '\n']) {
        format!("\"{}\"", f.replace('"', "\"\""))
    } else {
        f.to_string()
    }
}

/// Runs one experiment and writes its outputs.
pub fn run(config: &ExperimentConfig, options: &RunOptions) -> Result<RunOutcome, HarnessError> {
    config.validate()?;
    let out_dir = options
        .out_dir
        .clone()
        .or_else(|| config.output.as_ref().map(|p| config.resolve(p)))
        .unwrap_or_else(|| PathBuf::from("out"));
    let mut out = Outputs::create(&out_dir)?;
    let workers = options.workers.max(1);
    let verdict = match config.operation()? {
        Operation::SampleUst => ops::sample_ust(config, workers, &mut out)?,
        Operation::SampleOust => ops::sample_oust(config, workers, &mut out)?,
        Operation::DynamicsRun => ops::dynamics_run(config, workers, &mut out)?,
        Operation::Certify => ops::certify(config, &mut out)?,
        Operation::ThreeEnds => ops::three_ends(&mut out)?,
        Operation::GwEndsTrend => ops::gw_ends_trend(config, workers, &mut out)?,
        Operation::Reversibility => ops::reversibility(config, workers, &mut out)?,
    };
    Ok(RunOutcome {
        verdict,
        out_dir,
        files: out.files,
    })
}

/// Exit status of [`run`]'s result.
pub fn exit_code(result: &Result<RunOutcome, HarnessError>) -> i32 {
    match result {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => e.exit_code(),
    }
}
