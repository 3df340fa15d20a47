use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cyclebreak_core::harness::{exit_code, run, ExperimentConfig, HarnessError, Operation, RunOptions};

#[derive(Parser, Debug)]
#[command(name = "cyclebreak", version, about = "Seeded experiments on wired uniform spanning forests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Weighted uniform spanning trees of a finite network via Wilson's algorithm.
    SampleUst(Common),
    /// Oriented spanning trees of a wired contraction, rooted at the boundary.
    SampleOust(Common),
    /// Traces of the wired cycle-breaking dynamics.
    DynamicsRun(Common),
    /// Exact stationarity and update-tolerance certificates.
    Certify(Common),
    /// The three-ends construction on its built-in fixtures.
    ThreeEnds(Common),
    /// Two-ray fraction of the root component across window depths.
    GwEndsTrend(Common),
    /// Root-swap reversibility on the decorated tree.
    Reversibility(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, env = "CYCLEBREAK_WORKERS")]
    workers: Option<usize>,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Command {
    fn split(self) -> (Operation, Common) {
        match self {
            Command::SampleUst(c) => (Operation::SampleUst, c),
            Command::SampleOust(c) => (Operation::SampleOust, c),
            Command::DynamicsRun(c) => (Operation::DynamicsRun, c),
            Command::Certify(c) => (Operation::Certify, c),
            Command::ThreeEnds(c) => (Operation::ThreeEnds, c),
            Command::GwEndsTrend(c) => (Operation::GwEndsTrend, c),
            Command::Reversibility(c) => (Operation::Reversibility, c),
        }
    }
}

fn prepare(operation: Operation, args: &Common) -> Result<ExperimentConfig, HarnessError> {
    let mut config = ExperimentConfig::load(&args.config)?;
    match config.operation {
        Some(op) if op != operation => {
            return Err(HarnessError::Config(format!(
                "config is for {} but {} was requested",
                op.name(),
                operation.name()
            )))
        }
        _ => config.operation = Some(operation),
    }
    if args.seed.is_some() {
        config.seed = args.seed;
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (operation, args) = cli.command.split();
    let mut options = RunOptions::default();
    if let Some(w) = args.workers.filter(|&w| w > 0) {
        options.workers = w;
    }
    options.out_dir = args.out.clone();
    let result = prepare(operation, &args).and_then(|config| run(&config, &options));
    match &result {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("{}", outcome.out_dir.join(f).display());
            }
            if outcome.exit_code() != 0 {
                eprintln!("{}: checks failed ({:?})", operation.name(), outcome.verdict);
            }
        }
        Err(e) => eprintln!("{}: {e}", operation.name()),
    }
    ExitCode::from(exit_code(&result) as u8)
}
