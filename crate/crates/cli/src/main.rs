//! `loglip-wave`: run solves, verification suites and parameter sweeps from a JSON config.
//!
//! Exit codes: 0 success, 1 check failed, 2 configuration error, 3 numerical instability.

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::ExperimentConfig;

#[derive(Debug, Parser)]
#[command(name = "loglip-wave", version, about = "Wave equations with Log-Lipschitz propagation speed")]
struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for reports.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for per-mode fan-out.
    #[arg(long, global = true, env = "LOGLIP_WAVE_THREADS")]
    threads: Option<usize>,
    /// Overrides the seed of random initial data.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write one trajectory CSV per mode under `<out>/modes/`.
    #[arg(long, global = true)]
    dump_modes: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print M1, M2, M3, delta_min and the chosen delta.
    Constants {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Solve the Cauchy problem and write report.csv / report.json.
    Solve,
    /// Run a verification suite; exit 1 if any check fails.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
    /// Tabulate measured quantities over a parameter grid.
    Sweep {
        #[arg(value_enum)]
        over: Axis,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Suite {
    WMonotone,
    Estimates,
    Theorem,
    Contrast,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Axis {
    Lambda,
    Epsilon,
    B0,
    Alpha,
}

#[derive(Debug)]
pub enum CliError {
    Check(String),
    Config(String),
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Check(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Check(m) => write!(f, "check failed: {m}"),
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<loglip_wave::Error> for CliError {
    fn from(e: loglip_wave::Error) -> Self {
        use loglip_wave::Error as E;
        match e {
            E::Config(m) => CliError::Config(m),
            E::Instability { .. } | E::Numerical(_) => CliError::Numerical(e.to_string()),
            E::Inapplicable(_) | E::InsufficientData(_) => CliError::Check(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("io: {e}"))
    }
}

pub struct Context {
    pub config: ExperimentConfig,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub dump_modes: bool,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let path = cli.config.ok_or_else(|| CliError::Config("--config is required".into()))?;
    let config = ExperimentConfig::load(&path)?;
    let out = cli.out.or_else(|| config.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let ctx = Context { config, out, seed: cli.seed, dump_modes: cli.dump_modes };
    match cli.command {
        Command::Constants { format } => commands::constants(&ctx, format),
        Command::Solve => commands::solve(&ctx),
        Command::Verify { suite } => commands::verify(&ctx, suite),
        Command::Sweep { over } => commands::sweep(&ctx, over),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
