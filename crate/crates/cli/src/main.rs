use std::fmt;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;

use config::{CommonArgs, Settings};

#[derive(Debug, Parser)]
#[command(name = "qpq", version, about = "Quantum private queries: sessions, attacks, sweeps and bound checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample sessions against a strategy
    Run,
    /// Exact report for a catalog attack
    Attack {
        /// Catalog name (defaults to --strategy)
        name: Option<String>,
    },
    /// Detection/information trade-off over a parameter grid (CSV by default)
    Sweep {
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        /// Upper end [default: π/2]
        #[arg(long)]
        to: Option<f64>,
        #[arg(long, default_value_t = 9)]
        points: usize,
    },
    /// Check the fidelity theorem and information bounds on the built-in families
    Verify {
        /// Number of seeded random near-honest strategies
        #[arg(long, default_value_t = 50)]
        count: usize,
    },
    /// Classical decoy-query information bound
    Decoy {
        /// Number of queries sent; every M from 1 to N when absent
        #[arg(long)]
        m: Option<usize>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Scope(String),
    Verify(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Verify(_) => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Scope(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Scope(m) => write!(f, "strategy rejected: {m}"),
            CliError::Verify(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<qpq::Error> for CliError {
    fn from(e: qpq::Error) -> Self {
        match e {
            qpq::Error::Scope(m) => CliError::Scope(m),
            other => CliError::Config(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = Settings::resolve(&cli.common).and_then(|s| match cli.command {
        Command::Run => commands::run(&s),
        Command::Attack { name } => {
            let name = name.or_else(|| s.strategy.clone()).ok_or_else(|| {
                CliError::Config("name an attack, e.g. `qpq attack multi_answer_rhetoric`".into())
            })?;
            commands::attack(&s, &name)
        }
        Command::Sweep { from, to, points } => commands::sweep(&s, from, to, points),
        Command::Verify { count } => commands::verify(&s, count),
        Command::Decoy { m } => commands::decoy(&s, m),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qpq: {e}");
            ExitCode::from(e.code())
        }
    }
}
