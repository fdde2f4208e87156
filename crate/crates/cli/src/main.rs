mod commands;
mod json;
mod problem;

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use commands::OracleOptions;
use problem::{Problem, ProblemFile};

/// Gaussian probability content of convex polyhedra.
#[derive(Parser)]
#[command(name = "polygauss", version)]
struct Cli {
    /// Write the report here instead of stdout ("-" is stdout).
    #[arg(short, long, global = true, default_value = "-")]
    output: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// General position, redundant rows and the nonempty faces.
    Check {
        /// Problem file, or "-" for stdin.
        file: PathBuf,
    },
    /// Probability by the holonomic gradient method.
    Prob {
        file: PathBuf,
        /// Cross-check against a Monte-Carlo estimate.
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use the randomized quasi-Monte-Carlo oracle.
        #[arg(long, requires = "oracle")]
        qmc: bool,
    },
    /// The complex of nonempty faces, optionally with the Pfaffian matrices.
    Faces {
        file: PathBuf,
        /// Include the coefficient matrices at the problem's offsets.
        #[arg(long)]
        system: bool,
    },
    /// Integrability, annihilator and decomposition residuals.
    Selftest {
        file: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Timings over the bundled instances.
    Bench {
        #[arg(long, default_value_t = 1)]
        repeat: usize,
    },
}

/// Error with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

pub const EXIT_PARSE: u8 = 2;
pub const EXIT_INVALID: u8 = 3;
pub const EXIT_ORACLE: u8 = 4;
pub const EXIT_NUMERICAL: u8 = 5;

impl CliError {
    pub fn parse(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_PARSE,
            message: message.into(),
        }
    }
}

impl From<polygauss::Error> for CliError {
    fn from(e: polygauss::Error) -> Self {
        use polygauss::Error as E;
        let code = match e {
            E::DimensionMismatch(_) => EXIT_PARSE,
            E::InvalidPolyhedron(_) | E::EmptyPolyhedron | E::NotGeneralPosition(_) | E::NonPositiveDefinite => {
                EXIT_INVALID
            }
            _ => EXIT_NUMERICAL,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn read_input(path: &PathBuf) -> Result<String, CliError> {
    let mut text = String::new();
    if path.as_os_str() == "-" {
        io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| CliError::parse(format!("stdin: {e}")))?;
    } else {
        text = fs::read_to_string(path).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
    }
    Ok(text)
}

fn load(path: &PathBuf) -> Result<Problem, CliError> {
    ProblemFile::parse(&read_input(path)?)?.into_problem()
}

fn emit<T: Serialize>(out: &PathBuf, value: &T) -> Result<(), CliError> {
    let text = json::to_string(value).map_err(|e| CliError {
        code: EXIT_NUMERICAL,
        message: format!("serializing report: {e}"),
    })?;
    let res = if out.as_os_str() == "-" {
        io::stdout().write_all(text.as_bytes())
    } else {
        fs::write(out, text)
    };
    res.map_err(|e| CliError {
        code: EXIT_PARSE,
        message: format!("{}: {e}", out.display()),
    })
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("POLYGAUSS_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::parse(format!("POLYGAUSS_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::parse(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let out = &cli.output;
    match &cli.command {
        Command::Check { file } => emit(out, &commands::check(&load(file)?)?),
        Command::Prob {
            file,
            oracle,
            samples,
            seed,
            qmc,
        } => {
            let opts = oracle.then_some(OracleOptions {
                samples: *samples,
                seed: *seed,
                qmc: *qmc,
            });
            let report = commands::prob(&load(file)?, opts)?;
            emit(out, &report)?;
            if report.oracle_mismatch() {
                return Err(CliError {
                    code: EXIT_ORACLE,
                    message: "HGM value and oracle disagree by more than 4 standard errors".into(),
                });
            }
            Ok(())
        }
        Command::Faces { file, system } => emit(out, &commands::faces(&load(file)?, *system)?),
        Command::Selftest { file, samples, seed } => {
            let report = commands::selftest(&load(file)?, *samples, *seed)?;
            emit(out, &report)?;
            if !report.pass {
                return Err(CliError {
                    code: EXIT_NUMERICAL,
                    message: "a residual exceeds its threshold".into(),
                });
            }
            Ok(())
        }
        Command::Bench { repeat } => emit(out, &commands::bench(*repeat)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("polygauss: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
