use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use requnet::Error;
use requnet_cli::commands::{self, MatrixSource, PdeConfig};
use requnet_cli::suites::{self, SuiteConfig, SuiteReport};

#[derive(Parser)]
#[command(name = "requnet", version, about = "Constructive ReQU networks for matrix inversion and parametric PDEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Calculus,
    Matrix,
    Inversion,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and report every check as JSON.
    Verify {
        #[arg(long)]
        suite: Suite,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        dim: usize,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        #[arg(long, default_value_t = 0.2)]
        delta: f64,
        /// Shrink suite sizes roughly tenfold.
        #[arg(long)]
        quick: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the Neumann inversion network and apply it to one matrix.
    Invert {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
        /// JSON array of rows; a seeded random matrix is used otherwise.
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the network file here.
        #[arg(long)]
        save: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tabulate depth and weight counts of inversion networks.
    Complexity {
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Chessboard diffusion problem: reduced basis, solution networks, errors.
    Pde {
        #[arg(long)]
        grid: usize,
        #[arg(long)]
        chessboard: usize,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        snapshots: usize,
        #[arg(long)]
        drop_tol: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        test: usize,
        #[arg(long)]
        seed: u64,
        /// Error CSV; the summary goes next to it with a `.json` extension.
        #[arg(long)]
        out: PathBuf,
        /// Refuse to build networks estimated above this many weights.
        #[arg(long, default_value_t = 50_000_000)]
        max_nnz: u128,
    },
}

enum Failure {
    Check(String),
    Usage(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) => Failure::Io(e.to_string()),
            Error::ResourceLimit { .. } | Error::ConvergenceFailure { .. } | Error::SingularSystem(_) => {
                Failure::Check(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

fn verify(suite: Suite, cfg: &SuiteConfig, out: Option<&Path>) -> Result<(), Failure> {
    let reports: Vec<SuiteReport> = match suite {
        Suite::Calculus => vec![suites::calculus(cfg)?],
        Suite::Matrix => vec![suites::matrix(cfg)?],
        Suite::Inversion => vec![suites::inversion(cfg)?],
        Suite::All => vec![suites::calculus(cfg)?, suites::matrix(cfg)?, suites::inversion(cfg)?],
    };
    let report = if reports.len() == 1 {
        reports[0].clone()
    } else {
        SuiteReport { suite: "all".into(), checks: reports.iter().flat_map(|r| r.checks.clone()).collect() }
    };
    let text = to_json(&report);
    match out {
        Some(path) => write(path, &text)?,
        None => print!("{text}"),
    }
    for c in report.checks.iter().filter(|c| !c.pass) {
        eprintln!("FAIL {}: measured {} > bound {}", c.name, c.measured, c.bound);
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Check(format!("{} suite failed", report.suite)))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Verify { suite, seed, dim, eps, delta, quick, out } => {
            verify(suite, &SuiteConfig { seed, quick, dim, eps, delta }, out.as_deref())
        }
        Command::Invert { dim, eps, delta, matrix, seed, save, out } => {
            let source = match &matrix {
                Some(path) => MatrixSource::File(path),
                None => MatrixSource::Random { seed },
            };
            let report = commands::invert(dim, eps, delta, source, save.as_deref())?;
            write(&out, &to_json(&report))
        }
        Command::Complexity { dims, eps, delta, out } => {
            let rows = commands::complexity_table(&dims, &eps, delta)?;
            write(&out, &commands::complexity_csv(&rows))
        }
        Command::Pde { grid, chessboard, mu, snapshots, drop_tol, eps, test, seed, out, max_nnz } => {
            let cfg = PdeConfig { grid, chessboard, mu, snapshots, drop_tol, eps, test, seed, max_nnz };
            let outcome = commands::pde(&cfg)?;
            if let Some(csv) = &outcome.csv {
                write(&out, csv)?;
            }
            write(&commands::summary_path(&out), &to_json(&outcome.summary))?;
            match (&outcome.summary.error, outcome.summary.within_eps()) {
                (Some(e), _) => Err(Failure::Check(e.clone())),
                (None, false) => Err(Failure::Check(format!("worst-case error exceeds eps = {eps}"))),
                (None, true) => Ok(()),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
