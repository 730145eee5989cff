//! The `kmsrp` command line: `gen`, `verify` and `sample`.

pub mod error;
pub mod gen;
pub mod instance;
pub mod sample;
pub mod verify;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::{CliError, CliResult};
use crate::gen::{parse_klein4, parse_scalar, parse_strictness, GenParams, Kind};
use crate::instance::Instance;
use crate::sample::{parse_grid, Source, What};
use crate::verify::{Suite, Tol};

/// Environment variable holding the worker thread count for `verify`.
pub const THREADS_ENV: &str = "KMSRP_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "kmsrp",
    version,
    about = "KMS functions and reflection positivity at finite dimension"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded instance as JSON.
    Gen {
        kind: Kind,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Norm range `lo:hi` for random contractions.
        #[arg(long, value_parser = parse_strictness, default_value = "0.5:0.95")]
        strictness: (f64, f64),
        /// Fixed contraction strength, e.g. `0.4` or `tanh(0.5)`.
        #[arg(long, value_parser = parse_scalar, allow_hyphen_values = true)]
        c: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Order of the cyclic group for `finite-group`.
        #[arg(long, default_value_t = 4)]
        order: usize,
        /// Klein four-group model `a,b,c,d` for `finite-group`.
        #[arg(long, value_parser = parse_klein4, allow_hyphen_values = true)]
        klein4: Option<[f64; 4]>,
        /// Fourier truncation for `resolvent`.
        #[arg(long, default_value_t = 2000)]
        nmax: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run verification suites; exit 0 iff every check passes.
    Verify {
        instance: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "all")]
        suite: Vec<Suite>,
        /// Threshold for the exact-identity checks.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Also write the JSON report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Evaluate a function on a grid and write CSV.
    Sample {
        what: What,
        instance: Option<PathBuf>,
        /// `start:stop:step`.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        /// Restrict `f`/`fsharp` to one reflection flag (0 or 1).
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
        eps: Option<u8>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, data: &[u8]) -> CliResult<()> {
    fs::write(path, data).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn emit(out: &Option<PathBuf>, data: &[u8], stdout: &mut dyn Write) -> CliResult<()> {
    match out {
        Some(p) => write(p, data),
        None => stdout.write_all(data).map_err(|source| CliError::Io {
            path: "stdout".into(),
            source,
        }),
    }
}

/// Worker count from the environment, if set to a positive integer.
pub fn thread_count() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

fn execute(cmd: Command, stdout: &mut dyn Write) -> CliResult<i32> {
    match cmd {
        Command::Gen {
            kind,
            dim,
            seed,
            strictness,
            c,
            beta,
            lambda,
            order,
            klein4,
            nmax,
            out,
        } => {
            let params = GenParams {
                kind,
                dim,
                seed,
                strictness,
                c,
                beta,
                lambda,
                order,
                klein4,
                n_max: nmax,
            };
            let inst = gen::generate(&params)?;
            emit(&out, inst.to_json().as_bytes(), stdout)?;
            Ok(0)
        }
        Command::Verify {
            instance,
            suite,
            tol,
            format,
            report,
        } => {
            if tol.is_some_and(|t| !(t.is_finite() && t >= 0.0)) {
                return Err(CliError::Usage("--tol must be a nonnegative number".into()));
            }
            let inst = Instance::from_json(&read(&instance)?)?;
            let tol = Tol {
                exact_override: tol,
            };
            let run = || verify::verify(&inst, &suite, tol);
            let rep = match thread_count() {
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?
                    .install(run)?,
                None => run()?,
            };
            let mut json = serde_json::to_string_pretty(&rep).expect("reports serialize");
            json.push('\n');
            if let Some(p) = &report {
                write(p, json.as_bytes())?;
            }
            let body = match format {
                Format::Text => rep.text(),
                Format::Json => json,
            };
            emit(&None, body.as_bytes(), stdout)?;
            Ok(if rep.pass { 0 } else { 1 })
        }
        Command::Sample {
            what,
            instance,
            grid,
            lambda,
            beta,
            eps,
            out,
        } => {
            let grid = parse_grid(&grid)?;
            let source = match instance {
                Some(p) => Source::Instance(Box::new(Instance::from_json(&read(&p)?)?)),
                None => Source::Scalar {
                    lambda: lambda.ok_or_else(|| {
                        CliError::Usage("--lambda is required without an instance".into())
                    })?,
                    beta: beta.unwrap_or(1.0),
                },
            };
            let mut buf = Vec::new();
            sample::sample(what, &source, &grid, eps.map(|e| e == 1), &mut buf)?;
            emit(&out, &buf, stdout)?;
            Ok(0)
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the
/// exit code: 0 success, 1 failed checks, 2 unusable input.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}
