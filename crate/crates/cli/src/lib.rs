//! Command-line front end: generate point sets, profile residue classes,
//! sample characteristic tuples, solve for vanishing polynomials, run the
//! full pipeline and verify polynomials against sets.
//!
//! Exit status is 0 on success, 1 on a domain error and 2 on a usage error.
//! Diagnostics go to stderr as `error[CODE]: message`.

mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "illdist", version, about = "Structure extraction for ill-distributed lattice point sets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a point set from one of the generator families.
    Gen(GenArgs),
    /// Residue-class occupancy of a set over the prime window.
    Profile(ProfileArgs),
    /// Draw a characteristic tuple and report its coverage.
    Sample(SampleArgs),
    /// Find a small-height polynomial vanishing on every point of a set.
    Solve(SolveArgs),
    /// Window, sampling, polynomial and verification, iterated to coverage.
    Pipeline(PipelineArgs),
    /// Count the points of a set on which a polynomial vanishes.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML file with defaults for any flag; explicit flags win.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Destination file, written atomically; stdout when absent.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Cap on worker threads. Results do not depend on it.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct WindowArgs {
    /// Box bound N; must match the input header when both are given.
    #[arg(long, allow_negative_numbers = true)]
    pub n: Option<u64>,
    /// Dimension d; must match the input header when both are given.
    #[arg(long, allow_negative_numbers = true)]
    pub d: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Crt,
    Product,
    Perturbed,
    GraphShift,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Small,
    Full,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum)]
    pub variant: Option<Variant>,
    #[arg(long, allow_negative_numbers = true)]
    pub n: Option<u64>,
    /// Power k of the product set X^k.
    #[arg(long, allow_negative_numbers = true)]
    pub d: Option<usize>,
    /// Residues kept per prime: floor(p^epsilon).
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    /// Shift exponent of the graph-shift family.
    #[arg(long, allow_negative_numbers = true)]
    pub rho: Option<f64>,
    /// Monomial degree of the graph-shift family.
    #[arg(long, allow_negative_numbers = true)]
    pub m: Option<u32>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long, allow_negative_numbers = true)]
    pub prime_bound: Option<u64>,
    /// Perturbation f, lowest coefficient first, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub coeffs: Option<Vec<i64>>,
    /// Second-factor values (perturbed) or shifts (graph-shift).
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<u64>>,
    #[arg(long, allow_negative_numbers = true)]
    pub seed: Option<u64>,
    /// One-dimensional factor set (product; optional for the others).
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    /// Occupancy limit factor: a prime is flagged above c_bound * p^kappa.
    #[arg(long, allow_negative_numbers = true)]
    pub c_bound: Option<f64>,
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub seed: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    pub trials: Option<usize>,
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Degree cap; defaults to the degree chosen for |input| points.
    #[arg(long, allow_negative_numbers = true)]
    pub degree: Option<u32>,
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub eps: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub seed: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    pub trials: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub max_iterations: Option<usize>,
    /// Also write the product polynomial here.
    #[arg(long, value_name = "PATH")]
    pub poly: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_name = "PATH")]
    pub poly: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
}

/// A failed invocation: exit status, stable code and message.
#[derive(Debug)]
pub struct Failure {
    pub exit: i32,
    pub code: String,
    pub message: String,
}

impl Failure {
    pub fn usage(code: &str, message: impl Into<String>) -> Self {
        Failure {
            exit: 2,
            code: code.to_string(),
            message: message.into(),
        }
    }

    pub fn domain(e: illdist::Error) -> Self {
        Failure {
            exit: 1,
            code: e.code().to_string(),
            message: e.to_string(),
        }
    }

    pub fn context(mut self, what: impl AsRef<str>) -> Self {
        self.message = format!("{}: {}", what.as_ref(), self.message);
        self
    }
}

impl From<illdist::Error> for Failure {
    fn from(e: illdist::Error) -> Self {
        Failure::domain(e)
    }
}

pub fn parse_invocation<I, T>(args: I) -> Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    Cli::try_parse_from(args)
}

/// Runs one invocation; `args` includes the program name.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match parse_invocation(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    0
                }
                _ => {
                    let _ = write!(stderr, "error[USAGE]: {}", e.render());
                    2
                }
            };
        }
    };
    match commands::dispatch(&cli.command, stdout) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(stderr, "error[{}]: {}", f.code, f.message);
            f.exit
        }
    }
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, or to `stdout` when no path is given.
pub fn emit(path: Option<&Path>, contents: &[u8], stdout: &mut dyn Write) -> Result<(), Failure> {
    let io = |e: std::io::Error, what: &Path| Failure::domain(illdist::Error::Io(e)).context(what.display().to_string());
    match path {
        None => stdout.write_all(contents).map_err(|e| io(e, Path::new("<stdout>"))),
        Some(path) => {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io(e, path))?;
            tmp.write_all(contents).map_err(|e| io(e, path))?;
            tmp.as_file().sync_all().map_err(|e| io(e, path))?;
            tmp.persist(path).map_err(|e| io(e.error, path))?;
            Ok(())
        }
    }
}
