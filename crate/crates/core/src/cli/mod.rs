//! Command-line front end: dataset ingestion, estimation and test commands,
//! simulation and report output.
//!
//! Exit codes: 0 success, 1 usage or invalid argument, 2 non-unique
//! projection, 3 non-convergence, 4 I/O or parse failure, 5 any other
//! numerical failure (singular covariance, cut locus, degenerate data).

mod commands;
mod data;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::frechet::MeanMethod;

pub use data::{format_row, read_rows, write_atomic, DataFormat, DatasetManifest, Preprocessing};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NON_UNIQUE: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_NUMERIC: i32 = 5;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "MSTATS_THREADS";

#[derive(Debug, Parser)]
#[command(name = "mstats", version, about = "Fréchet means, tests and nonparametric Bayes on manifolds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// How a data argument is read. A path ending in `.json` is a dataset
/// manifest and these flags are ignored; any other path is a CSV file
/// described by them.
#[derive(Clone, Debug, Default, Args)]
pub struct DataOpts {
    /// Manifold key such as sphere:2, kendall2d:8, reflect3d:5, affine:2:6, rproj:2, spd:3:logeuclid.
    #[arg(long)]
    pub manifold: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<DataFormat>,
    #[arg(long = "preprocess", value_enum)]
    pub preprocess: Option<Preprocessing>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Extrinsic,
    Intrinsic,
}

impl From<MethodArg> for MeanMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Extrinsic => MeanMethod::Extrinsic,
            MethodArg::Intrinsic => MeanMethod::Intrinsic,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Distribution {
    /// Von Mises-Fisher on a sphere; `--tau` is the concentration.
    Vmf,
    /// Complex Watson on planar shapes; `--tau` is the bandwidth.
    Watson,
    Uniform,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample Fréchet mean.
    Mean {
        data: PathBuf,
        #[command(flatten)]
        data_opts: DataOpts,
        #[arg(long, value_enum, default_value = "extrinsic")]
        method: MethodArg,
        /// Iteration cap for the intrinsic mean.
        #[arg(long, default_value_t = 1000)]
        max_iter: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two-sample test for equal means.
    Test2 {
        first: PathBuf,
        second: PathBuf,
        #[command(flatten)]
        data_opts: DataOpts,
        #[arg(long, value_enum, default_value = "extrinsic")]
        method: MethodArg,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Number of pivotal bootstrap replications (extrinsic only).
        #[arg(long)]
        bootstrap: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        ridge: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Matched-pair test; each row holds both observations of a pair.
    Matchpair {
        data: PathBuf,
        #[command(flatten)]
        data_opts: DataOpts,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long)]
        ridge: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Test whether a candidate point lies in the confidence region for the mean.
    Region {
        data: PathBuf,
        #[command(flatten)]
        data_opts: DataOpts,
        /// Candidate in the flat encoding of the manifold, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        candidate: String,
        #[arg(long, value_enum, default_value = "extrinsic")]
        method: MethodArg,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long)]
        ridge: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bayes classification with posterior-mean class densities.
    Classify {
        /// Training data as LABEL=PATH; repeat once per class.
        #[arg(long = "train", value_name = "LABEL=PATH", required = true)]
        train: Vec<String>,
        #[arg(long)]
        test: PathBuf,
        #[command(flatten)]
        data_opts: DataOpts,
        /// Prior class probability as LABEL=PROB; defaults to equal priors.
        #[arg(long = "prior", value_name = "LABEL=PROB")]
        priors: Vec<String>,
        #[arg(long, default_value_t = 1.0)]
        concentration: f64,
        #[arg(long, default_value_t = 20)]
        draws: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Posterior-mean mixture density under a Dirichlet-process prior.
    BayesFit {
        data: PathBuf,
        #[command(flatten)]
        data_opts: DataOpts,
        #[arg(long, default_value_t = 1.0)]
        concentration: f64,
        #[arg(long, default_value_t = 20)]
        draws: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a simulated dataset and its manifest (same path, `.json` extension).
    Simulate {
        #[arg(long, value_enum)]
        dist: Distribution,
        #[arg(long)]
        manifold: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        tau: Option<f64>,
        /// Centre in the flat encoding, rescaled to unit length; defaults to the
        /// first basis vector.
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Benjamini-Hochberg selection; prints the 0-based indices selected.
    Fdr {
        pvalues: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonUniqueProjection { .. } => EXIT_NON_UNIQUE,
        Error::NoConvergence { .. } => EXIT_NO_CONVERGENCE,
        Error::Io(_) | Error::Json(_) | Error::Parse(_) | Error::InvalidPoint { .. } | Error::RankDeficient { .. } => {
            EXIT_IO
        }
        Error::InvalidManifold(_)
        | Error::InvalidArgument(_)
        | Error::Unsupported { .. }
        | Error::ManifoldMismatch(..) => EXIT_USAGE,
        Error::CutLocus { .. } | Error::SingularCovariance { .. } | Error::Degenerate(_) => EXIT_NUMERIC,
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got '{value}'"))?;
    // a pool built earlier in the process keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return EXIT_USAGE;
    }
    match commands::execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
