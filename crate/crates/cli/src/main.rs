mod check;
mod commands;
mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use projpairs::{Error, Tolerances};

#[derive(Parser)]
#[command(name = "projpairs", version, about = "Pairs of orthogonal projections with a fixed difference")]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Relative rank tolerance.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub rank_tol: f64,
    /// Relative spectral gap tolerance.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub gap_tol: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file, or directory for commands that write several files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl RunConfig {
    pub fn tolerances(&self) -> Result<Tolerances, Failure> {
        for (name, v) in [("rank-tol", self.rank_tol), ("gap-tol", self.gap_tol)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Failure::input(format!("--{name} must be positive, got {v}")));
            }
        }
        Ok(Tolerances::new(self.rank_tol, self.gap_tol))
    }

    pub fn format_or(&self, default: Format, allowed: &[Format]) -> Result<Format, Failure> {
        let f = self.format.unwrap_or(default);
        if !allowed.contains(&f) {
            return Err(Failure::input(format!("format {f:?} is not supported by this command")));
        }
        Ok(f)
    }
}

#[derive(Args, Debug, Clone)]
pub struct PairFiles {
    #[arg(long)]
    pub p: PathBuf,
    #[arg(long)]
    pub q: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct TwoPairs {
    #[arg(long)]
    pub base_p: PathBuf,
    #[arg(long)]
    pub base_q: PathBuf,
    #[arg(long)]
    pub target_p: PathBuf,
    #[arg(long)]
    pub target_q: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Three-space split, principal angles, Friedrichs cosine and closed-range report.
    Decompose {
        #[arg(long, requires = "q", conflicts_with = "a")]
        p: Option<PathBuf>,
        #[arg(long, requires = "p")]
        q: Option<PathBuf>,
        /// A difference `A` alone, realized through a witness pair.
        #[arg(long)]
        a: Option<PathBuf>,
        /// Angle below which (or within which of π/2) the range is reported as not closed.
        #[arg(long, default_value_t = 1e-6)]
        angle_threshold: f64,
    },
    /// Davis coordinates: a pair to its symmetry, subspace and projection, or back.
    Davis {
        #[arg(long, requires = "q", conflicts_with_all = ["a", "v"])]
        p: Option<PathBuf>,
        #[arg(long, requires = "p")]
        q: Option<PathBuf>,
        #[arg(long, requires = "v")]
        a: Option<PathBuf>,
        #[arg(long, requires = "a")]
        v: Option<PathBuf>,
    },
    /// Minimal geodesic from a base pair to a target pair with the same difference.
    Geodesic {
        #[command(flatten)]
        pairs: TwoPairs,
        #[arg(long, default_value_t = 64)]
        steps: usize,
    },
    /// Geodesic distance between two pairs with the same difference.
    Distance {
        #[command(flatten)]
        pairs: TwoPairs,
    },
    /// Runs the invariant battery on a pair.
    Check {
        #[command(flatten)]
        pair: PairFiles,
        #[arg(long, default_value_t = 8)]
        trials: usize,
    },
    /// Writes a gallery pair as P.json, Q.json and metadata.json.
    Gallery {
        #[command(subcommand)]
        generator: Generator,
    },
}

#[derive(Subcommand, Debug, Clone)]
pub enum Generator {
    /// Multiplication by a symmetric grid, with the reversal symmetry.
    Mt {
        #[arg(long)]
        n: usize,
    },
    /// Index-set projection and its conjugate under the DFT.
    Fourier {
        #[arg(long)]
        n: usize,
        /// Index set such as `0:3,7` (ranges inclusive).
        #[arg(long = "I")]
        i: String,
        #[arg(long = "J")]
        j: String,
    },
    /// Model-space pair of two Blaschke products.
    Blaschke {
        /// Zeros of the first product, e.g. `0.3` or `0.1+0.2i`; repeat or comma-separate.
        #[arg(long, num_args = 1, allow_hyphen_values = true, required = true)]
        a: Vec<String>,
        #[arg(long, num_args = 1, allow_hyphen_values = true, required = true)]
        b: Vec<String>,
    },
    /// Range projections of the idempotent `[[1, B],[0, 0]]`.
    Idempotent {
        /// Diagonal of `B`.
        #[arg(long, num_args = 1, allow_hyphen_values = true, conflicts_with = "b_file")]
        b_diag: Vec<String>,
        /// `B` as a matrix file.
        #[arg(long)]
        b_file: Option<PathBuf>,
    },
}

/// A structured CLI error with its exit code.
#[derive(Debug, Serialize)]
pub struct Failure {
    #[serde(skip)]
    pub code: u8,
    pub error: String,
    pub message: String,
}

pub const EXIT_INVARIANT: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_PRECONDITION: u8 = 3;

impl Failure {
    pub fn new(code: u8, error: &str, message: String) -> Self {
        Failure {
            code,
            error: error.to_string(),
            message,
        }
    }

    pub fn input(message: String) -> Self {
        Self::new(EXIT_INPUT, "InvalidInput", message)
    }

    pub fn io(message: String) -> Self {
        Self::new(EXIT_INPUT, "Io", message)
    }

    pub fn precondition(error: &str, message: String) -> Self {
        Self::new(EXIT_PRECONDITION, error, message)
    }

    pub fn context(mut self, path: &Path) -> Self {
        self.message = format!("{}: {}", path.display(), self.message);
        self
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, name) = match &e {
            Error::NotSquare { .. } => (EXIT_INPUT, "NotSquare"),
            Error::DimensionMismatch { .. } => (EXIT_INPUT, "DimensionMismatch"),
            Error::NonFinite { .. } => (EXIT_INPUT, "NonFinite"),
            Error::NotHermitian { .. } => (EXIT_INPUT, "NotHermitian"),
            Error::NotAProjection { .. } => (EXIT_INPUT, "NotAProjection"),
            Error::NotAContraction { .. } => (EXIT_INPUT, "NotAContraction"),
            Error::NotUnitary { .. } => (EXIT_INPUT, "NotUnitary"),
            Error::IllConditionedGram { .. } => (EXIT_INPUT, "IllConditionedGram"),
            Error::NotPositive { .. } => (EXIT_INPUT, "NotPositive"),
            Error::InvalidInput(_) => (EXIT_INPUT, "InvalidInput"),
            Error::Domain { .. } => (EXIT_PRECONDITION, "Domain"),
            Error::SingularSign { .. } => (EXIT_PRECONDITION, "SingularSign"),
            Error::BranchCut { .. } => (EXIT_PRECONDITION, "BranchCut"),
            Error::EmptyGenericPart => (EXIT_PRECONDITION, "EmptyGenericPart"),
            Error::BorderlineSpectrum { .. } => (EXIT_PRECONDITION, "BorderlineSpectrum"),
            Error::GenericCertification(_) => (EXIT_PRECONDITION, "GenericCertification"),
            Error::DegenerateAngle { .. } => (EXIT_PRECONDITION, "DegenerateAngle"),
            Error::AnticommutationViolated { .. } => (EXIT_PRECONDITION, "AnticommutationViolated"),
            Error::NotCodiagonal { .. } => (EXIT_PRECONDITION, "NotCodiagonal"),
            Error::NotInCommutant { .. } => (EXIT_PRECONDITION, "NotInCommutant"),
            Error::MismatchedDifference { .. } => (EXIT_PRECONDITION, "MismatchedDifference"),
            Error::NotCommutingWithGamma { .. } => (EXIT_PRECONDITION, "NotCommutingWithGamma"),
            Error::NotHorizontal { .. } => (EXIT_PRECONDITION, "NotHorizontal"),
            Error::DegenerateSpectrum { .. } => (EXIT_PRECONDITION, "DegenerateSpectrum"),
            Error::EigenNoConvergence { .. } => (EXIT_INVARIANT, "EigenNoConvergence"),
            Error::InconsistentReport(_) => (EXIT_INVARIANT, "InconsistentReport"),
            Error::CertificateFailed { .. } => (EXIT_INVARIANT, "CertificateFailed"),
        };
        Failure::new(code, name, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Decompose {
            p,
            q,
            a,
            angle_threshold,
        } => commands::decompose(&cli.config, p.zip(q), a, angle_threshold),
        Command::Davis { p, q, a, v } => commands::davis(&cli.config, p.zip(q), a.zip(v)),
        Command::Geodesic { pairs, steps } => commands::geodesic(&cli.config, &pairs, steps),
        Command::Distance { pairs } => commands::distance(&cli.config, &pairs),
        Command::Check { pair, trials } => commands::check(&cli.config, &pair, trials),
        Command::Gallery { generator } => commands::gallery(&cli.config, &generator),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("{}", serde_json::to_string(&f).expect("failure serializes"));
            ExitCode::from(f.code)
        }
    }
}
