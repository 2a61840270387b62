//! `cmvlab`: experiments with quasiperiodic CMV matrices.
//!
//! Exit codes: 0 ok, 2 invariant violation, 3 precision exhausted,
//! 4 bad configuration or input. Failures print a JSON error record on
//! stderr.

// `!(x < 1.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

mod commands;
mod config;
mod output;
mod plot;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] cmvlab::Error),
    #[error("{0}")]
    Config(String),
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error("{0}: {1}")]
    Io(String, std::io::Error),
    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invariant violated: {0}")]
    Violation(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use cmvlab::Error as E;
        match self {
            Self::Core(E::PrecisionExhausted(_)) => 3,
            Self::Core(
                E::Domain(_) | E::OutOfWindow { .. } | E::InsufficientMargin | E::WindowTooSmall { .. },
            ) => 4,
            Self::Core(_) | Self::Violation(_) => 2,
            Self::Config(_) | Self::Schema(_) | Self::Io(..) | Self::Json(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        use cmvlab::Error as E;
        match self {
            Self::Core(e) => match e {
                E::PrecisionExhausted(_) => "precision_exhausted",
                E::Domain(_) => "domain",
                E::OutOfWindow { .. } => "out_of_window",
                E::InsufficientMargin => "insufficient_margin",
                E::WindowTooSmall { .. } => "window_too_small",
                E::NoRepetitionFound { .. } => "no_repetition_found",
                E::RepetitionViolated { .. } => "repetition_violated",
                E::TraceBoundViolated { .. } => "trace_bound_violated",
                E::EigensolveFailure(_) => "eigensolve_failure",
                E::Overflow { .. } => "overflow",
            },
            Self::Config(_) => "bad_config",
            Self::Schema(_) => "schema_mismatch",
            Self::Io(..) => "io",
            Self::Json(_) => "serialization",
            Self::Violation(_) => "invariant_violation",
        }
    }
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    exit_code: u8,
    message: String,
}

#[derive(Parser, Debug)]
#[command(name = "cmvlab", version, about = "Quasiperiodic CMV matrices: words, transfer matrices, trace maps, Gordon certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Frequency and coefficients shared by most subcommands.
#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// `golden`, `silver`, a decimal, or a ratio `p/q`.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
    /// Period of a purely periodic expansion, e.g. `1,2`.
    #[arg(long)]
    pub cf: Option<String>,
    /// Coefficient on symbol 0, `re,im`.
    #[arg(long, default_value = "0.5,0", allow_hyphen_values = true)]
    pub beta: String,
    /// Coefficient on symbol 1, `re,im`.
    #[arg(long, default_value = "-0.5,0", allow_hyphen_values = true)]
    pub gamma: String,
    /// Allow `beta = gamma`.
    #[arg(long)]
    pub degenerate: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Continued-fraction expansion and convergents.
    Cf {
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<String>,
        #[arg(long)]
        cf: Option<String>,
        #[arg(long, default_value_t = 10)]
        terms: usize,
    },
    /// A Sturmian word or rotation coding on a range of indices.
    Word {
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<String>,
        #[arg(long)]
        cf: Option<String>,
        /// Phase, decimal or `p/q`; defaults to theta.
        #[arg(long, allow_hyphen_values = true)]
        phi: Option<String>,
        #[arg(long, value_enum, default_value_t = WordVariant::Floor)]
        variant: WordVariant,
        /// Coding interval `[l, r)` for `--variant coding`; defaults to `[1 − θ, 1)`.
        #[arg(long)]
        interval: Option<String>,
        /// Half-open index range `n0:n1`.
        #[arg(long, default_value = "0:64", allow_hyphen_values = true)]
        range: String,
    },
    /// The CMV operator on a window of sites.
    Cmv {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 32)]
        window: usize,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        start: i64,
        /// Print the dense window as CSV (`row,col,re,im`, nonzero entries).
        #[arg(long)]
        dump_matrix: bool,
        /// Also report the eigenvalue angles of the unitary truncation.
        #[arg(long)]
        spectrum: bool,
    },
    /// Szegő and Gesztesy–Zinchenko transfer-matrix checks.
    Transfer {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value = "1,0", allow_hyphen_values = true)]
        z: String,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = TransferCheck::Identity)]
        check: TransferCheck,
        /// Perturbation size for `--check perturbation`.
        #[arg(long, default_value_t = 1e-8)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Bounded-orbit scan of the unit circle.
    Scan(ScanArgs),
    /// Gordon-type certificates.
    Gordon(GordonArgs),
    /// SVG of a scan file.
    Plot {
        /// A scan JSON file written by `scan`.
        #[arg(long)]
        scan: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Read the whole configuration from a JSON file instead of flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 1024)]
    pub grid: usize,
    #[arg(long, default_value_t = 12)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub refine: usize,
    #[arg(long, default_value_t = cmvlab::tracemap::DEFAULT_ESCAPE_THRESHOLD)]
    pub escape_threshold: f64,
    /// Scan output, JSON unless the name ends in `.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also certify the bounded points and write the certificates here.
    #[arg(long)]
    pub certificates: Option<PathBuf>,
    /// Scales `a:b` for the certificates.
    #[arg(long, default_value = "3:8")]
    pub k_range: String,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct GordonArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum)]
    pub mode: GordonMode,
    /// Spectral parameter `re,im`; `--angle` is an alternative.
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub angle: Option<f64>,
    /// Scale index `k`.
    #[arg(long, default_value_t = 5)]
    pub scale: usize,
    /// Trace bound `c` for the two-block check; defaults to `|tr T(n,0;z)|`.
    #[arg(long)]
    pub c: Option<f64>,
    /// Phase of the coding; defaults to theta.
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<String>,
    /// Rotation-coding interval `[l, r)`; defaults to the Sturmian `[1 − θ, 1)`.
    #[arg(long)]
    pub interval: Option<String>,
    /// Number of equally spaced phases to sample in three-block mode.
    #[arg(long)]
    pub phases: Option<usize>,
    /// Scale indices `a:b` for sequence and exclude modes.
    #[arg(long, default_value = "3:8")]
    pub k_range: String,
    /// Constants `C` for sequence mode.
    #[arg(long, default_value = "2,10,100")]
    pub c_list: String,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 1024)]
    pub grid: usize,
    #[arg(long, default_value_t = 14)]
    pub budget: usize,
    #[arg(long)]
    pub max_points: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Exit with code 2 if any bound fails.
    #[arg(long)]
    pub fail_on_violation: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum WordVariant {
    Floor,
    Ceiling,
    Coding,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransferCheck {
    Identity,
    Cocycle,
    Perturbation,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum GordonMode {
    Two,
    Three,
    Sequence,
    Exclude,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Cf { theta, cf, terms } => commands::cf(theta.as_deref(), cf.as_deref(), terms),
        Command::Word {
            theta,
            cf,
            phi,
            variant,
            interval,
            range,
        } => commands::word(theta.as_deref(), cf.as_deref(), phi.as_deref(), variant, interval.as_deref(), &range),
        Command::Cmv {
            model,
            window,
            start,
            dump_matrix,
            spectrum,
        } => commands::cmv(&model, window, start, dump_matrix, spectrum),
        Command::Transfer {
            model,
            z,
            steps,
            check,
            delta,
            seed,
        } => commands::transfer(&model, &z, steps, check, delta, seed),
        Command::Scan(args) => commands::scan(&args),
        Command::Gordon(args) => commands::gordon(&args),
        Command::Plot { scan, out } => commands::plot(&scan, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            return report(&CliError::Config(e.to_string().trim().to_string()));
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}

fn report(e: &CliError) -> ExitCode {
    let code = e.exit_code();
    let record = ErrorRecord {
        error: ErrorBody {
            kind: e.kind(),
            exit_code: code,
            message: e.to_string(),
        },
    };
    match output::to_json(&record, false) {
        Ok(s) => eprint!("{s}"),
        Err(_) => eprintln!("{e}"),
    }
    ExitCode::from(code)
}
