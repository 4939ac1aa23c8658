//! Command-line surface and its validation into a [`RunConfig`].

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};
use phi_convex::CatalogEntry;

/// Largest node count accepted without `--allow-large`; triple scans are cubic.
pub const DEFAULT_MAX_N: usize = 256;

#[derive(Debug, Parser)]
#[command(name = "phi-convex", version, about = "Verify approximate convexity on uniform grids")]
struct Cli {
    /// Worker threads for the parallel scans.
    #[arg(long, global = true, env = "PHI_CONVEX_THREADS")]
    threads: Option<usize>,

    /// Print a one-line summary to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Run every verifier on one function and error function.
    Analyze {
        /// `catalog:<entry>[:params]`, `csv:<path>` or a bare CSV path.
        #[arg(long, value_name = "SPEC")]
        function: FunctionSource,
        /// `power:p[:scale]`, `zero` or `csv:<path>`.
        #[arg(long, value_name = "SPEC")]
        error: ErrorSource,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Γ property, diagnostics and the Γ-envelope of an error function.
    Gamma {
        /// `power:p[:scale]`, `zero` or `csv:<path>`.
        #[arg(long, value_name = "SPEC")]
        error: ErrorSource,
        /// Domain length (power and zero errors).
        #[arg(long)]
        length: Option<f64>,
        /// Number of sampling intervals (power and zero errors).
        #[arg(long)]
        m: Option<usize>,
        /// Absolute tolerance for the Γ check; default is relative to the data.
        #[arg(long)]
        tol: Option<f64>,
        /// Cap on Γ-envelope iterations [default: 64].
        #[arg(long)]
        max_iter: Option<usize>,
        /// JSON report path; stdout when absent.
        #[arg(long, value_name = "JSON")]
        out: Option<PathBuf>,
    },
    /// Iterate the lower envelope operator to its fixed point.
    Envelope {
        /// `catalog:<entry>[:params]`, `csv:<path>` or a bare CSV path.
        #[arg(long, value_name = "SPEC")]
        function: FunctionSource,
        /// `power:p[:scale]`, `zero` or `csv:<path>`.
        #[arg(long, value_name = "SPEC")]
        error: ErrorSource,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        common: CommonArgs,
        /// Cap on iterations [default: 10 n].
        #[arg(long)]
        max_iter: Option<usize>,
        /// Also write the per-iteration sup deltas as `<out>.trace.csv`.
        #[arg(long, requires = "out")]
        trace: bool,
    },
    /// Decide whether a Φ-convex function fits between two functions.
    Sandwich {
        /// Lower function; same forms as `--function`.
        #[arg(long, value_name = "SPEC")]
        lower: FunctionSource,
        /// Upper function; same forms as `--function`.
        #[arg(long, value_name = "SPEC")]
        upper: FunctionSource,
        /// `power:p[:scale]`, `zero` or `csv:<path>`.
        #[arg(long, value_name = "SPEC")]
        error: ErrorSource,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Left endpoint (catalog functions).
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    /// Right endpoint (catalog functions).
    #[arg(long, allow_hyphen_values = true)]
    b: Option<f64>,
    /// Interior node count (catalog functions).
    #[arg(long)]
    n: Option<usize>,
    /// Error samples per grid step.
    #[arg(long, default_value_t = 1)]
    m_mult: usize,
    /// Accept more than 256 nodes.
    #[arg(long)]
    allow_large: bool,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Absolute tolerance; default is relative to the data.
    #[arg(long)]
    tol: Option<f64>,
    /// JSON report path; stdout when absent.
    #[arg(long, value_name = "JSON")]
    out: Option<PathBuf>,
}

/// Where a grid function comes from: `catalog:<entry>` or `csv:<path>`.
/// A spec with neither prefix is read as a CSV path.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSource {
    Catalog(CatalogEntry),
    Csv(PathBuf),
}

impl FromStr for FunctionSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if let Some(rest) = s.strip_prefix("catalog:") {
            rest.parse().map(FunctionSource::Catalog).map_err(|e| e.to_string())
        } else if let Some(rest) = s.strip_prefix("csv:") {
            non_empty_path(rest).map(FunctionSource::Csv)
        } else {
            non_empty_path(s).map(FunctionSource::Csv)
        }
    }
}

impl fmt::Display for FunctionSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSource::Catalog(e) => write!(f, "catalog:{e}"),
            FunctionSource::Csv(p) => write!(f, "csv:{}", p.display()),
        }
    }
}

fn non_empty_path(s: &str) -> Result<PathBuf, String> {
    if s.is_empty() {
        Err("empty path".into())
    } else {
        Ok(PathBuf::from(s))
    }
}

/// `power:p[:scale]`, `zero` or `csv:<path>`.
#[derive(Debug, Clone, PartialEq)]
pub enum ErrorSource {
    Power { p: f64, scale: f64 },
    Zero,
    Csv(PathBuf),
}

impl FromStr for ErrorSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "zero" {
            return Ok(ErrorSource::Zero);
        }
        if let Some(rest) = s.strip_prefix("csv:") {
            return non_empty_path(rest).map(ErrorSource::Csv);
        }
        let Some(rest) = s.strip_prefix("power:") else {
            return Err(format!("expected power:p[:scale], zero or csv:<path>, got {s:?}"));
        };
        let nums: Vec<f64> = rest
            .split(':')
            .map(|p| p.parse::<f64>().map_err(|_| format!("bad number {p:?}")))
            .collect::<Result<_, _>>()?;
        match nums[..] {
            [p] if p.is_finite() => Ok(ErrorSource::Power { p, scale: 1.0 }),
            [p, scale] if p.is_finite() && scale >= 0.0 && scale.is_finite() => {
                Ok(ErrorSource::Power { p, scale })
            }
            _ => Err(format!("expected power:p[:scale] with finite p and scale >= 0, got {s:?}")),
        }
    }
}

impl fmt::Display for ErrorSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErrorSource::Power { p, scale } => write!(f, "power:{p}:{scale}"),
            ErrorSource::Zero => write!(f, "zero"),
            ErrorSource::Csv(p) => write!(f, "csv:{}", p.display()),
        }
    }
}

/// Grid for catalog functions, and sampling density for generated errors.
#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    /// `(a, b, n)` when given or needed; `None` when a CSV supplies the grid.
    pub explicit: Option<(f64, f64, usize)>,
    pub m_mult: usize,
    pub max_n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeConfig {
    pub function: FunctionSource,
    pub error: ErrorSource,
    pub grid: GridConfig,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaConfig {
    pub error: ErrorSource,
    pub length: f64,
    pub m: usize,
    pub tol: Option<f64>,
    pub max_iter: usize,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeConfig {
    pub function: FunctionSource,
    pub error: ErrorSource,
    pub grid: GridConfig,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub trace: bool,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichConfig {
    pub lower: FunctionSource,
    pub upper: FunctionSource,
    pub error: ErrorSource,
    pub grid: GridConfig,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Analyze(AnalyzeConfig),
    Gamma(GammaConfig),
    Envelope(EnvelopeConfig),
    Sandwich(SandwichConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub threads: Option<usize>,
    pub verbose: u8,
}

fn usage(kind: ErrorKind, msg: impl fmt::Display) -> clap::Error {
    Cli::command().error(kind, msg)
}

fn check_tol(tol: Option<f64>) -> Result<Option<f64>, clap::Error> {
    match tol {
        Some(t) if !(t > 0.0 && t.is_finite()) => Err(usage(
            ErrorKind::ValueValidation,
            format!("--tol must be positive and finite, got {t}"),
        )),
        t => Ok(t),
    }
}

fn grid_config(args: GridArgs, sources: &[&FunctionSource]) -> Result<GridConfig, clap::Error> {
    if args.m_mult < 1 {
        return Err(usage(ErrorKind::ValueValidation, "--m-mult must be at least 1"));
    }
    let any_csv = sources.iter().any(|s| matches!(s, FunctionSource::Csv(_)));
    let given = args.a.is_some() || args.b.is_some() || args.n.is_some();
    let explicit = if any_csv {
        if given {
            return Err(usage(
                ErrorKind::ArgumentConflict,
                "--a/--b/--n cannot be combined with a CSV function; the file defines the grid",
            ));
        }
        None
    } else {
        let n = args.n.ok_or_else(|| {
            usage(ErrorKind::MissingRequiredArgument, "--n is required for catalog functions")
        })?;
        let (a, b) = (args.a.unwrap_or(0.0), args.b.unwrap_or(1.0));
        if !a.is_finite() || !b.is_finite() || a >= b {
            return Err(usage(
                ErrorKind::ValueValidation,
                format!("--a must be below --b, got a = {a}, b = {b}"),
            ));
        }
        if n < 2 {
            return Err(usage(ErrorKind::ValueValidation, format!("--n must be at least 2, got {n}")));
        }
        Some((a, b, n))
    };
    let max_n = if args.allow_large { usize::MAX } else { DEFAULT_MAX_N };
    if let Some((_, _, n)) = explicit {
        if n > max_n {
            return Err(usage(
                ErrorKind::ValueValidation,
                format!("--n {n} exceeds {DEFAULT_MAX_N}; pass --allow-large for cubic-time scans on larger grids"),
            ));
        }
    }
    Ok(GridConfig {
        explicit,
        m_mult: args.m_mult,
        max_n,
    })
}

/// Parses and validates `argv` (program name first).
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    if cli.threads == Some(0) {
        return Err(usage(ErrorKind::ValueValidation, "--threads must be at least 1"));
    }
    let command = match cli.command {
        Sub::Analyze {
            function,
            error,
            grid,
            common,
        } => Command::Analyze(AnalyzeConfig {
            grid: grid_config(grid, &[&function])?,
            function,
            error,
            tol: check_tol(common.tol)?,
            out: common.out,
        }),
        Sub::Gamma {
            error,
            length,
            m,
            tol,
            max_iter,
            out,
        } => {
            if matches!(error, ErrorSource::Csv(_)) && (length.is_some() || m.is_some()) {
                return Err(usage(
                    ErrorKind::ArgumentConflict,
                    "--length/--m cannot be combined with a CSV error function",
                ));
            }
            let length = length.unwrap_or(1.0);
            if !(length > 0.0 && length.is_finite()) {
                return Err(usage(ErrorKind::ValueValidation, "--length must be positive"));
            }
            let m = m.unwrap_or(256);
            if m < 2 {
                return Err(usage(ErrorKind::ValueValidation, "--m must be at least 2"));
            }
            let max_iter = max_iter.unwrap_or(64);
            if max_iter < 1 {
                return Err(usage(ErrorKind::ValueValidation, "--max-iter must be at least 1"));
            }
            Command::Gamma(GammaConfig {
                error,
                length,
                m,
                tol: check_tol(tol)?,
                max_iter,
                out,
            })
        }
        Sub::Envelope {
            function,
            error,
            grid,
            common,
            max_iter,
            trace,
        } => {
            if max_iter == Some(0) {
                return Err(usage(ErrorKind::ValueValidation, "--max-iter must be at least 1"));
            }
            Command::Envelope(EnvelopeConfig {
                grid: grid_config(grid, &[&function])?,
                function,
                error,
                tol: check_tol(common.tol)?,
                max_iter,
                trace,
                out: common.out,
            })
        }
        Sub::Sandwich {
            lower,
            upper,
            error,
            grid,
            common,
        } => {
            if common.tol.is_some() {
                return Err(usage(
                    ErrorKind::ArgumentConflict,
                    "sandwich uses data-relative tolerances; --tol is not accepted",
                ));
            }
            Command::Sandwich(SandwichConfig {
                grid: grid_config(grid, &[&lower, &upper])?,
                lower,
                upper,
                error,
                out: common.out,
            })
        }
    };
    Ok(RunConfig {
        command,
        threads: cli.threads,
        verbose: cli.verbose,
    })
}
