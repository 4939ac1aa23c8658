//! Executes a validated [`RunConfig`] and writes its reports.

use std::io::Write;
use std::path::{Path, PathBuf};

use phi_convex::errorfn::{small_scale_trend, SmallScaleTrend};
use phi_convex::gridfn::io::{fmt_f64, read_error_file, read_function_file, write_function};
use phi_convex::{
    build_slope_certificate, check_gamma, check_phi_affine, check_phi_convex,
    check_phi_convex_definitional, check_phi_holder, check_phi_monotone, check_ratio_subadditive,
    check_slope_star_monotone, check_sqrt_subadditive, check_t2_decreasing, envelope_fixed_point,
    gamma_envelope, make_power_error, sample_catalog, sandwich, ConvexityReport, EnvelopeOptions,
    ErrorFunction, GammaReport, GridFunction, GridSpec, MonotoneReport, SandwichStatus, Tol,
    Verdict, Witness,
};
use serde::Serialize;

use crate::config::{
    AnalyzeConfig, Command, EnvelopeConfig, ErrorSource, FunctionSource, GammaConfig, GridConfig,
    RunConfig, SandwichConfig,
};
use crate::error::{exit, CliError};
use crate::json::{self, SCHEMA};

type Result<T> = std::result::Result<T, CliError>;

/// Runs the command; the returned value is the process exit code.
pub fn run(config: &RunConfig) -> Result<u8> {
    match &config.command {
        Command::Analyze(c) => analyze(c, config.verbose),
        Command::Gamma(c) => gamma(c, config.verbose),
        Command::Envelope(c) => envelope(c, config.verbose),
        Command::Sandwich(c) => sandwich_cmd(c, config.verbose),
    }
}

#[derive(Serialize)]
struct GridInfo {
    a: f64,
    b: f64,
    n: usize,
    h: f64,
}

impl From<&GridSpec> for GridInfo {
    fn from(g: &GridSpec) -> Self {
        GridInfo {
            a: g.a(),
            b: g.b(),
            n: g.n(),
            h: g.step(),
        }
    }
}

#[derive(Serialize)]
struct ErrorInfo {
    spec: String,
    length: f64,
    m: usize,
}

impl ErrorInfo {
    fn new(src: &ErrorSource, phi: &ErrorFunction) -> Self {
        ErrorInfo {
            spec: src.to_string(),
            length: phi.length(),
            m: phi.m(),
        }
    }
}

fn grid_from(cfg: &GridConfig) -> Result<Option<GridSpec>> {
    cfg.explicit
        .map(|(a, b, n)| GridSpec::new(a, b, n).map_err(CliError::from))
        .transpose()
}

fn load_csv(path: &Path, cfg: &GridConfig) -> Result<GridFunction> {
    let f = read_function_file(path)?;
    if f.len() > cfg.max_n {
        return Err(CliError::Usage(format!(
            "{} has {} nodes, more than {}; pass --allow-large",
            path.display(),
            f.len(),
            cfg.max_n
        )));
    }
    Ok(f)
}

/// Loads every source on one grid: CSV files define it, catalog entries are
/// sampled on it.
fn load_functions(sources: &[&FunctionSource], cfg: &GridConfig) -> Result<Vec<GridFunction>> {
    let mut grid = grid_from(cfg)?;
    let mut loaded: Vec<Option<GridFunction>> = Vec::with_capacity(sources.len());
    for src in sources {
        match src {
            FunctionSource::Csv(path) => {
                let f = load_csv(path, cfg)?;
                match grid {
                    Some(g) if !g.is_compatible(f.grid()) => {
                        return Err(CliError::Core(phi_convex::Error::GridMismatch))
                    }
                    Some(_) => {}
                    None => grid = Some(*f.grid()),
                }
                loaded.push(Some(f));
            }
            FunctionSource::Catalog(_) => loaded.push(None),
        }
    }
    let grid = grid.ok_or_else(|| CliError::Usage("no grid: pass --n for catalog functions".into()))?;
    sources
        .iter()
        .zip(loaded)
        .map(|(src, f)| match (src, f) {
            (_, Some(f)) => Ok(f),
            (FunctionSource::Catalog(e), None) => Ok(sample_catalog(e, &grid)?),
            (FunctionSource::Csv(_), None) => unreachable!("CSV sources are loaded above"),
        })
        .collect()
}

fn load_error(src: &ErrorSource, grid: &GridSpec, m_mult: usize) -> Result<ErrorFunction> {
    let m = m_mult * (grid.n() + 1);
    Ok(match src {
        ErrorSource::Power { p, scale } => make_power_error(*p, grid.length(), m)?.scale(*scale)?,
        ErrorSource::Zero => ErrorFunction::zero(grid.length(), m)?,
        ErrorSource::Csv(path) => read_error_file(path)?,
    })
}

fn tol_of(t: Option<f64>) -> Tol {
    t.map_or(Tol::Auto, Tol::Abs)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn emit<T: Serialize>(report: &T, out: Option<&Path>) -> Result<()> {
    let bytes = json::to_bytes(report)?;
    match out {
        Some(p) => write_file(p, &bytes),
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|source| CliError::Write {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

fn function_csv(f: &GridFunction) -> Vec<u8> {
    let mut buf = Vec::new();
    write_function(f, &mut buf).expect("writing to memory");
    buf
}

/// Sibling of `out` with the given extension, refusing to clobber `out`.
fn sibling(out: &Path, ext: &str) -> Result<PathBuf> {
    let p = out.with_extension(ext);
    if p == out {
        return Err(CliError::Usage(format!(
            "--out {} would be overwritten by its .{ext} companion",
            out.display()
        )));
    }
    Ok(p)
}

fn path_string(p: &Path) -> String {
    p.display().to_string()
}

#[derive(Serialize)]
struct Checks {
    monotone: ConvexityReport,
    holder: ConvexityReport,
    convex: ConvexityReport,
    convex_definitional: ConvexityReport,
    affine: ConvexityReport,
}

#[derive(Serialize)]
struct CertificateInfo {
    built: bool,
    failure: Option<String>,
    star_monotone: Option<ConvexityReport>,
    values: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct AnalyzeReport {
    schema: &'static str,
    command: &'static str,
    function: String,
    error: ErrorInfo,
    grid: GridInfo,
    verdict: Verdict,
    checks: Checks,
    slope_certificate: CertificateInfo,
}

fn analyze(c: &AnalyzeConfig, verbose: u8) -> Result<u8> {
    let f = load_functions(&[&c.function], &c.grid)?.remove(0);
    let phi = load_error(&c.error, f.grid(), c.grid.m_mult)?;
    let tol = tol_of(c.tol);
    let checks = Checks {
        monotone: check_phi_monotone(&f, &phi, tol)?,
        holder: check_phi_holder(&f, &phi, tol)?,
        convex: check_phi_convex(&f, &phi, tol)?,
        convex_definitional: check_phi_convex_definitional(&f, &phi, tol)?,
        affine: check_phi_affine(&f, &phi, tol)?,
    };
    let slope_certificate = if checks.convex.holds() {
        match build_slope_certificate(&f, &phi, tol) {
            Ok(cert) => CertificateInfo {
                built: true,
                failure: None,
                star_monotone: Some(check_slope_star_monotone(&cert, &phi, tol)?),
                values: Some(cert.values().to_vec()),
            },
            Err(e) => CertificateInfo {
                built: false,
                failure: Some(e.to_string()),
                star_monotone: None,
                values: None,
            },
        }
    } else {
        CertificateInfo {
            built: false,
            failure: Some("function is not Φ-convex on the grid".into()),
            star_monotone: None,
            values: None,
        }
    };
    let verdict = checks.convex.verdict;
    let report = AnalyzeReport {
        schema: SCHEMA,
        command: "analyze",
        function: c.function.to_string(),
        error: ErrorInfo::new(&c.error, &phi),
        grid: f.grid().into(),
        verdict,
        checks,
        slope_certificate,
    };
    emit(&report, c.out.as_deref())?;
    if verbose > 0 {
        eprintln!(
            "analyze: {} is {}Φ-convex for {} (worst margin {:e})",
            c.function,
            if verdict == Verdict::Holds { "" } else { "not " },
            c.error,
            report.checks.convex.worst_margin
        );
    }
    Ok(if verdict == Verdict::Holds { exit::OK } else { exit::VIOLATED })
}

#[derive(Serialize)]
struct Diagnostics {
    sqrt_subadditive: GammaReport,
    ratio_subadditive: GammaReport,
    t2_decreasing: MonotoneReport,
    small_scale_trend: SmallScaleTrend,
}

#[derive(Serialize)]
struct GammaJson {
    schema: &'static str,
    command: &'static str,
    error: ErrorInfo,
    gamma_holds: bool,
    worst_margin: f64,
    witness: Option<(f64, f64)>,
    tol: f64,
    diagnostics: Diagnostics,
    envelope_tol: f64,
    envelope_converged: bool,
    envelope_sup_deltas: Vec<f64>,
    /// `||Φ_k||` for every iterate, the input first.
    envelope_sups: Vec<f64>,
    envelope_final: Vec<f64>,
}

fn gamma(c: &GammaConfig, verbose: u8) -> Result<u8> {
    let phi = match &c.error {
        ErrorSource::Power { p, scale } => make_power_error(*p, c.length, c.m)?.scale(*scale)?,
        ErrorSource::Zero => ErrorFunction::zero(c.length, c.m)?,
        ErrorSource::Csv(path) => read_error_file(path)?,
    };
    let tol = tol_of(c.tol);
    let g = check_gamma(&phi, tol);
    let env_tol = c.tol.unwrap_or(1e-12 * (1.0 + phi.sup_norm()));
    let trace = gamma_envelope(&phi, env_tol, c.max_iter)?;
    let report = GammaJson {
        schema: SCHEMA,
        command: "gamma",
        error: ErrorInfo::new(&c.error, &phi),
        gamma_holds: g.holds,
        worst_margin: g.worst_margin,
        witness: g.witness,
        tol: g.tol,
        diagnostics: Diagnostics {
            sqrt_subadditive: check_sqrt_subadditive(&phi, tol),
            ratio_subadditive: check_ratio_subadditive(&phi, tol),
            t2_decreasing: check_t2_decreasing(&phi, tol),
            small_scale_trend: small_scale_trend(&phi),
        },
        envelope_tol: env_tol,
        envelope_converged: trace.converged,
        envelope_sups: trace.iterates.iter().map(|e| e.sup_norm()).collect(),
        envelope_sup_deltas: trace.sup_deltas.clone(),
        envelope_final: trace.last().samples().to_vec(),
    };
    emit(&report, c.out.as_deref())?;
    if verbose > 0 {
        eprintln!(
            "gamma: Γ {} for {} (worst margin {:e}); envelope sup {:e} after {} steps",
            if g.holds { "holds" } else { "fails" },
            c.error,
            g.worst_margin,
            trace.last().sup_norm(),
            trace.sup_deltas.len()
        );
    }
    Ok(if g.holds { exit::OK } else { exit::VIOLATED })
}

#[derive(Serialize)]
struct EnvelopeJson {
    schema: &'static str,
    command: &'static str,
    function: String,
    error: ErrorInfo,
    grid: GridInfo,
    tol: f64,
    iterations: usize,
    converged: bool,
    is_phi_convex: bool,
    sup_deltas: Vec<f64>,
    max_decrease: f64,
    values_csv: Option<String>,
    trace_csv: Option<String>,
    result: Vec<f64>,
}

fn envelope(c: &EnvelopeConfig, verbose: u8) -> Result<u8> {
    let f = load_functions(&[&c.function], &c.grid)?.remove(0);
    let phi = load_error(&c.error, f.grid(), c.grid.m_mult)?;
    let opts = EnvelopeOptions {
        tol: c.tol,
        max_iter: c.max_iter,
    };
    let r = envelope_fixed_point(&f, &phi, &opts)?;
    let (values_csv, trace_csv) = match &c.out {
        Some(out) => {
            let values = sibling(out, "csv")?;
            write_file(&values, &function_csv(&r.result))?;
            let trace = if c.trace {
                let path = sibling(out, "trace.csv")?;
                let mut buf = String::from("iteration,sup_delta\n");
                for (k, d) in r.iterates_sup_delta.iter().enumerate() {
                    buf.push_str(&format!("{},{}\n", k + 1, fmt_f64(*d)));
                }
                write_file(&path, buf.as_bytes())?;
                Some(path_string(&path))
            } else {
                None
            };
            (Some(path_string(&values)), trace)
        }
        None => (None, None),
    };
    let report = EnvelopeJson {
        schema: SCHEMA,
        command: "envelope",
        function: c.function.to_string(),
        error: ErrorInfo::new(&c.error, &phi),
        grid: f.grid().into(),
        tol: r.tol,
        iterations: r.iterations,
        converged: r.converged,
        is_phi_convex: r.is_phi_convex,
        sup_deltas: r.iterates_sup_delta.clone(),
        max_decrease: f.max_excess(&r.result)?,
        values_csv,
        trace_csv,
        result: r.result.values().to_vec(),
    };
    emit(&report, c.out.as_deref())?;
    if verbose > 0 {
        eprintln!(
            "envelope: {} after {} steps, max decrease {:e}",
            if r.converged { "converged" } else { "not converged" },
            r.iterations,
            report.max_decrease
        );
    }
    Ok(exit::OK)
}

#[derive(Serialize)]
struct SandwichJson {
    schema: &'static str,
    command: &'static str,
    lower: String,
    upper: String,
    error: ErrorInfo,
    grid: GridInfo,
    status: SandwichStatus,
    inequality_holds: bool,
    worst_margin: f64,
    witness: Option<Witness>,
    tol: f64,
    psi_convex: Option<bool>,
    envelope_converged: Option<bool>,
    h_csv: Option<String>,
    h: Option<Vec<f64>>,
}

fn sandwich_cmd(c: &SandwichConfig, verbose: u8) -> Result<u8> {
    let mut fns = load_functions(&[&c.lower, &c.upper], &c.grid)?;
    let f = fns.pop().unwrap();
    let g = fns.pop().unwrap();
    let phi = load_error(&c.error, f.grid(), c.grid.m_mult)?;
    let rep = sandwich(&g, &f, &phi)?;
    let h_csv = match (&rep.h, &c.out) {
        (Some(h), Some(out)) => {
            let p = sibling(out, "csv")?;
            write_file(&p, &function_csv(h))?;
            Some(path_string(&p))
        }
        _ => None,
    };
    let report = SandwichJson {
        schema: SCHEMA,
        command: "sandwich",
        lower: c.lower.to_string(),
        upper: c.upper.to_string(),
        error: ErrorInfo::new(&c.error, &phi),
        grid: f.grid().into(),
        status: rep.status,
        inequality_holds: rep.inequality_holds,
        worst_margin: rep.worst_margin,
        witness: rep.witness,
        tol: rep.tol,
        psi_convex: rep.psi_convex,
        envelope_converged: rep.envelope.as_ref().map(|e| e.converged),
        h_csv,
        h: rep.h.as_ref().map(|h| h.values().to_vec()),
    };
    emit(&report, c.out.as_deref())?;
    if verbose > 0 {
        eprintln!("sandwich: {:?} (worst margin {:e})", rep.status, rep.worst_margin);
    }
    Ok(match rep.status {
        SandwichStatus::Holds => exit::OK,
        SandwichStatus::Violated => exit::VIOLATED,
        SandwichStatus::HypothesisNotMet => exit::HYPOTHESIS,
    })
}
