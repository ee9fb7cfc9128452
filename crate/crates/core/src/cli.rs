//! The `pointint` command line.
//!
//! Configuration comes from an optional JSON file with flag overrides on
//! top. Results go to stdout as CSV or JSON; warnings go to stderr.
//!
//! Exit codes: 0 success, 1 failed checks, 2 bad configuration,
//! 3 numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::checks::{run_checks, CheckInput};
use crate::convergence::{
    eigenvalue_drift, element_slopes, expansion_check, u_limit_table, DEFAULT_A_SEQ,
};
use crate::error::Error;
use crate::renorm::{classify_branch, gamma_poorly_conditioned, realize, BranchTag};
use crate::spectrum::{
    count_nodes, eigenfunction_approx_level, eigenfunction_exact_level, paired_spectra,
    uniform_grid, BoxDomain, Eigenpair, ScanOptions,
};
use crate::transfer::PointParams;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Environment variable capping worker threads; `0` runs serially.
pub const THREADS_ENV: &str = "POINTINT_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "pointint",
    version,
    about = "Point interactions in a Dirichlet box and their three-delta approximation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact and approximate levels side by side.
    Spectrum,
    /// Sampled eigenfunctions of level --n.
    Wavefunction,
    /// a -> 0 convergence table of the composite matrix.
    Converge,
    /// Run the invariant suite and print a JSON report.
    Check,
}

/// Flags that override the config file.
#[derive(Debug, Default, Clone, clap::Args)]
pub struct Overrides {
    /// JSON config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Spacing of the three deltas.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub x1: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub x2: Option<f64>,
    /// Quantum number (wavefunction, converge).
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutFormat>,
}

/// Config file contents; every field is optional.
#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub theta: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    pub x1: Option<f64>,
    pub x2: Option<f64>,
    pub a: Option<f64>,
    pub k_lo: Option<f64>,
    pub k_hi: Option<f64>,
    pub grid_steps: Option<usize>,
    pub sample_points: Option<usize>,
    pub out_format: Option<OutFormat>,
    pub n: Option<usize>,
    /// Wave number of the convergence table.
    pub k: Option<f64>,
    pub a_seq: Option<Vec<f64>>,
}

/// A validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub params: PointParams,
    pub domain: BoxDomain,
    pub a: f64,
    pub scan: ScanOptions,
    pub sample_points: usize,
    pub out_format: OutFormat,
    pub n: Option<usize>,
    pub k: f64,
    pub a_seq: Vec<f64>,
}

impl RunConfig {
    pub fn from_parts(file: ConfigFile, flags: &Overrides) -> Result<Self, Error> {
        let pick =
            |flag: Option<f64>, file: Option<f64>, default: f64| flag.or(file).unwrap_or(default);
        let params = PointParams::new(
            pick(flags.theta, file.theta, 0.0),
            pick(flags.alpha, file.alpha, 1.0),
            pick(flags.beta, file.beta, 0.0),
            pick(flags.gamma, file.gamma, 0.0),
            pick(flags.delta, file.delta, 1.0),
        )?;
        let domain = BoxDomain::new(
            pick(flags.x1, file.x1, -15.0),
            pick(flags.x2, file.x2, 15.0),
        )?;
        let a = pick(flags.a, file.a, 0.2);
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidParameter {
                name: "a",
                reason: format!("spacing must be positive, got {a}"),
            });
        }
        domain.check_spacing(a)?;
        realize(&params, a)?;
        let scan = ScanOptions {
            k_lo: file.k_lo.unwrap_or(crate::spectrum::DEFAULT_K_LO),
            k_hi: file.k_hi.unwrap_or(1.2),
            grid_steps: file.grid_steps.unwrap_or(5000),
        };
        if !(scan.k_lo > 0.0 && scan.k_lo < scan.k_hi && scan.k_hi.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "k_range",
                reason: format!("need 0 < k_lo < k_hi, got ({}, {})", scan.k_lo, scan.k_hi),
            });
        }
        if scan.grid_steps < 2 {
            return Err(Error::InvalidParameter {
                name: "grid_steps",
                reason: "need at least 2".into(),
            });
        }
        let sample_points = file.sample_points.unwrap_or(12000);
        if sample_points < 3 {
            return Err(Error::InvalidParameter {
                name: "sample_points",
                reason: "need at least 3".into(),
            });
        }
        let n = flags.n.or(file.n);
        if n == Some(0) {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: "quantum numbers start at 1".into(),
            });
        }
        let k = file.k.unwrap_or(1.0);
        if !(k.is_finite() && k >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "k",
                reason: format!("need a finite k >= 0, got {k}"),
            });
        }
        let a_seq = file.a_seq.unwrap_or_else(|| DEFAULT_A_SEQ.to_vec());
        if a_seq.is_empty()
            || a_seq.iter().any(|v| !(v.is_finite() && *v > 0.0))
            || a_seq.windows(2).any(|w| w[1] >= w[0])
        {
            return Err(Error::InvalidParameter {
                name: "a_seq",
                reason: "need a non-empty, strictly descending list of positive spacings".into(),
            });
        }
        Ok(Self {
            params,
            domain,
            a,
            scan,
            sample_points,
            out_format: flags.format.or(file.out_format).unwrap_or_default(),
            n,
            k,
            a_seq,
        })
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotAnEigenvalue { .. } | Error::Numerical(_) => EXIT_NUMERICAL,
        _ => EXIT_CONFIG,
    }
}

/// `v` with 12 significant digits.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        format!("{:.*}", (11 - exp).max(0) as usize, v)
    } else {
        format!("{v:.11e}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_sig).unwrap_or_default()
}

#[derive(Debug)]
enum Failure {
    Lib(Error),
    Io(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_CONFIG
                }
            };
            return code;
        }
    };
    // Commands write to buffers so the work can run inside a thread pool.
    let (result, stdout_buf, stderr_buf) = with_thread_limit(|| {
        let mut o = Vec::new();
        let mut e = Vec::new();
        let r = execute(&cli, &mut o, &mut e);
        (r, o, e)
    });
    let _ = out.write_all(&stdout_buf);
    let _ = err.write_all(&stderr_buf);
    match result {
        Ok(code) => code,
        Err(Failure::Lib(e)) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_CONFIG
        }
        Err(Failure::Io(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_CONFIG
        }
    }
}

fn with_thread_limit<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok());
    match threads {
        Some(n) => match rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
        {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let file = match &cli.overrides.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))?
        }
        None => ConfigFile::default(),
    };
    Ok(RunConfig::from_parts(file, &cli.overrides)?)
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let cfg = load_config(cli)?;
    if gamma_poorly_conditioned(&cfg.params) {
        writeln!(
            err,
            "warning: |gamma| = {:e} is tiny; the 1/gamma strengths are ill-conditioned",
            cfg.params.gamma().abs()
        )?;
    }
    match cli.command {
        Command::Spectrum => cmd_spectrum(&cfg, out, err),
        Command::Wavefunction => cmd_wavefunction(&cfg, out, err),
        Command::Converge => cmd_converge(&cfg, out, err),
        Command::Check => cmd_check(&cfg, out, err),
    }
}

fn kind(e: &Eigenpair) -> &'static str {
    if e.bound {
        "bound"
    } else {
        "scattering"
    }
}

#[derive(Debug, Serialize)]
struct SpectrumRow {
    n: usize,
    kind: &'static str,
    k_exact: Option<f64>,
    k_approx: Option<f64>,
    difference: Option<f64>,
}

fn cmd_spectrum(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let s = paired_spectra(&cfg.params, &cfg.domain, cfg.a, &cfg.scan)?;
    for w in s.exact.warnings.iter().chain(&s.approx.warnings) {
        writeln!(err, "warning: {w}")?;
    }
    let top = s
        .exact
        .levels
        .iter()
        .chain(&s.approx.levels)
        .map(|e| e.n)
        .max()
        .unwrap_or(0);
    let rows: Vec<SpectrumRow> = (1..=top)
        .map(|n| {
            let ex = s.exact.level(n);
            let ap = s.approx.level(n);
            let k_exact = ex.map(|e| e.k);
            let k_approx = ap.map(|e| e.k);
            SpectrumRow {
                n,
                kind: kind(ex.or(ap).expect("level exists in one list")),
                k_exact,
                k_approx,
                difference: k_exact.zip(k_approx).map(|(e, a)| a - e),
            }
        })
        .collect();
    match cfg.out_format {
        OutFormat::Json => {
            let doc = json!({
                "config": cfg,
                "escaped_levels": s.escaped,
                "levels": rows,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
        }
        OutFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["n", "kind", "k_exact", "k_approx", "difference"])?;
            for r in &rows {
                w.write_record([
                    r.n.to_string(),
                    r.kind.to_string(),
                    fmt_opt(r.k_exact),
                    fmt_opt(r.k_approx),
                    fmt_opt(r.difference),
                ])?;
            }
            w.flush()?;
        }
    }
    Ok(EXIT_OK)
}

/// Node counts come last so they read as a footer.
#[derive(Serialize)]
struct WaveDoc {
    n: usize,
    kind: &'static str,
    k_exact: Option<f64>,
    k_approx: f64,
    samples: Vec<serde_json::Value>,
    nodes_exact: Option<usize>,
    nodes_approx: usize,
}

fn cmd_wavefunction(
    cfg: &RunConfig,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Failure> {
    let n = cfg
        .n
        .ok_or_else(|| Failure::Usage("wavefunction needs a quantum number, pass --n".into()))?;
    let s = paired_spectra(&cfg.params, &cfg.domain, cfg.a, &cfg.scan)?;
    for w in s.exact.warnings.iter().chain(&s.approx.warnings) {
        writeln!(err, "warning: {w}")?;
    }
    let approx_level = *s.approx.require(n)?;
    let exact_level = s.exact.level(n).copied();
    if exact_level.is_none() {
        writeln!(
            err,
            "warning: level {n} of the approximant has no exact counterpart; exact columns are empty"
        )?;
    }
    let grid = uniform_grid(&cfg.domain, cfg.sample_points);
    let wa = eigenfunction_approx_level(&s.realization, &cfg.domain, &approx_level, &grid)?;
    let we = exact_level
        .map(|l| eigenfunction_exact_level(&cfg.params, &cfg.domain, &l, &grid))
        .transpose()?;
    let nodes_approx = count_nodes(&wa);
    let nodes_exact = we.as_ref().map(count_nodes);

    let left = we.as_ref().and_then(|w| w.left_limit_at_zero);
    let cell =
        |i: usize,
         f: fn(&crate::transfer::Complex) -> f64,
         src: Option<&crate::spectrum::WaveSamples>| { src.map(|w| f(&w.phis[i])) };
    match cfg.out_format {
        OutFormat::Json => {
            let samples: Vec<_> = grid
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    json!({
                        "x": x,
                        "re_exact": cell(i, |z| z.re, we.as_ref()),
                        "im_exact": cell(i, |z| z.im, we.as_ref()),
                        "re_approx": wa.phis[i].re,
                        "im_approx": wa.phis[i].im,
                        "left_limit_at_0": if x == 0.0 { left.map(|z| z.re) } else { None },
                    })
                })
                .collect();
            let doc = WaveDoc {
                n,
                kind: kind(&approx_level),
                k_exact: exact_level.map(|l| l.k),
                k_approx: approx_level.k,
                samples,
                nodes_exact,
                nodes_approx,
            };
            writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
        }
        OutFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record([
                "x",
                "re_exact",
                "im_exact",
                "re_approx",
                "im_approx",
                "left_limit_at_0",
            ])?;
            for (i, &x) in grid.iter().enumerate() {
                w.write_record([
                    fmt_sig(x),
                    fmt_opt(cell(i, |z| z.re, we.as_ref())),
                    fmt_opt(cell(i, |z| z.im, we.as_ref())),
                    fmt_sig(wa.phis[i].re),
                    fmt_sig(wa.phis[i].im),
                    if x == 0.0 {
                        fmt_opt(left.map(|z| z.re))
                    } else {
                        String::new()
                    },
                ])?;
            }
            w.flush()?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_converge(
    cfg: &RunConfig,
    out: &mut dyn Write,
    _err: &mut dyn Write,
) -> Result<i32, Failure> {
    let mut rows = u_limit_table(&cfg.params, cfg.k, &cfg.a_seq)?;
    let drift = cfg
        .n
        .map(|n| eigenvalue_drift(&cfg.params, &cfg.domain, n, &cfg.a_seq, &cfg.scan))
        .transpose()?;
    if let Some(d) = &drift {
        for (row, dr) in rows.iter_mut().zip(&d.rows) {
            row.k_n_error = Some(dr.error.abs());
        }
    }
    let slopes = element_slopes(&rows);
    let expansion = if classify_branch(&cfg.params) == BranchTag::GammaNonZero {
        let window: Vec<f64> = cfg
            .a_seq
            .iter()
            .copied()
            .filter(|a| (1e-4..=1e-2).contains(a))
            .collect();
        expansion_check(&cfg.params, cfg.k, &window)?
    } else {
        None
    };
    match cfg.out_format {
        OutFormat::Json => {
            let doc = json!({
                "k": cfg.k,
                "rows": rows,
                "element_slopes": slopes,
                "expansion_slope": expansion,
                "drift": drift,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
        }
        OutFormat::Csv => {
            {
                let mut w = csv::Writer::from_writer(&mut *out);
                w.write_record([
                    "a",
                    "err_11",
                    "err_12",
                    "err_21",
                    "err_22",
                    "det_error",
                    "k_n_error",
                ])?;
                for r in &rows {
                    let e = r.element_errors;
                    w.write_record([
                        fmt_sig(r.a),
                        fmt_sig(e[0]),
                        fmt_sig(e[1]),
                        fmt_sig(e[2]),
                        fmt_sig(e[3]),
                        fmt_sig(r.det_error),
                        fmt_opt(r.k_n_error),
                    ])?;
                }
                w.flush()?;
            }
            let names = ["slope_11", "slope_12", "slope_21", "slope_22"];
            let parts: Vec<String> = names
                .iter()
                .zip(slopes)
                .map(|(name, s)| {
                    format!("{name}={}", s.map(fmt_sig).unwrap_or_else(|| "nan".into()))
                })
                .collect();
            writeln!(out, "# {}", parts.join(" "))?;
            if let Some(s) = expansion {
                writeln!(out, "# expansion_slope={}", fmt_sig(s))?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_check(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let report = run_checks(&CheckInput {
        params: cfg.params,
        domain: cfg.domain,
        a: cfg.a,
        scan: cfg.scan,
        sample_points: cfg.sample_points,
    });
    writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    if report.passed {
        return Ok(EXIT_OK);
    }
    for f in report.failures() {
        writeln!(err, "failed: {} ({})", f.name, f.detail)?;
    }
    Ok(EXIT_CHECK_FAILED)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["pointint"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(0.894964123456789), "0.894964123457");
        assert_eq!(fmt_sig(-15.0), "-15.0000000000");
        assert_eq!(fmt_sig(1.5e-9), "1.50000000000e-9");
        assert_eq!(fmt_sig(0.0), "0");
    }

    #[test]
    fn non_unimodular_config_is_rejected() {
        let (code, _, err) = run_args(&["check", "--alpha", "2", "--delta", "1"]);
        assert_eq!(code, EXIT_CONFIG);
        assert!(err.contains("SL(2,R)"), "{err}");
    }

    #[test]
    fn spacing_beyond_wall_is_rejected() {
        let (code, _, err) = run_args(&["check", "--a", "20"]);
        assert_eq!(code, EXIT_CONFIG);
        assert!(err.contains("geometry"), "{err}");
    }

    #[test]
    fn wavefunction_needs_n() {
        let (code, _, err) = run_args(&["wavefunction"]);
        assert_eq!(code, EXIT_CONFIG);
        assert!(err.contains("--n"));
    }

    #[test]
    fn free_spectrum_rows() {
        let (code, out, _) = run_args(&["spectrum"]);
        assert_eq!(code, EXIT_OK);
        let second = out.lines().nth(1).unwrap();
        assert_eq!(second, "1,scattering,0.104719755120,0.104719755120,0");
    }
}
