//! The `simtrans` command line.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 verification failure.

pub mod config;
pub mod model;
pub mod output;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::canonical::CanonicalTransform;
use crate::spectra::{
    broken_phase_indicator, closed_form_eigenvalue, critical_frequencies, eigenvector_coefficients,
    eta_check, general_quadratic_spectrum, match_levels, quadratic_critical_frequency,
    quadratic_fock_matrix, verify_against, Branch, CriticalFrequencies,
};
use crate::wavefun::{self, count_nodes, rm_ground_state, synthesize, Grid, WavefunctionSample};
use crate::weyl::WeylPoly;

use config::{Command, ConfigError, Format, RunConfig};
use model::{Family, Model};
use output::{Node, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

/// Caps the number of scan workers when set to a positive integer.
pub const THREADS_ENV: &str = "SIMTRANS_SCAN_THREADS";

/// Max-imaginary-part level above which a scan point counts as broken.
pub const BROKEN_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(
    name = "simtrans",
    version,
    about = "Spectra of non-Hermitian quadratic Hamiltonians"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Closed-form levels on both branches and numeric levels at a chosen frequency.
    Spectrum(Common),
    /// Sweep one parameter and track the broken-phase indicator.
    Scan(ScanArgs),
    /// Isospectrality and pseudo-Hermiticity checks.
    Verify(Common),
    /// Sample an eigenfunction on a grid.
    Wavefunction(WaveArgs),
}

#[derive(Debug, Args, Default)]
pub struct Common {
    #[arg(long, allow_hyphen_values = true)]
    pub h11: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub h12: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub h22: Option<String>,
    /// Position-momentum mixing of the transform.
    #[arg(long = "rm-alpha", allow_hyphen_values = true)]
    pub rm_alpha: Option<String>,
    /// Momentum-position mixing of the transform.
    #[arg(long = "rm-beta", allow_hyphen_values = true)]
    pub rm_beta: Option<String>,
    /// Same as --rm-alpha.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Real or complex, e.g. `0.5i`.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<String>,
    /// Gauge strength.
    #[arg(long, allow_hyphen_values = true)]
    pub g: Option<String>,
    /// Generator coefficient of x^2.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    /// Generator coefficient of p^2.
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<String>,
    /// Generator coefficient of (xp + px).
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<String>,
    /// Number-basis frequency for numeric diagonalization (default 1).
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<String>,
    /// Force constant.
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<String>,
    /// Number of levels to report.
    #[arg(short = 'n', long = "levels")]
    pub levels: Option<String>,
    /// Truncation size of the number basis.
    #[arg(short = 'N', long = "truncation")]
    pub truncation: Option<String>,
    #[arg(long)]
    pub tol: Option<String>,
    /// json or csv.
    #[arg(long)]
    pub format: Option<String>,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<String>,
    /// Flat `key = value` file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// sho, three-param, rm, ahmed, gamma, generator or gauge (inferred when absent).
    #[arg(long)]
    pub family: Option<String>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub common: Common,
    /// Parameter to sweep, e.g. gamma.
    #[arg(long)]
    pub param: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub start: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub stop: Option<String>,
    #[arg(long)]
    pub step: Option<String>,
}

#[derive(Debug, Args)]
pub struct WaveArgs {
    #[command(flatten)]
    pub common: Common,
    /// State index.
    #[arg(long)]
    pub level: Option<String>,
    /// Grid size.
    #[arg(long)]
    pub points: Option<String>,
    /// Grid half-width (default 12/sqrt(omega)).
    #[arg(long = "half-width")]
    pub half_width: Option<String>,
}

impl Common {
    fn into_map(self) -> (Option<PathBuf>, BTreeMap<String, String>) {
        let pairs = [
            ("h11", self.h11),
            ("h12", self.h12),
            ("h22", self.h22),
            ("rm-alpha", self.rm_alpha),
            ("rm-beta", self.rm_beta),
            ("lambda", self.lambda),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("g", self.g),
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("omega", self.omega),
            ("k", self.k),
            ("levels", self.levels),
            ("truncation", self.truncation),
            ("tol", self.tol),
            ("format", self.format),
            ("out", self.out),
            ("family", self.family),
        ];
        let map = pairs
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| (k.to_string(), v)))
            .collect();
        (self.config, map)
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(crate::Error),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(e) => write!(f, "numerical failure: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        if e.is_numeric() {
            CliError::Numeric(e)
        } else {
            CliError::Config(e.to_string())
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

/// A finished report and whether its checks passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Report,
    pub passed: bool,
}

/// Parses arguments into a resolved configuration.
pub fn parse_config<I, T>(args: I) -> Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    let (command, (file, mut map)) = match cli.command {
        Sub::Spectrum(c) => (Command::Spectrum, c.into_map()),
        Sub::Verify(c) => (Command::Verify, c.into_map()),
        Sub::Scan(s) => {
            let mut parts = s.common.into_map();
            for (k, v) in [
                ("param", s.param),
                ("start", s.start),
                ("stop", s.stop),
                ("step", s.step),
            ] {
                if let Some(v) = v {
                    parts.1.insert(k.to_string(), v);
                }
            }
            (Command::Scan, parts)
        }
        Sub::Wavefunction(w) => {
            let mut parts = w.common.into_map();
            for (k, v) in [
                ("level", w.level),
                ("points", w.points),
                ("half-width", w.half_width),
            ] {
                if let Some(v) = v {
                    parts.1.insert(k.to_string(), v);
                }
            }
            (Command::Wavefunction, parts)
        }
    };
    map.retain(|_, v| !v.is_empty());
    RunConfig::resolve(command, file.as_deref(), map)
        .map_err(|e| clap::Error::raw(clap::error::ErrorKind::ValueValidation, format!("{e}\n")))
}

/// Full command-line entry point; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match parse_config(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cfg).and_then(|o| write_report(&cfg, &o.report).map(|_| o)) {
        Ok(o) if o.passed => EXIT_OK,
        Ok(_) => {
            eprintln!("verification failed");
            EXIT_VERIFY
        }
        Err(e) => {
            eprintln!("simtrans: {e}");
            e.exit_code()
        }
    }
}

pub fn write_report(cfg: &RunConfig, report: &Report) -> Result<(), CliError> {
    let mut sink: Box<dyn Write> = match &cfg.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match cfg.format {
        Format::Json => report.write_json(&mut sink)?,
        Format::Csv => report.write_csv(&mut sink)?,
    }
    sink.flush()?;
    Ok(())
}

/// Runs the configured subcommand without writing anything.
pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.command {
        Command::Spectrum => cmd_spectrum(cfg),
        Command::Scan => cmd_scan(cfg),
        Command::Verify => cmd_verify(cfg),
        Command::Wavefunction => cmd_wavefunction(cfg),
    }
}

fn config_node(cfg: &RunConfig, model: Option<&Model>) -> Node {
    let mut node = Node::obj();
    for (k, v) in cfg.echo() {
        node.push(&k, v);
    }
    if let (Some(m), None) = (model, &cfg.family) {
        node.push("family", m.family.name());
    }
    node
}

fn margin_node(node: &mut Node, margin: Option<f64>) {
    node.push("normalizability_margin", margin);
    node.push("normalizable", margin.map(|m| m > 0.0));
}

fn numeric_omega(cfg: &RunConfig) -> Result<f64, CliError> {
    let w = cfg.real("omega")?.unwrap_or(1.0);
    if w == 0.0 {
        return Err(CliError::Config("omega must be nonzero".into()));
    }
    Ok(w)
}

fn phase_name(q: &crate::canonical::QuadraticHamiltonian) -> &'static str {
    let omega = q.level_spacing_half();
    let scale = q.c_pp.norm().max(q.c_xp.norm()).max(q.c_xx.norm());
    if omega.norm() <= 1e-12 * scale {
        "exceptional"
    } else if omega.im.abs() > 1e-12 * omega.norm() {
        "broken"
    } else {
        "unbroken"
    }
}

fn critical_node(model: &Model) -> Node {
    if let Some(h) = &model.oscillator {
        return match critical_frequencies(h) {
            CriticalFrequencies::Pair {
                plus,
                minus,
                sign_contract,
            } => Node::obj()
                .with("kind", "pair")
                .with("omega_plus", plus)
                .with("omega_minus", minus)
                .with("sign_contract", sign_contract),
            CriticalFrequencies::Single(w) => {
                Node::obj().with("kind", "single").with("omega_plus", w)
            }
            CriticalFrequencies::Exceptional(w) => {
                Node::obj().with("kind", "exceptional").with("omega", w)
            }
            CriticalFrequencies::ComplexPair { discriminant } => Node::obj()
                .with("kind", "complex_pair")
                .with("discriminant", discriminant),
            CriticalFrequencies::NoRoot => Node::obj().with("kind", "none"),
        };
    }
    match quadratic_critical_frequency(&model.quadratic) {
        Some(w) => Node::obj().with("kind", "complex").with("omega_plus", w),
        None => Node::obj().with("kind", "none"),
    }
}

fn cmd_spectrum(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let model = Model::from_config(cfg)?;
    let omega = numeric_omega(cfg)?;
    let q = model.quadratic;
    let closed: Vec<(Complex64, Complex64)> = (0..cfg.levels)
        .map(|n| match &model.oscillator {
            Some(h) if h.discriminant() >= 0.0 => {
                let p = closed_form_eigenvalue(h, n, Branch::Plus).expect("D >= 0");
                let m = closed_form_eigenvalue(h, n, Branch::Minus).expect("D >= 0");
                (Complex64::new(p, 0.0), Complex64::new(m, 0.0))
            }
            _ => {
                let e = general_quadratic_spectrum(&q, n);
                (e, -e)
            }
        })
        .collect();
    let m = quadratic_fock_matrix(&q, Complex64::new(omega, 0.0), cfg.truncation)?;
    let numeric = m.numeric_spectrum()?;
    let plus: Vec<Complex64> = closed.iter().map(|c| c.0).collect();
    let (matched, unmatched) = match_levels(&numeric, &plus);
    let mut results = Vec::with_capacity(cfg.levels);
    let mut max_dev = 0.0f64;
    for (n, (p, mi)) in closed.iter().enumerate() {
        let hit = matched.iter().find(|l| l.level == n);
        if let Some(l) = hit {
            max_dev = max_dev.max(l.deviation);
        }
        results.push(
            Node::obj()
                .with("level", n)
                .with("closed_form_plus", *p)
                .with("closed_form_minus", *mi)
                .with("numeric", hit.map(|l| l.eigenvalue))
                .with("deviation", hit.map(|l| l.deviation)),
        );
    }
    let mut diag = Node::obj()
        .with("family", model.family.name())
        .with("discriminant", q.discriminant())
        .with("phase", phase_name(&q))
        .with("critical_frequencies", critical_node(&model))
        .with("numeric_omega", omega)
        .with("truncation", cfg.truncation)
        .with("max_deviation", max_dev)
        .with("unmatched_levels", unmatched);
    margin_node(&mut diag, model.margin());
    Ok(Outcome {
        report: Report {
            config: config_node(cfg, Some(&model)),
            results,
            diagnostics: diag,
        },
        passed: true,
    })
}

fn cmd_verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let model = Model::from_config(cfg)?;
    let omega = numeric_omega(cfg)?;
    let spacing = model.base_spacing();
    let reference: Vec<Complex64> = (0..cfg.levels)
        .map(|n| spacing * (2.0 * n as f64 + 1.0))
        .collect();
    let u = model.transform.unwrap_or_else(CanonicalTransform::identity);
    let iso = verify_against(&model.base, &u, omega, cfg.truncation, &reference, cfg.tol)?;

    let results: Vec<Node> = iso
        .levels
        .iter()
        .map(|l| {
            Node::obj()
                .with("level", l.level)
                .with("eigenvalue", l.eigenvalue)
                .with("reference", l.reference)
                .with("deviation", l.deviation)
                .with("branch", l.branch.as_str())
        })
        .collect();

    let m = quadratic_fock_matrix(&model.quadratic, Complex64::new(omega, 0.0), cfg.truncation)?;
    let eta = eta_check(&m, cfg.levels, cfg.tol);
    let (eta_node, eta_passed) = match &eta {
        Ok(r) => (
            Node::obj()
                .with("biorthonormality_defect", r.biorthonormality_defect)
                .with("pseudo_hermiticity_defect", r.pseudo_hermiticity_defect)
                .with("passed", r.passed),
            r.passed,
        ),
        Err(e) => (
            Node::obj()
                .with("error", e.to_string())
                .with("passed", false),
            false,
        ),
    };
    let passed = iso.passed && eta_passed;
    let mut diag = Node::obj()
        .with("family", model.family.name())
        .with("numeric_omega", omega)
        .with("truncation", cfg.truncation)
        .with(
            "isospectral",
            Node::obj()
                .with("max_deviation", iso.max_deviation())
                .with("unmatched_levels", iso.unmatched.clone())
                .with("passed", iso.passed),
        )
        .with("eta", eta_node);
    margin_node(&mut diag, model.margin());
    diag.push("passed", passed);
    Ok(Outcome {
        report: Report {
            config: config_node(cfg, Some(&model)),
            results,
            diagnostics: diag,
        },
        passed,
    })
}

struct ScanRow {
    max_imag: Option<f64>,
    margin: Option<f64>,
    phase: Option<&'static str>,
    error: Option<String>,
}

fn scan_point(cfg: &RunConfig, param: &str, value: f64) -> ScanRow {
    let mut point = cfg.clone();
    point.params.insert(param.to_string(), format!("{value:?}"));
    let probe = Model::from_config(&point)
        .map_err(CliError::from)
        .and_then(|m| {
            let p = broken_phase_indicator(&m.quadratic, cfg.truncation, cfg.levels)?;
            Ok((m, p))
        });
    match probe {
        Ok((m, p)) => ScanRow {
            max_imag: Some(p.max_imag),
            margin: m.margin(),
            phase: Some(phase_name(&m.quadratic)),
            error: None,
        },
        Err(e) => ScanRow {
            max_imag: None,
            margin: None,
            phase: None,
            error: Some(e.to_string()),
        },
    }
}

/// Worker count from [`THREADS_ENV`], if set to a positive integer.
pub fn scan_threads() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
}

fn cmd_scan(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let range = cfg.scan.clone().expect("scan range validated");
    // Fails early on family conflicts that do not depend on the scanned value.
    let mut probe_cfg = cfg.clone();
    probe_cfg
        .params
        .insert(range.param.clone(), format!("{:?}", range.start));
    let family = Model::from_config(&probe_cfg).map(|m| m.family);
    if let Err(e) = &family {
        if e.0.contains("mix families")
            || e.0.contains("does not apply")
            || e.0.contains("unknown family")
        {
            return Err(e.clone().into());
        }
    }
    let values = range.values();
    let work = || -> Vec<ScanRow> {
        values
            .par_iter()
            .map(|&v| scan_point(cfg, &range.param, v))
            .collect()
    };
    let rows = match scan_threads() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start {n} scan workers: {e}")))?
            .install(work),
        None => work(),
    };

    let flagged = |r: &ScanRow| r.max_imag.is_some_and(|v| v > BROKEN_THRESHOLD);
    let mut results = Vec::with_capacity(rows.len());
    for (i, (v, r)) in values.iter().zip(&rows).enumerate() {
        let mut row = Node::obj()
            .with("index", i)
            .with(range.param.as_str(), *v)
            .with("max_imag", r.max_imag)
            .with("broken", r.max_imag.map(|_| flagged(r)))
            .with("phase", r.phase);
        margin_node(&mut row, r.margin);
        row.push("error", r.error.clone());
        results.push(row);
    }
    let first = rows.iter().position(flagged);
    let bracket = |i: Option<usize>| match i {
        Some(i) if i > 0 => Node::List(vec![Node::Float(values[i - 1]), Node::Float(values[i])]),
        _ => Node::Null,
    };
    let margin_change = rows
        .windows(2)
        .position(|w| match (w[0].margin, w[1].margin) {
            (Some(a), Some(b)) => (a > 0.0) != (b > 0.0),
            _ => false,
        });
    let mut diag = Node::obj()
        .with("param", range.param.as_str())
        .with("points", values.len())
        .with("threshold", BROKEN_THRESHOLD)
        .with("first_broken_index", first)
        .with("first_broken_value", first.map(|i| values[i]))
        .with("transition_bracket", bracket(first))
        .with("margin_sign_change", bracket(margin_change.map(|i| i + 1)))
        .with("errors", rows.iter().filter(|r| r.error.is_some()).count());
    if let Ok(f) = family {
        diag.push("family", f.name());
    }
    Ok(Outcome {
        report: Report {
            config: config_node(cfg, None),
            results,
            diagnostics: diag,
        },
        passed: true,
    })
}

fn non_normalizable(reason: impl Into<String>, margin: f64) -> CliError {
    CliError::from(crate::Error::NonNormalizable {
        reason: reason.into(),
        margin,
    })
}

fn cmd_wavefunction(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let model = Model::from_config(cfg)?;
    let n = cfg.level;
    let grid_for = |omega: f64| -> Result<Grid, CliError> {
        let half = cfg
            .half_width
            .unwrap_or(wavefun::DEFAULT_HALF_WIDTH / omega.sqrt());
        Ok(Grid::uniform(-half, half, cfg.points)?)
    };
    let margin = model.margin();
    let sample: WavefunctionSample = match model.family {
        Family::Sho => {
            let w = model.base_spacing() * 2.0;
            if w.im != 0.0 || !(w.re > 0.0) {
                return Err(non_normalizable("oscillator needs k > 0", w.re));
            }
            WavefunctionSample::hermite(n, w.re, &grid_for(w.re)?)?
        }
        Family::RathMallick
            if n == 0 && cfg.real("rm-beta").is_ok() && cfg.real("rm-alpha").is_ok() =>
        {
            let a = match cfg.real("rm-alpha")? {
                Some(a) => a,
                None => cfg.real("lambda")?.unwrap_or(0.0),
            };
            let b = cfg.real("rm-beta")?.unwrap_or(0.0);
            rm_ground_state(a, b, 0.0)?;
            let w = (1.0 - b) / (1.0 + a);
            let g = grid_for(w)?;
            let values = g
                .points()
                .iter()
                .map(|&x| rm_ground_state(a, b, x).map(|v| Complex64::new(v, 0.0)))
                .collect::<crate::Result<Vec<_>>>()?;
            WavefunctionSample::new(g, values, w, "transformed ground state")?
        }
        Family::Ahmed | Family::Gamma | Family::Gauge => {
            let w = model.base_spacing() * 2.0;
            if w.im != 0.0 || !(w.re > 0.0) {
                return Err(non_normalizable(
                    "base oscillator has no real frequency (broken phase)",
                    w.re,
                ));
            }
            if let Some(m) = margin.filter(|m| !(*m > 0.0)) {
                return Err(non_normalizable("gauged state is not square integrable", m));
            }
            let u = model.transform.expect("gauge families carry a transform");
            // p -> p + i g x comes from conjugating with exp(g x^2 / 2).
            let g = u.u21() * Complex64::new(0.0, -1.0);
            let phase = WeylPoly::monomial(2, 0, g * 0.5);
            WavefunctionSample::hermite(n, w.re, &grid_for(w.re)?)?.gauge(&phase)?
        }
        _ => {
            let h = model.oscillator.ok_or_else(|| {
                CliError::Config(format!(
                    "no position-space realization for family '{}'",
                    model.family.name()
                ))
            })?;
            let e = eigenvector_coefficients(&h, Branch::Plus, n / 2, n % 2)?;
            if !(e.omega > 0.0) {
                return Err(non_normalizable(
                    "critical frequency is not positive",
                    e.omega,
                ));
            }
            synthesize(&e, e.omega, &grid_for(e.omega)?)?
        }
    };
    let norm = sample.norm()?;
    let nodes = count_nodes(&sample);
    let results = sample
        .grid
        .points()
        .iter()
        .zip(&sample.values)
        .map(|(&x, &v)| Node::obj().with("x", x).with("psi", v))
        .collect();
    let mut diag = Node::obj()
        .with("family", model.family.name())
        .with("level", n)
        .with("omega", sample.omega)
        .with("provenance", sample.provenance.as_str())
        .with("norm", norm)
        .with("nodes", nodes.as_ref().ok().copied());
    if let Err(e) = nodes {
        diag.push("nodes_error", e.to_string());
    }
    margin_node(&mut diag, margin);
    Ok(Outcome {
        report: Report {
            config: config_node(cfg, Some(&model)),
            results,
            diagnostics: diag,
        },
        passed: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exec(args: &[&str]) -> Result<Outcome, CliError> {
        let mut full = vec!["simtrans"];
        full.extend_from_slice(args);
        execute(&parse_config(full).unwrap())
    }

    fn diag<'a>(o: &'a Outcome, key: &str) -> &'a Node {
        o.report.diagnostics.get(key).unwrap()
    }

    #[test]
    fn negative_values_parse() {
        let cfg = parse_config([
            "simtrans", "spectrum", "--h11", "0.5", "--h12", "0", "--h22", "-0.5",
        ])
        .unwrap();
        assert_eq!(cfg.params["h22"], "-0.5");
    }

    #[test]
    fn sho_spectrum() {
        let o = exec(&[
            "spectrum", "--h11", "0.5", "--h12", "0", "--h22", "0.5", "-n", "5",
        ])
        .unwrap();
        assert_eq!(o.report.results.len(), 5);
        assert_eq!(diag(&o, "max_deviation"), &Node::Float(0.0));
        assert_eq!(
            o.report.results[4].get("closed_form_plus"),
            Some(&Node::Complex(Complex64::new(4.5, 0.0)))
        );
    }

    #[test]
    fn broken_phase_is_reported() {
        let o = exec(&[
            "spectrum", "--h11", "0.5", "--h12", "0", "--h22", "-0.5", "-n", "3", "-N", "40",
        ])
        .unwrap();
        assert_eq!(diag(&o, "phase"), &Node::Str("broken".into()));
        assert!(o.passed);
    }

    #[test]
    fn identity_verifies() {
        let o = exec(&["verify", "-n", "5", "-N", "40"]).unwrap();
        assert!(o.passed);
    }

    #[test]
    fn scan_brackets_margin_sign_change() {
        let o = exec(&[
            "scan",
            "--rm-alpha",
            "0",
            "--param",
            "rm-beta",
            "--start",
            "0.5",
            "--stop",
            "1.5",
            "--step",
            "0.1",
            "-n",
            "4",
            "-N",
            "40",
        ])
        .unwrap();
        let Node::List(b) = diag(&o, "margin_sign_change") else {
            panic!()
        };
        let (Node::Float(lo), Node::Float(hi)) = (&b[0], &b[1]) else {
            panic!()
        };
        assert!(*lo < 1.0 && *hi >= 1.0 - 1e-12, "{lo} {hi}");
    }

    #[test]
    fn wavefunction_errors_map_to_config() {
        let e = exec(&["wavefunction", "--rm-alpha", "0.3", "--rm-beta", "1"]).unwrap_err();
        assert_eq!(e.exit_code(), EXIT_CONFIG);
        assert!(e.to_string().contains("non-normalizable"), "{e}");
    }

    #[test]
    fn sho_wavefunction_nodes() {
        let o = exec(&["wavefunction", "--level", "3", "--points", "1001"]).unwrap();
        assert_eq!(diag(&o, "nodes"), &Node::Int(3));
    }
}
