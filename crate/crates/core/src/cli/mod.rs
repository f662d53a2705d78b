//! Command-line front end: region parsing, computations, and CSV/JSON/SVG
//! reports.

pub mod compare;
pub mod output;
pub mod svg;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Error;
use crate::geometry::{AmbientDomain, SubregionSpec};
use crate::moments::{gram, has_closed_form, MomentMethod, MomentRequest, QuadratureOptions};
use crate::oracles::{
    ball_bounds, dilation_spectrum, horostrip_interval, lune_norm, offcenter_disc_spectrum, OracleKind, OracleResult,
};
use crate::schatten::{schatten_norm, trace_by_formula, TraceOptions};
use crate::toeplitz::{norm_from_sweep, sweep_with, SpectrumEstimate, DEFAULT_SWEEP};

use output::{json, Table};
use svg::{Plot, Rule, Series};

/// Environment variable capping the worker pool.
pub const THREADS_VAR: &str = "BERGMAN_LAB_THREADS";

const DEFAULT_SEED: u64 = 2024;
const DEFAULT_SPECTRUM_ORDER: usize = 32;
const DEFAULT_SCHATTEN_ORDER: usize = 64;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config file, or region text; exit status 2.
    #[error("{0}")]
    Config(String),
    /// Failure inside a computation; exit status 1.
    #[error(transparent)]
    Compute(#[from] Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Compute(Error::Parse(_)) => 2,
            _ => 1,
        }
    }

    /// Structured JSON for stderr.
    pub fn to_json(&self) -> String {
        match self {
            CliError::Compute(e) => e.to_json(),
            CliError::Config(msg) => serde_json::json!({ "error": "config", "message": msg }).to_string(),
            CliError::Io(e) => serde_json::json!({ "error": "io", "message": e.to_string() }).to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Eigenvalues of one Gram compression.
    Spectrum,
    /// Lower bound for the operator norm from a truncation sweep.
    Norm,
    /// Trace by the kernel integral over the region.
    Trace,
    /// Schatten p-norm of a compression.
    Schatten,
    /// Closed-form or numerically maximized oracle values.
    Oracle,
    /// Numeric results against oracles, with pass/fail per tolerance.
    Compare,
    /// Spectra at a list of truncation orders.
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// `disc`, `ball:N`, `bidisc`, `polydisc:r1,r2,..` or JSON.
    #[arg(long)]
    pub ambient: Option<String>,
    /// Region JSON `{"kind": .., "params": {..}}` or a shorthand
    /// (`ideal-triangle`, `horodisc:ρ`, `strip:ρ1,ρ2`, `lune:a,b`,
    /// `dilated:ρ`, `disc:x,y,r`).
    #[arg(long)]
    pub region: Option<String>,
    /// Truncation orders, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub orders: Option<Vec<usize>>,
    /// Schatten exponent.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub rho1: Option<f64>,
    #[arg(long)]
    pub rho2: Option<f64>,
    #[arg(long, value_enum)]
    pub output: Option<OutputFormat>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for randomized sampling.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Quadrature cell budget.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Quadrature refinement depth.
    #[arg(long)]
    pub depth: Option<u32>,
    /// Oracle or comparison case.
    #[arg(long)]
    pub case: Option<String>,
    /// JSON config file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Parser)]
#[command(name = "bergman-lab", version, about = "Spectra, norms and traces of Toeplitz operators with indicator symbols on Bergman spaces")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative target of the trace formula.
    pub trace: Option<f64>,
    /// Absolute target of quadrature Grams.
    pub quadrature: Option<f64>,
}

/// Contents of a `--config` file. Regions and ambient domains may be given
/// as JSON values or as shorthand strings.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub ambient: Option<serde_json::Value>,
    pub region: Option<serde_json::Value>,
    pub orders: Option<Vec<usize>>,
    pub p: Option<f64>,
    pub rho: Option<f64>,
    pub rho1: Option<f64>,
    pub rho2: Option<f64>,
    pub output: Option<OutputFormat>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub budget: Option<usize>,
    pub depth: Option<u32>,
    pub case: Option<String>,
    pub tolerances: Tolerances,
}

/// Fully resolved run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub ambient: AmbientDomain,
    pub region: Option<SubregionSpec>,
    pub orders: Vec<usize>,
    pub p: Option<f64>,
    pub rho: Option<f64>,
    pub rho1: Option<f64>,
    pub rho2: Option<f64>,
    pub output: OutputFormat,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub budget: Option<usize>,
    pub depth: Option<u32>,
    pub case: Option<String>,
    pub tolerances: Tolerances,
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn value_text(v: serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s,
        other => other.to_string(),
    }
}

impl RunConfig {
    pub fn resolve(command: Command, flags: Flags) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => read_config(path)?,
            None => FileConfig::default(),
        };
        let ambient_text = flags.ambient.or(file.ambient.map(value_text));
        let ambient = match ambient_text {
            Some(t) => AmbientDomain::parse_shorthand(&t).map_err(config_err)?,
            None => AmbientDomain::UnitDisc,
        };
        let region = flags
            .region
            .or(file.region.map(value_text))
            .map(|t| SubregionSpec::parse(&t).map_err(config_err))
            .transpose()?;
        Ok(RunConfig {
            command,
            ambient,
            region,
            orders: flags.orders.or(file.orders).unwrap_or_default(),
            p: flags.p.or(file.p),
            rho: flags.rho.or(file.rho),
            rho1: flags.rho1.or(file.rho1),
            rho2: flags.rho2.or(file.rho2),
            output: flags.output.or(file.output).unwrap_or(OutputFormat::Json),
            out: flags.out.or(file.out),
            seed: flags.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            budget: flags.budget.or(file.budget),
            depth: flags.depth.or(file.depth),
            case: flags.case.or(file.case),
            tolerances: file.tolerances,
        })
    }

    fn region(&self) -> Result<&SubregionSpec, CliError> {
        self.region
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("`{}` needs --region", self.command_name())))
    }

    fn command_name(&self) -> String {
        self.command.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
    }

    fn need(&self, value: Option<f64>, flag: &str) -> Result<f64, CliError> {
        value.ok_or_else(|| CliError::Config(format!("`{}` needs --{flag}", self.command_name())))
    }

    fn single_order(&self, default: usize) -> usize {
        self.orders.last().copied().unwrap_or(default)
    }

    /// Quadrature settings apply only to regions without a closed form.
    fn method(&self, region: &SubregionSpec) -> MomentMethod {
        let tuned = self.budget.is_some() || self.depth.is_some() || self.tolerances.quadrature.is_some();
        if !tuned || has_closed_form(region, &self.ambient) {
            return MomentMethod::Auto;
        }
        let mut opts = QuadratureOptions::default().with_tol(1e-8);
        if let Some(b) = self.budget {
            opts = opts.with_budget(b);
        }
        if let Some(d) = self.depth {
            opts = opts.with_depth(d);
        }
        if let Some(t) = self.tolerances.quadrature {
            opts = opts.with_tol(t);
        }
        MomentMethod::Quadrature(opts)
    }

    fn trace_options(&self) -> TraceOptions {
        let mut opts = TraceOptions::default();
        if let Some(t) = self.tolerances.trace {
            opts.tol = t;
        }
        opts
    }
}

fn read_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Bytes to write, and whether every comparison passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub bytes: Vec<u8>,
    pub passed: bool,
}

impl Report {
    fn ok(bytes: Vec<u8>) -> Self {
        Report { bytes, passed: true }
    }
}

pub fn run(config: &RunConfig) -> Result<Report, CliError> {
    match config.command {
        Command::Spectrum => spectrum(config),
        Command::Sweep => sweep(config),
        Command::Norm => norm(config),
        Command::Trace => trace(config),
        Command::Schatten => schatten(config),
        Command::Oracle => oracle(config),
        Command::Compare => compare(config),
    }
}

fn no_svg(config: &RunConfig) -> Result<(), CliError> {
    if config.output == OutputFormat::Svg {
        return Err(CliError::Config(format!("`{}` has no SVG output", config.command_name())));
    }
    Ok(())
}

/// Oracle interval drawn on plots, when the region has one.
fn oracle_for(ambient: &AmbientDomain, region: &SubregionSpec) -> Option<OracleResult> {
    let n = match ambient {
        AmbientDomain::UnitDisc => 1,
        AmbientDomain::UnitBall { n } => *n,
        AmbientDomain::Polydisc { .. } => return None,
    };
    match region {
        SubregionSpec::DilatedCopy { rho } => dilation_spectrum(n, *rho).ok(),
        _ if n != 1 => None,
        SubregionSpec::Disc { .. } => {
            let (c, r) = region.as_disc()?;
            offcenter_disc_spectrum(c, r).ok()
        }
        SubregionSpec::HorocyclicStrip { rho1, rho2, .. } => horostrip_interval(*rho1, *rho2).ok(),
        SubregionSpec::HypercyclicLune { .. } => {
            let (a, b) = region.lune_to_wedge().ok()?;
            lune_norm(a / std::f64::consts::PI, b / std::f64::consts::PI).ok()
        }
        _ => None,
    }
}

fn rules(oracle: Option<&OracleResult>) -> Vec<Rule> {
    let Some(o) = oracle else { return Vec::new() };
    match o.kind {
        OracleKind::EigenvalueSequence { first, .. } => vec![Rule {
            label: "oracle top".into(),
            y: first,
        }],
        OracleKind::Interval { lo, hi } => vec![
            Rule {
                label: "oracle lo".into(),
                y: lo,
            },
            Rule {
                label: "oracle hi".into(),
                y: hi,
            },
        ],
        OracleKind::NormBounds { lower, upper } => vec![
            Rule {
                label: "lower".into(),
                y: lower,
            },
            Rule {
                label: "upper".into(),
                y: upper,
            },
        ],
    }
}

fn spectra(config: &RunConfig, orders: &[usize]) -> Result<Vec<SpectrumEstimate>, CliError> {
    let region = config.region()?;
    Ok(sweep_with(&config.ambient, region, orders, &config.method(region))?)
}

fn eigen_plot(config: &RunConfig, spectra: &[SpectrumEstimate], title: &str) -> Result<Vec<u8>, CliError> {
    let region = config.region()?;
    let plot = Plot {
        title: format!("{title}: {}", region.kind_name()),
        x_label: "index".into(),
        y_label: "eigenvalue".into(),
        series: spectra
            .iter()
            .map(|s| Series {
                label: format!("N={}", s.order),
                points: s.eigenvalues.iter().enumerate().map(|(k, l)| (k as f64, *l)).collect(),
            })
            .collect(),
        rules: rules(oracle_for(&config.ambient, region).as_ref()),
    };
    Ok(plot.render().into_bytes())
}

fn spectrum(config: &RunConfig) -> Result<Report, CliError> {
    let order = config.single_order(DEFAULT_SPECTRUM_ORDER);
    let s = spectra(config, &[order])?.remove(0);
    let bytes = match config.output {
        OutputFormat::Json => json(&s)?,
        OutputFormat::Svg => eigen_plot(config, std::slice::from_ref(&s), "spectrum")?,
        OutputFormat::Csv => {
            let mut t = Table::new(&["index", "eigenvalue", "order", "gram_error", "solver_residual"]);
            for (k, l) in s.eigenvalues.iter().enumerate() {
                t.push(vec![k.into(), (*l).into(), s.order.into(), s.gram_error.into(), s.solver_residual.into()]);
            }
            t.to_csv()?
        }
    };
    Ok(Report::ok(bytes))
}

fn sweep_orders(config: &RunConfig) -> Vec<usize> {
    if config.orders.is_empty() {
        DEFAULT_SWEEP.to_vec()
    } else {
        config.orders.clone()
    }
}

fn sweep(config: &RunConfig) -> Result<Report, CliError> {
    let all = spectra(config, &sweep_orders(config))?;
    let bytes = match config.output {
        OutputFormat::Json => json(&all)?,
        OutputFormat::Svg => eigen_plot(config, &all, "sweep")?,
        OutputFormat::Csv => {
            let mut t = Table::new(&["order", "top", "bottom", "gram_error", "solver_residual"]);
            for s in &all {
                t.push(vec![
                    s.order.into(),
                    s.top().into(),
                    s.bottom().into(),
                    s.gram_error.into(),
                    s.solver_residual.into(),
                ]);
            }
            t.to_csv()?
        }
    };
    Ok(Report::ok(bytes))
}

fn norm(config: &RunConfig) -> Result<Report, CliError> {
    let all = spectra(config, &sweep_orders(config))?;
    let est = norm_from_sweep(&all);
    let bytes = match config.output {
        OutputFormat::Json => json(&est)?,
        OutputFormat::Svg => {
            let region = config.region()?;
            let plot = Plot {
                title: format!("norm sweep: {}", region.kind_name()),
                x_label: "order".into(),
                y_label: "top eigenvalue".into(),
                series: vec![Series {
                    label: "top".into(),
                    points: est.history.iter().map(|h| (h.order as f64, h.top)).collect(),
                }],
                rules: rules(oracle_for(&config.ambient, region).as_ref()),
            };
            plot.render().into_bytes()
        }
        OutputFormat::Csv => {
            let mut t = Table::new(&["order", "top", "bottom", "difference"]);
            for (i, h) in est.history.iter().enumerate() {
                let diff = i.checked_sub(1).map(|j| est.successive_differences[j]);
                t.push(vec![h.order.into(), h.top.into(), h.bottom.into(), diff.into()]);
            }
            t.to_csv()?
        }
    };
    Ok(Report::ok(bytes))
}

fn trace(config: &RunConfig) -> Result<Report, CliError> {
    no_svg(config)?;
    let t = trace_by_formula(config.region()?, &config.ambient, &config.trace_options())?;
    let bytes = match config.output {
        OutputFormat::Csv => {
            let mut table = Table::new(&["quantity", "value"]);
            table.push(vec!["value".into(), t.value.into()]);
            table.push(vec!["error_estimate".into(), t.error_estimate.into()]);
            table.push(vec!["tail_bound".into(), t.tail_bound.into()]);
            for (k, c) in t.ring_contributions.iter().enumerate() {
                table.push(vec![format!("ring_{}", k + 3).into(), (*c).into()]);
            }
            table.to_csv()?
        }
        _ => json(&t)?,
    };
    Ok(Report::ok(bytes))
}

fn schatten(config: &RunConfig) -> Result<Report, CliError> {
    no_svg(config)?;
    let region = config.region()?;
    let p = config.p.unwrap_or(1.0);
    let order = config.single_order(DEFAULT_SCHATTEN_ORDER);
    let request = MomentRequest::new(config.ambient.clone(), region.clone(), order).with_method(config.method(region));
    let mut report = schatten_norm(&gram(&request)?, p)?;
    if p == 1.0 && config.ambient == AmbientDomain::UnitDisc {
        report.value_trace_formula = Some(trace_by_formula(region, &config.ambient, &config.trace_options())?.value);
    }
    let bytes = match config.output {
        OutputFormat::Csv => {
            let mut t = Table::new(&[
                "p",
                "order",
                "value_matrix",
                "value_matrix_power",
                "value_trace_formula",
                "tail_bound",
            ]);
            t.push(vec![
                report.p.into(),
                report.order.into(),
                report.value_matrix.into(),
                report.value_matrix_power.into(),
                report.value_trace_formula.into(),
                report.tail_bound.into(),
            ]);
            t.to_csv()?
        }
        _ => json(&report)?,
    };
    Ok(Report::ok(bytes))
}

/// Names accepted by `oracle --case`.
pub const ORACLE_CASES: [&str; 5] = ["dilation", "offcenter", "horostrip", "lune", "ball"];

fn oracle(config: &RunConfig) -> Result<Report, CliError> {
    no_svg(config)?;
    let case = config
        .case
        .as_deref()
        .ok_or_else(|| CliError::Config(format!("`oracle` needs --case, one of {ORACLE_CASES:?}")))?;
    let dim = || -> Result<usize, CliError> {
        match config.ambient {
            AmbientDomain::UnitDisc => Ok(1),
            AmbientDomain::UnitBall { n } => Ok(n),
            _ => Err(CliError::Config("this oracle needs a disc or ball ambient domain".into())),
        }
    };
    let result = match case {
        "dilation" => dilation_spectrum(dim()?, config.need(config.rho, "rho")?)?,
        "offcenter" => {
            let (c, r) = config
                .region()?
                .as_disc()
                .ok_or_else(|| CliError::Config("`offcenter` needs a Disc region".into()))?;
            offcenter_disc_spectrum(c, r)?
        }
        "horostrip" => horostrip_interval(config.need(config.rho1, "rho1")?, config.need(config.rho2, "rho2")?)?,
        "lune" => {
            let (a, b) = config.region()?.lune_to_wedge()?;
            lune_norm(a / std::f64::consts::PI, b / std::f64::consts::PI)?
        }
        "ball" => ball_bounds(dim()?, 1.0, config.need(config.rho1, "rho1")?, config.need(config.rho2, "rho2")?)?,
        other => {
            return Err(CliError::Config(format!(
                "unknown oracle case `{other}`, expected one of {ORACLE_CASES:?}"
            )))
        }
    };
    let bytes = match config.output {
        OutputFormat::Csv => {
            let mut t = Table::new(&["quantity", "value"]);
            let pairs: Vec<(&str, f64)> = match result.kind {
                OracleKind::EigenvalueSequence { first, ratio } => vec![("first", first), ("ratio", ratio)],
                OracleKind::Interval { lo, hi } => vec![("lo", lo), ("hi", hi)],
                OracleKind::NormBounds { lower, upper } => vec![("lower", lower), ("upper", upper)],
            };
            for (name, v) in pairs {
                t.push(vec![name.into(), v.into()]);
            }
            t.to_csv()?
        }
        _ => json(&result)?,
    };
    Ok(Report::ok(bytes))
}

#[derive(Serialize)]
struct CompareDocument<'a> {
    passed: bool,
    checks: &'a [compare::Check],
}

fn compare(config: &RunConfig) -> Result<Report, CliError> {
    no_svg(config)?;
    let case = config.case.as_deref();
    if let Some(c) = case {
        if c != "all" && !compare::case_names().contains(&c) {
            return Err(CliError::Config(format!(
                "unknown comparison case `{c}`, expected `all` or one of {:?}",
                compare::case_names()
            )));
        }
    }
    let checks = compare::run(case, config.seed)?;
    let passed = checks.iter().all(|c| c.pass);
    let bytes = match config.output {
        OutputFormat::Csv => {
            let mut t = Table::new(&["case", "quantity", "relation", "numeric", "oracle", "tolerance", "pass"]);
            for c in &checks {
                t.push(vec![
                    c.case.into(),
                    c.quantity.clone().into(),
                    c.relation.name().into(),
                    c.numeric.into(),
                    c.oracle.into(),
                    c.tolerance.into(),
                    c.pass.into(),
                ]);
            }
            t.to_csv()?
        }
        _ => json(&CompareDocument {
            passed,
            checks: &checks,
        })?,
    };
    Ok(Report { bytes, passed })
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(text) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_VAR} must be a positive integer, got `{text}`")))?;
    // a pool may already exist when called twice in one process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    configure_threads()?;
    let config = RunConfig::resolve(cli.command, cli.flags)?;
    let report = run(&config)?;
    match &config.out {
        Some(path) => std::fs::write(path, &report.bytes)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(&report.bytes)?;
            stdout.flush()?;
        }
    }
    Ok(report.passed)
}

/// Parses `args` (program name first), runs, and maps the outcome to an
/// exit status: 0 on success, 1 on computation failure or a failed
/// comparison, 2 on unusable input.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn main() -> ExitCode {
    main_with(std::env::args_os())
}
