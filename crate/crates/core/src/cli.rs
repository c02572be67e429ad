//! Batch front-end: parses flags or a JSON config into one resolved
//! [`RunConfig`], runs the requested study and writes CSV or JSON tables.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 partial results.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::appendix::{bound_check, equivalence_sweep, reduced_diffmat_spectrum, set_distance};
use crate::error::Error;
use crate::laguerre::{family_rule, NodeFamily};
use crate::models::{continue_equilibrium, hopf_curve_2param, BifurcationKind, ContinuationSettings, ModelSpec};
use crate::psd::QuadMode;
use crate::spectra::{convergence_study, StudySetup, TestCase};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_PARTIAL: i32 = 4;

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "IDEPSD_WORKERS";

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(e) => write!(f, "numerical error: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(m) | Error::InvalidParameter(m) => CliError::Config(m),
            other => CliError::Numerical(other),
        }
    }
}

fn config_err<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Config(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Nodes,
    Converge,
    Oracle,
    Bifurcate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    ReducedSpectrum,
    Bounds,
    Equivalence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FamilyArg {
    Zeros,
    Extrema,
}

impl From<FamilyArg> for NodeFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Zeros => NodeFamily::LaguerreZeros,
            FamilyArg::Extrema => NodeFamily::LaguerreExtrema,
        }
    }
}

impl From<NodeFamily> for FamilyArg {
    fn from(f: NodeFamily) -> Self {
        match f {
            NodeFamily::LaguerreZeros => FamilyArg::Zeros,
            NodeFamily::LaguerreExtrema => FamilyArg::Extrema,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum QuadArg {
    Gauss,
    Adaptive,
}

impl From<QuadArg> for QuadMode {
    fn from(q: QuadArg) -> Self {
        match q {
            QuadArg::Gauss => QuadMode::Gauss,
            QuadArg::Adaptive => QuadMode::Adaptive,
        }
    }
}

/// Every knob of every command. Unset fields are filled in by
/// [`RunConfig::resolve`], and the resolved config is echoed into each
/// output file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<CommandKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyArg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad: Option<QuadArg>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<Suite>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    /// Complex `μ` of the bounds suite as `[re, im]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// Values of `m` for a Hopf curve; switches `bifurcate` to curve mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detect_tol: Option<f64>,
}

#[derive(Parser, Debug)]
#[command(name = "idepsd", version, about = "Pseudospectral studies of delay and renewal equations with unbounded delay")]
pub struct Cli {
    /// JSON run configuration; replaces the subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (a prefix for `bifurcate`); stdout when absent.
    #[arg(long, short, global = true)]
    pub output: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Collocation nodes and quadrature weights, standard and scaled.
    Nodes(NodesArgs),
    /// Eigenvalue convergence for one of the linear test cases.
    Converge(ConvergeArgs),
    /// Scalar collocation oracle suites.
    Oracle(OracleArgs),
    /// Equilibrium continuation with branch point and Hopf detection.
    Bifurcate(BifurcateArgs),
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<T>().map_err(|_| format!("cannot parse '{p}'")))
        .collect()
}

/// `a:b` or `a:b:step` for a list, or comma-separated values.
fn parse_range_list(s: &str) -> Result<Vec<f64>, String> {
    let s = s.strip_prefix("m=").unwrap_or(s);
    if !s.contains(':') {
        return parse_list(s);
    }
    let p: Vec<f64> = s.split(':').map(|x| x.parse::<f64>().map_err(|_| format!("cannot parse '{x}'"))).collect::<Result<_, _>>()?;
    let (a, b, h) = match p.as_slice() {
        [a, b] => (*a, *b, 0.5),
        [a, b, h] if *h > 0.0 => (*a, *b, *h),
        _ => return Err(format!("bad range '{s}'")),
    };
    let k = ((b - a) / h + 1e-9).floor() as usize;
    Ok((0..=k).map(|i| a + h * i as f64).collect())
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let v: Vec<f64> = parse_list(&s.replace(':', ","))?;
    match v.as_slice() {
        [a, b] => Ok([*a, *b]),
        _ => Err(format!("expected two numbers, got '{s}'")),
    }
}

#[derive(Args, Debug)]
pub struct NodesArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub rho1: f64,
}

#[derive(Args, Debug)]
pub struct ConvergeArgs {
    /// Test case a1, a2, b, c, d, e, f or g.
    #[arg(long)]
    pub case: String,
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long)]
    pub rho1: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    /// Comma-separated ascending list of N.
    #[arg(long, value_parser = parse_list::<usize>)]
    pub n: std::vec::Vec<usize>,
    #[arg(long, value_enum)]
    pub quad: Option<QuadArg>,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    #[arg(long, value_parser = parse_list::<usize>)]
    pub n: Option<std::vec::Vec<usize>>,
    /// Real part of μ for the bounds suite.
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu_im: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub count: Option<usize>,
}

#[derive(Args, Debug)]
pub struct BifurcateArgs {
    /// `blowflies` or `beretta-breda`.
    #[arg(long)]
    pub model: String,
    /// Free parameter; defaults to `beta0` or `tau`.
    #[arg(long)]
    pub param: Option<String>,
    /// Parameter interval `a:b`.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub range: Option<[f64; 2]>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    /// Hopf curve over `m`, as `m=a:b[:step]` or a comma list.
    #[arg(long, value_parser = parse_range_list)]
    pub curve: Option<std::vec::Vec<f64>>,
    #[arg(long)]
    pub detect_tol: Option<f64>,
    #[arg(long)]
    pub beta0: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub delta_a: Option<f64>,
    #[arg(long)]
    pub delta_j: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
}

impl Command {
    fn into_config(self) -> RunConfig {
        let mut c = RunConfig::default();
        match self {
            Command::Nodes(a) => {
                c.command = Some(CommandKind::Nodes);
                c.family = Some(a.family);
                c.n = Some(vec![a.n]);
                c.rho1 = Some(a.rho1);
            }
            Command::Converge(a) => {
                c.command = Some(CommandKind::Converge);
                c.case = Some(a.case);
                c.family = Some(a.family);
                c.rho1 = a.rho1;
                c.rho = a.rho;
                c.n = Some(a.n);
                c.quad = a.quad;
            }
            Command::Oracle(a) => {
                c.command = Some(CommandKind::Oracle);
                c.suite = Some(a.suite);
                c.family = a.family;
                c.n = a.n;
                c.mu = a.mu.map(|re| [re, a.mu_im.unwrap_or(0.0)]);
                c.seed = a.seed;
                c.count = a.count;
            }
            Command::Bifurcate(a) => {
                c.command = Some(CommandKind::Bifurcate);
                c.model = Some(a.model);
                c.param = a.param;
                c.range = a.range;
                c.steps = a.steps;
                c.n = a.n.map(|n| vec![n]);
                c.family = a.family;
                c.curve = a.curve;
                c.detect_tol = a.detect_tol;
                let named = [
                    ("beta0", a.beta0),
                    ("mu", a.mu),
                    ("delta_a", a.delta_a),
                    ("delta_j", a.delta_j),
                    ("a", a.a),
                    ("b", a.b),
                    ("m", a.m),
                    ("tau", a.tau),
                ];
                for (k, v) in named {
                    if let Some(v) = v {
                        c.params.insert(k.to_string(), v);
                    }
                }
            }
        }
        c
    }
}

fn default_model(name: &str) -> Result<ModelSpec, CliError> {
    match name {
        "blowflies" => {
            let mu: f64 = 2.0;
            Ok(ModelSpec::Blowflies { beta0: mu * mu.exp(), mu })
        }
        "beretta-breda" => Ok(ModelSpec::beretta_breda_default(7.0, 1.0)),
        other => config_err(format!("unknown model '{other}'")),
    }
}

/// Model with the configured parameters applied in a fixed order.
fn build_model(cfg: &RunConfig) -> Result<ModelSpec, CliError> {
    let name = cfg.model.as_deref().unwrap_or("");
    let mut model = default_model(name)?;
    for name in model.param_names() {
        if let Some(&v) = cfg.params.get(*name) {
            model = model.with_param(name, v)?;
        }
    }
    for k in cfg.params.keys() {
        if !model.param_names().contains(&k.as_str()) {
            return config_err(format!("{} has no parameter '{k}'", model.name()));
        }
    }
    Ok(model)
}

impl RunConfig {
    /// Fills every unset field with its documented default and validates the
    /// combination before any computation runs.
    pub fn resolve(mut self) -> Result<RunConfig, CliError> {
        let Some(cmd) = self.command else {
            return config_err("missing 'command'");
        };
        if self.format.is_none() {
            self.format = Some(Format::Csv);
        }
        match cmd {
            CommandKind::Nodes => {
                if self.family.is_none() || self.rho1.is_none() {
                    return config_err("nodes needs family and rho1");
                }
                match self.n.as_deref() {
                    Some([n]) if (1..=crate::laguerre::MAX_NODES).contains(n) => {}
                    _ => return config_err("nodes needs a single N in 1..=200"),
                }
            }
            CommandKind::Converge => {
                let case = self.case.as_deref().and_then(TestCase::parse).ok_or_else(|| CliError::Config("unknown or missing case".into()))?;
                if self.family.is_none() {
                    return config_err("converge needs family");
                }
                let (r1, _) = case.default_rates();
                let rho1 = *self.rho1.get_or_insert(r1);
                if self.rho.is_none() {
                    self.rho = Some(if case.is_re() { case.mu() } else { rho1 });
                }
                self.quad.get_or_insert(QuadArg::Gauss);
                let n = self.n.as_deref().unwrap_or(&[]);
                if n.is_empty() || n.windows(2).any(|w| w[0] >= w[1]) || n[0] == 0 || n[n.len() - 1] > crate::laguerre::MAX_NODES {
                    return config_err("N must be a nonempty strictly ascending list of sizes in 1..=200");
                }
            }
            CommandKind::Oracle => {
                let suite = self.suite.ok_or_else(|| CliError::Config("oracle needs suite".into()))?;
                match suite {
                    Suite::ReducedSpectrum => {
                        self.family.get_or_insert(FamilyArg::Zeros);
                        self.n.get_or_insert_with(|| (1..=10).collect());
                    }
                    Suite::Bounds => {
                        self.family.get_or_insert(FamilyArg::Zeros);
                        self.mu.get_or_insert([-1.0, 0.0]);
                        self.n.get_or_insert_with(|| (2..=30).collect());
                        if self.n.as_ref().is_some_and(|n| n.iter().any(|&k| k == 0 || k > crate::appendix::MAX_RECURRENCE_N)) {
                            return config_err("bounds suite needs 1 <= N <= 30");
                        }
                    }
                    Suite::Equivalence => {
                        self.seed.get_or_insert(7);
                        self.count.get_or_insert(200);
                    }
                }
                if self.n.as_ref().is_some_and(|n| n.contains(&0)) {
                    return config_err("N must be positive");
                }
            }
            CommandKind::Bifurcate => {
                let model = build_model(&self)?;
                self.family.get_or_insert(FamilyArg::Extrema);
                self.n.get_or_insert(vec![20]);
                if self.n.as_ref().map(|v| v.len()) != Some(1) || self.n.as_ref().is_some_and(|v| v[0] == 0) {
                    return config_err("bifurcate needs a single positive N");
                }
                self.detect_tol.get_or_insert(1e-10);
                let (param, range, steps) = match model {
                    ModelSpec::Blowflies { mu, .. } => {
                        let e = mu * mu.exp();
                        ("beta0", [0.5 * e, 15.0 * e], 60)
                    }
                    ModelSpec::BerettaBreda { .. } => ("tau", [0.5, 6.0], 40),
                };
                if self.curve.is_some() {
                    if !matches!(model, ModelSpec::BerettaBreda { .. }) {
                        return config_err("a Hopf curve is only available for beretta-breda");
                    }
                    if self.param.as_deref().is_some_and(|p| p != "tau") {
                        return config_err("a Hopf curve runs in tau");
                    }
                }
                let p = self.param.get_or_insert_with(|| param.to_string()).clone();
                model.param(&p)?;
                let r = *self.range.get_or_insert(range);
                if !(r[0].is_finite() && r[1].is_finite()) || r[0] == r[1] {
                    return config_err("range must be two distinct finite numbers");
                }
                if *self.steps.get_or_insert(steps) < 2 {
                    return config_err("steps must be at least 2");
                }
                self.params = model.param_names().iter().map(|k| (k.to_string(), model.param(k).expect("known"))).collect();
            }
        }
        Ok(self)
    }
}

/// A named table; cells are JSON values so CSV and JSON share one source.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or_else(|| Value::String(format!("{x:?}")))
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => {
            if s.contains([',', '"', '\n']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.clone()
            }
        }
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => format!("{x:?}"),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}

fn render_csv(cfg: &RunConfig, t: &Table) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# {}", serde_json::to_string(cfg).expect("config serializes"));
    s.push_str(&t.columns.join(","));
    s.push('\n');
    for r in &t.rows {
        let line: Vec<String> = r.iter().map(cell).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

fn render_json(cfg: &RunConfig, t: &Table) -> String {
    let rows: Vec<Value> = t
        .rows
        .iter()
        .map(|r| Value::Object(t.columns.iter().map(|c| c.to_string()).zip(r.iter().cloned()).collect()))
        .collect();
    let mut s = serde_json::to_string_pretty(&json!({ "config": cfg, "table": t.name, "rows": rows })).expect("serializes");
    s.push('\n');
    s
}

/// Result of a run: tables plus whether some items failed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub tables: Vec<Table>,
    pub partial: bool,
}

fn fam(cfg: &RunConfig) -> NodeFamily {
    cfg.family.expect("resolved").into()
}

fn run_nodes(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let n = cfg.n.as_ref().expect("resolved")[0];
    let rho1 = cfg.rho1.expect("resolved");
    if !(rho1 > 0.0 && rho1.is_finite()) {
        return config_err("rho1 must be positive");
    }
    let rule = family_rule(fam(cfg), n)?;
    let rows = (0..rule.nodes.len())
        .map(|j| {
            let t = rule.nodes[j];
            vec![
                json!(j),
                num(t),
                num(rule.weights[j]),
                num(-t / (2.0 * rho1)),
                num(rule.scaled_weights[j] / (2.0 * rho1)),
            ]
        })
        .collect();
    Ok(RunOutput {
        tables: vec![Table {
            name: "nodes",
            columns: vec!["index", "t", "weight", "theta", "mapped_weight"],
            rows,
        }],
        partial: false,
    })
}

fn run_converge(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let case = TestCase::parse(cfg.case.as_deref().expect("resolved")).expect("resolved");
    let setup = StudySetup {
        case,
        family: fam(cfg),
        rho1: cfg.rho1.expect("resolved"),
        rho: cfg.rho.expect("resolved"),
        mode: cfg.quad.expect("resolved").into(),
    };
    let records = convergence_study(&setup, cfg.n.as_ref().expect("resolved"));
    let ok = records.iter().filter(|r| r.error.is_none()).count();
    if ok == 0 {
        let msg = records.first().and_then(|r| r.error.clone()).unwrap_or_default();
        return Err(CliError::Numerical(Error::NoConvergence(msg)));
    }
    let rows = records
        .iter()
        .map(|r| {
            vec![
                json!(r.case),
                json!(r.family.as_str()),
                num(r.rho1),
                num(r.rho),
                json!(r.quad_mode.as_str()),
                json!(r.n),
                num(r.abs_error),
                num(r.eigfun_error),
                num(r.matched_lambda.re),
                num(r.matched_lambda.im),
                num(r.d_n),
                json!(r.matches.len()),
                r.error.clone().map(Value::String).unwrap_or(Value::Null),
            ]
        })
        .collect();
    Ok(RunOutput {
        tables: vec![Table {
            name: "convergence",
            columns: vec![
                "case",
                "family",
                "rho1",
                "rho",
                "quad_mode",
                "N",
                "abs_error",
                "eigfun_error",
                "matched_lambda_re",
                "matched_lambda_im",
                "d_n",
                "matched_roots",
                "error",
            ],
            rows,
        }],
        // per-N failures are recorded in the error column
        partial: false,
    })
}

fn run_oracle(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let suite = cfg.suite.expect("resolved");
    let mut failures = 0usize;
    let table = match suite {
        Suite::ReducedSpectrum => {
            let family = fam(cfg);
            let mut rows = vec![];
            for &n in cfg.n.as_ref().expect("resolved") {
                let r = reduced_diffmat_spectrum(n, family)?;
                let dist = set_distance(&r.computed.eigenvalues, &r.predicted);
                let re_half = r.computed.eigenvalues.iter().map(|z| (z.re - 0.5).abs()).fold(0.0, f64::max);
                let cp = r
                    .charpoly_samples
                    .iter()
                    .map(|(_, d, m)| (d - m).norm() / m.norm().max(1.0))
                    .fold(0.0, f64::max);
                rows.push(vec![json!(family.as_str()), json!(n), num(dist), num(re_half), num(cp), num(r.trace), num(r.det)]);
            }
            Table {
                name: "reduced_spectrum",
                columns: vec!["family", "N", "set_distance", "max_abs_re_minus_half", "charpoly_rel_error", "trace", "det"],
                rows,
            }
        }
        Suite::Bounds => {
            let family = fam(cfg);
            let [re, im] = cfg.mu.expect("resolved");
            let mu = Complex64::new(re, im);
            let mut rows = vec![];
            for &n in cfg.n.as_ref().expect("resolved") {
                let r = bound_check(mu, n, family)?;
                rows.push(vec![
                    num(re),
                    num(im),
                    json!(family.as_str()),
                    json!(n),
                    num(r.measured),
                    num(r.tail),
                    num(r.bound),
                    num(r.measured / r.bound),
                    num(r.log_rate),
                ]);
            }
            Table {
                name: "bounds",
                columns: vec!["mu_re", "mu_im", "family", "N", "measured", "tail", "bound", "ratio", "log_rate"],
                rows,
            }
        }
        Suite::Equivalence => {
            let rows = equivalence_sweep(cfg.seed.expect("resolved"), cfg.count.expect("resolved"))
                .into_iter()
                .enumerate()
                .map(|(i, r)| match r {
                    Ok(r) => vec![
                        json!(i),
                        num(r.mu.re),
                        num(r.mu.im),
                        json!(r.n),
                        json!(r.family.as_str()),
                        num(r.weighted_residual),
                        num(r.plain_residual),
                        num(r.condition),
                        Value::Null,
                    ],
                    Err(e) => {
                        failures += 1;
                        let mut row = vec![json!(i)];
                        row.extend(std::iter::repeat_n(Value::Null, 7));
                        row.push(Value::String(e.to_string()));
                        row
                    }
                })
                .collect();
            Table {
                name: "equivalence",
                columns: vec!["index", "mu_re", "mu_im", "N", "family", "weighted_residual", "plain_residual", "condition", "error"],
                rows,
            }
        }
    };
    if failures > 0 && failures == table.rows.len() {
        return Err(CliError::Numerical(Error::NoConvergence("every oracle case failed".into())));
    }
    Ok(RunOutput {
        tables: vec![table],
        partial: failures > 0,
    })
}

fn run_bifurcate(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let model = build_model(cfg)?;
    let range = cfg.range.expect("resolved");
    let mut settings = ContinuationSettings::new(
        fam(cfg),
        cfg.n.as_ref().expect("resolved")[0],
        cfg.param.as_deref().expect("resolved"),
        range[0],
        range[1],
        cfg.steps.expect("resolved"),
    );
    settings.detect_tol = cfg.detect_tol.expect("resolved");
    if let Some(ms) = &cfg.curve {
        let rows_in = hopf_curve_2param(&model, ms, &settings);
        let partial = rows_in.iter().any(|r| r.error.is_some());
        let mut rows = vec![];
        for r in &rows_in {
            if r.taus.is_empty() {
                rows.push(vec![num(r.m), Value::Null, Value::Null, r.error.clone().map(Value::String).unwrap_or(Value::Null)]);
            }
            for (i, t) in r.taus.iter().enumerate() {
                rows.push(vec![num(r.m), json!(i), num(*t), r.error.clone().map(Value::String).unwrap_or(Value::Null)]);
            }
        }
        return Ok(RunOutput {
            tables: vec![Table {
                name: "hopf_curve",
                columns: vec!["m", "branch", "tau", "error"],
                rows,
            }],
            partial,
        });
    }
    let br = continue_equilibrium(&model, &settings)?;
    let branch = br
        .records
        .iter()
        .map(|r| {
            vec![
                num(r.param),
                num(r.state_head),
                num(r.rightmost.re),
                num(r.rightmost.im),
                json!(if r.stable { "stable" } else { "unstable" }),
            ]
        })
        .collect();
    let points = br
        .points
        .iter()
        .map(|p| {
            vec![
                json!(match p.kind {
                    BifurcationKind::BranchPoint => "BP",
                    BifurcationKind::Hopf => "H",
                }),
                num(p.param),
                num(p.lambda.re),
                num(p.lambda.im),
                num(p.residual),
            ]
        })
        .collect();
    Ok(RunOutput {
        tables: vec![
            Table {
                name: "branch",
                columns: vec!["param", "state_head", "rightmost_re", "rightmost_im", "stability"],
                rows: branch,
            },
            Table {
                name: "points",
                columns: vec!["kind", "param", "lambda_re", "lambda_im", "residual"],
                rows: points,
            },
        ],
        partial: !br.ambiguous.is_empty(),
    })
}

/// Runs a resolved configuration.
pub fn execute(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    match cfg.command.expect("resolved") {
        CommandKind::Nodes => run_nodes(cfg),
        CommandKind::Converge => run_converge(cfg),
        CommandKind::Oracle => run_oracle(cfg),
        CommandKind::Bifurcate => run_bifurcate(cfg),
    }
}

/// Renders each table; the second element is the file each one belongs in.
pub fn render(cfg: &RunConfig, out: &RunOutput) -> Vec<(Option<PathBuf>, String)> {
    let format = cfg.format.unwrap_or(Format::Csv);
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let many = out.tables.len() > 1;
    out.tables
        .iter()
        .map(|t| {
            let text = match format {
                Format::Csv => render_csv(cfg, t),
                Format::Json => render_json(cfg, t),
            };
            let path = cfg.output.as_ref().map(|o| {
                if many {
                    PathBuf::from(format!("{o}.{}.{ext}", t.name))
                } else {
                    PathBuf::from(o)
                }
            });
            (path, text)
        })
        .collect()
}

fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Builds the configuration from parsed flags.
pub fn config_from_cli(cli: Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match (cli.config, cli.command) {
        (Some(_), Some(_)) => return config_err("use either --config or a subcommand"),
        (Some(p), None) => load_config(&p)?,
        (None, Some(c)) => c.into_config(),
        (None, None) => return config_err("missing subcommand"),
    };
    if cli.output.is_some() {
        cfg.output = cli.output;
    }
    if cli.format.is_some() {
        cfg.format = cli.format;
    }
    Ok(cfg)
}

fn configure_workers() -> Result<(), CliError> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| CliError::Config(format!("{WORKERS_ENV} must be a positive integer")))?;
        if n == 0 {
            return config_err(format!("{WORKERS_ENV} must be a positive integer"));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn std::io::Write, stderr: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(stderr, "{e}") } else { write!(stdout, "{e}") };
            return code;
        }
    };
    let result = configure_workers()
        .and_then(|_| config_from_cli(cli))
        .and_then(RunConfig::resolve)
        .and_then(|cfg| execute(&cfg).map(|out| (cfg, out)));
    let (cfg, out) = match result {
        Ok(v) => v,
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            return e.exit_code();
        }
    };
    let rendered = render(&cfg, &out);
    let mut first = true;
    for (path, text) in rendered {
        match path {
            Some(p) => {
                if let Err(e) = std::fs::write(&p, text) {
                    let _ = writeln!(stderr, "cannot write {}: {e}", p.display());
                    return EXIT_CONFIG;
                }
            }
            None => {
                if !first {
                    let _ = writeln!(stdout);
                }
                let _ = stdout.write_all(text.as_bytes());
            }
        }
        first = false;
    }
    if out.partial {
        EXIT_PARTIAL
    } else {
        EXIT_OK
    }
}
