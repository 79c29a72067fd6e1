//! Command-line front end for `regvar`.
//!
//! Every command reads a map spec, writes CSV tables and a `report.txt`
//! (summary plus the fully resolved configuration as JSON) into `--out`,
//! and prints the summary. Exit codes: 0 success, 2 usage or input error,
//! 3 data diagnostic.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use regvar::asymptotic::{
    asymptotic_scan, check_prop7_bound, AsymptoticConfig, AsymptoticScanResult, Eta,
};
use regvar::critical::{box_counting_dimension, component_constancy, porosity_scan, scan_critical_values, ScanConfig};
use regvar::linalg::Matrix;
use regvar::oracle::dense_modulus;
use regvar::regularity::{
    check_chain_rule, check_sum_rule, surjection_rate, ModulusQuery, RateConfig, ResolutionRule,
};
use regvar::report;
use regvar::semialg::{load_spec, parse_polynomial, sample_graph, GraphPoint, MapSpec, Polynomial};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DIAGNOSTIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "regvar", version, about = "Metric regularity of semialgebraic set-valued maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rate of surjection and regularity rate at a point.
    Rate(RateArgs),
    /// Critical values, their box-counting dimension and porosity.
    Critical(CriticalArgs),
    /// Asymptotically critical values.
    Asymptotic(AsymptoticArgs),
    /// Sum rule, chain rule or radial bound checks.
    Calculus(CalculusArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Map spec (JSON).
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "tol-eq", default_value_t = 1e-9)]
    pub tol_eq: f64,
    /// Largest neighborhood radius of the schedule.
    #[arg(long, default_value_t = 0.5)]
    pub delta0: f64,
    /// Number of halvings in the schedule.
    #[arg(long, default_value_t = 6)]
    pub levels: usize,
    /// Range grid pitch: `auto`, a fixed pitch, or `rel:F` for `F * delta`.
    #[arg(long, default_value = "auto")]
    pub resolution: String,
    /// Output directory.
    #[arg(long, default_value = "regvar-out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Base point `x`, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
    /// Base value `y`, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub y: String,
    /// Also print the rasterized modulus at `λ = delta0` (small specs only).
    #[arg(long, hide = true)]
    pub oracle: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CriticalArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 0.05)]
    pub tau: f64,
    /// Graph samples drawn.
    #[arg(long, default_value_t = 2000)]
    pub budget: usize,
    /// Box sizes `2^-k` for `k` in `K0:K1`.
    #[arg(long, default_value = "2:7")]
    pub scales: String,
    /// Linking radius of the component analysis (default: from the data).
    #[arg(long)]
    pub eps: Option<f64>,
    /// Extra graph point `x1,..:y1,..` to evaluate; repeatable.
    #[arg(long = "point", allow_hyphen_values = true)]
    pub points: Vec<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AsymptoticArgs {
    #[command(flatten)]
    pub common: Common,
    /// `linear`, `phi-default`, or `custom:PATH` with a one-variable
    /// polynomial in JSON.
    #[arg(long, default_value = "linear")]
    pub eta: String,
    /// Shells `lo:hi,lo:hi,..` (default: dyadic shells from 4 to 256).
    #[arg(long)]
    pub shells: Option<String>,
    /// Samples per shell.
    #[arg(long, default_value_t = 200)]
    pub budget: usize,
    /// Weighted rates below this count as decaying.
    #[arg(long, default_value_t = 0.02)]
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Sum,
    Chain,
    Radial,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CalculusArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub check: CheckKind,
    /// Perturbation `A` for the sum rule: rows separated by `;`.
    #[arg(long, allow_hyphen_values = true)]
    pub matrix: Option<String>,
    /// Inner polynomial map `G` for the chain rule (spec with components).
    #[arg(long)]
    pub inner: Option<PathBuf>,
    /// Radial factor `ρ` (polynomial JSON).
    #[arg(long)]
    pub rho: Option<PathBuf>,
    /// Sampling box of the composed map's domain: `lo:hi,lo:hi,..`
    /// (default `[-1, 1]^n`).
    #[arg(long, allow_hyphen_values = true)]
    pub domain: Option<String>,
    /// Graph points checked.
    #[arg(long, default_value_t = 5)]
    pub budget: usize,
    #[arg(long, default_value_t = 0.1)]
    pub tol: f64,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(regvar::Error),
}

impl From<regvar::Error> for CliError {
    fn from(e: regvar::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_diagnostic() => EXIT_DIAGNOSTIC,
            _ => EXIT_USAGE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error[usage]: {m}"),
            CliError::Core(e) => write!(f, "error[{}]: {e}", e.kind()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

fn parse_list(s: &str, what: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .or_else(|_| usage(format!("{what}: expected comma-separated numbers, got {s:?}")))
}

fn parse_pairs(s: &str, what: &str) -> CliResult<Vec<(f64, f64)>> {
    s.split(',')
        .map(|t| match t.split_once(':') {
            Some((a, b)) => match (a.trim().parse(), b.trim().parse()) {
                (Ok(a), Ok(b)) => Ok((a, b)),
                _ => usage(format!("{what}: bad pair {t:?}")),
            },
            None => usage(format!("{what}: expected lo:hi, got {t:?}")),
        })
        .collect()
}

fn parse_resolution(s: &str) -> CliResult<ResolutionRule> {
    if s == "auto" {
        return Ok(ResolutionRule::Auto);
    }
    let (rel, num) = match s.strip_prefix("rel:") {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    match num.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(if rel {
            ResolutionRule::Relative(v)
        } else {
            ResolutionRule::Fixed(v)
        }),
        _ => usage(format!("--resolution: expected auto, a positive pitch or rel:F, got {s:?}")),
    }
}

fn parse_matrix(s: &str) -> CliResult<Matrix> {
    let rows: Vec<Vec<f64>> = s
        .split(';')
        .map(|r| parse_list(r, "--matrix"))
        .collect::<CliResult<_>>()?;
    Matrix::from_rows(&rows).map_err(CliError::from)
}

fn parse_eta(s: &str) -> CliResult<Eta> {
    match s {
        "linear" => Ok(Eta::Linear),
        "phi-default" => Ok(Eta::PhiDefault),
        _ => match s.strip_prefix("custom:") {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(regvar::Error::from)?;
                Ok(Eta::custom(parse_polynomial(&text)?)?)
            }
            None => usage(format!("--eta: expected linear, phi-default or custom:PATH, got {s:?}")),
        },
    }
}

fn parse_point(s: &str, spec: &MapSpec) -> CliResult<GraphPoint> {
    let Some((x, y)) = s.split_once(':') else {
        return usage(format!("--point: expected x1,..:y1,.., got {s:?}"));
    };
    let p = GraphPoint::new(parse_list(x, "--point")?, parse_list(y, "--point")?);
    if p.x.len() != spec.n() || p.y.len() != spec.m() {
        return usage(format!("--point {s:?} does not match n = {}, m = {}", spec.n(), spec.m()));
    }
    Ok(p)
}

fn rate_config(c: &Common) -> CliResult<RateConfig> {
    let mut cfg = RateConfig::default().with_schedule(c.delta0, c.levels)?;
    cfg.resolution = parse_resolution(&c.resolution)?;
    cfg.tol_eq = c.tol_eq;
    cfg.validate()?;
    Ok(cfg)
}

/// What a command produced: the summary and the tables written.
#[derive(Debug, Default)]
pub struct Outcome {
    pub summary: Vec<String>,
    pub tables: Vec<(String, String)>,
}

impl Outcome {
    fn say(&mut self, line: impl Into<String>) {
        self.summary.push(line.into());
    }

    fn table(&mut self, name: &str, csv: String) {
        self.tables.push((name.to_string(), csv));
    }
}

#[derive(Serialize)]
struct Resolved<'a, A: Serialize, C: Serialize> {
    command: &'a str,
    args: &'a A,
    config: &'a C,
    threads: usize,
}

fn write_outputs<A: Serialize, C: Serialize>(
    out: &Path,
    command: &str,
    args: &A,
    config: &C,
    outcome: &Outcome,
) -> CliResult<()> {
    for (name, csv) in &outcome.tables {
        report::write_table(out, name, csv)?;
    }
    let resolved = Resolved {
        command,
        args,
        config,
        threads: rayon::current_num_threads(),
    };
    let mut text = outcome.summary.join("\n");
    text.push_str("\n\nconfig:\n");
    text.push_str(&serde_json::to_string_pretty(&resolved).expect("config serializes"));
    text.push('\n');
    report::write_table(out, "report.txt", &text)?;
    Ok(())
}

pub fn cmd_rate(a: &RateArgs) -> CliResult<Outcome> {
    let spec = load_spec(&a.common.spec)?;
    let cfg = rate_config(&a.common)?;
    let x = parse_list(&a.x, "--x")?;
    let y = parse_list(&a.y, "--y")?;
    let est = surjection_rate(&spec, &x, &y, &cfg, a.common.seed)?;
    let mut o = Outcome::default();
    o.say(format!("map: {}", spec.name()));
    o.say(format!("sur: {}", est.sur_estimate));
    o.say(format!("reg: {}", est.reg_estimate));
    o.say(format!("slack: {}", est.slack));
    if let Some((p, lambda)) = &est.argmin {
        o.say(format!("attained at x = {:?}, y = {:?}, lambda = {lambda}", p.x, p.y));
    }
    if a.oracle {
        let q = ModulusQuery::new(x.clone(), y.clone(), a.common.delta0);
        let pitch = cfg.resolution.pitch(a.common.delta0, spec.m());
        o.say(format!("oracle modulus at lambda = {}: {}", a.common.delta0, dense_modulus(&spec, &q, pitch)?));
    }
    o.table("rate.csv", report::rate_csv(&est)?);
    write_outputs(&a.common.out, "rate", a, &cfg, &o)?;
    Ok(o)
}

pub fn cmd_critical(a: &CriticalArgs) -> CliResult<Outcome> {
    let spec = load_spec(&a.common.spec)?;
    let extra = a
        .points
        .iter()
        .map(|p| parse_point(p, &spec))
        .collect::<CliResult<Vec<_>>>()?;
    let (k0, k1) = match parse_pairs(&a.scales, "--scales")?.as_slice() {
        [(k0, k1)] if k0 < k1 && k0.fract() == 0.0 && k1.fract() == 0.0 => (*k0 as i32, *k1 as i32),
        _ => return usage(format!("--scales: expected K0:K1 integers with K0 < K1, got {:?}", a.scales)),
    };
    let cfg = ScanConfig {
        tau: a.tau,
        budget: a.budget,
        tol_eq: a.common.tol_eq,
        rate: rate_config(&a.common)?,
        extra_points: extra,
    };
    let res = scan_critical_values(&spec, &cfg, a.common.seed)?;
    let mut o = Outcome::default();
    o.say(format!("map: {}", spec.name()));
    o.say(format!("sampled: {}", res.total_sampled));
    o.say(format!("flagged: {}", res.flagged.len()));
    o.table("flagged.csv", report::flagged_csv(&res, spec.n(), spec.m())?);
    o.table("values.csv", report::values_csv(&res, spec.m())?);
    if !res.values.is_empty() {
        let scales: Vec<f64> = (k0..=k1).map(|k| 0.5f64.powi(k)).collect();
        match box_counting_dimension(&res.values, &scales) {
            Ok(fit) => {
                o.say(format!("dimension: {} (r2 {})", fit.dimension, fit.r2));
                o.table("dimension.csv", report::dimension_csv(&fit)?);
            }
            Err(e) if e.is_diagnostic() => o.say(format!("dimension: not fitted ({e})")),
            Err(e) => return Err(e.into()),
        }
        let rep = porosity_scan(&res.values, &[0.2, 0.1, 0.05], 0.05)?;
        o.say(format!("porosity lambda_max: {}", rep.lambda_max));
        o.table("porosity.csv", report::porosity_csv(&rep)?);
    }
    if spec.functional().is_some() && spec.m() == 1 {
        let comps = component_constancy(&spec, a.tau, a.eps, a.budget, a.common.seed)?;
        o.say(format!("components: {}", comps.components.len()));
        o.table("components.csv", report::components_csv(&comps)?);
    }
    write_outputs(&a.common.out, "critical", a, &cfg, &o)?;
    Ok(o)
}

pub fn cmd_asymptotic(a: &AsymptoticArgs) -> CliResult<Outcome> {
    let eta = parse_eta(&a.eta)?;
    let spec = load_spec(&a.common.spec)?;
    let mut cfg = AsymptoticConfig {
        per_shell_budget: a.budget,
        threshold: a.tau,
        tol_eq: a.common.tol_eq,
        rate: rate_config(&a.common)?,
        ..AsymptoticConfig::default()
    };
    if let Some(s) = &a.shells {
        cfg.shells = parse_pairs(s, "--shells")?;
    }
    let res: AsymptoticScanResult = asymptotic_scan(&spec, &eta, &cfg, a.common.seed)?;
    let mut o = Outcome::default();
    o.say(format!("map: {}", spec.name()));
    o.say(format!("eta: {}", res.eta_name));
    o.say(format!("candidates: {}", res.candidates.len()));
    for c in &res.candidates {
        o.say(format!("  y = {:?}", c.y));
    }
    for d in &res.diagnostics {
        o.say(format!("note: {d}"));
    }
    o.table("shells.csv", report::shells_csv(&res)?);
    o.table("candidates.csv", report::candidates_csv(&res, spec.m())?);
    write_outputs(&a.common.out, "asymptotic", a, &cfg, &o)?;
    Ok(o)
}

fn read_poly(path: &Path) -> CliResult<Polynomial> {
    let text = std::fs::read_to_string(path).map_err(regvar::Error::from)?;
    Ok(parse_polynomial(&text)?)
}

pub fn cmd_calculus(a: &CalculusArgs) -> CliResult<Outcome> {
    let h = load_spec(&a.common.spec)?;
    let cfg = rate_config(&a.common)?;
    let seed = a.common.seed;
    let rep = match a.check {
        CheckKind::Sum => {
            let Some(m) = &a.matrix else {
                return usage("--check sum needs --matrix");
            };
            let pts = sample_graph(&h, a.budget, seed, a.common.tol_eq)?;
            check_sum_rule(&h, &parse_matrix(m)?, &pts, a.tol, &cfg, seed)?
        }
        CheckKind::Chain | CheckKind::Radial => {
            let inner_n = match a.check {
                CheckKind::Chain => {
                    let Some(path) = &a.inner else {
                        return usage("--check chain needs --inner");
                    };
                    let g = load_spec(path)?;
                    let Some(map) = g.functional() else {
                        return usage("--inner must be a polynomial map spec");
                    };
                    if map.m() != h.n() {
                        return usage(format!("--inner maps to R^{}, the outer map needs R^{}", map.m(), h.n()));
                    }
                    map.n()
                }
                _ => h.n(),
            };
            let domain = match &a.domain {
                Some(s) => parse_pairs(s, "--domain")?,
                None => vec![(-1.0, 1.0); inner_n],
            };
            if domain.len() != inner_n {
                return usage(format!("--domain needs {inner_n} intervals"));
            }
            if let CheckKind::Chain = a.check {
                let g = load_spec(a.inner.as_ref().expect("checked above"))?;
                let map = g.functional().expect("checked above");
                let f = h.precompose(map, domain.clone())?;
                let pts = sample_graph(&f, a.budget, seed, a.common.tol_eq)?;
                check_chain_rule(&h, map, domain, &pts, a.tol, &cfg, seed)?
            } else {
                let Some(path) = &a.rho else {
                    return usage("--check radial needs --rho");
                };
                let rho = read_poly(path)?;
                let g = regvar::asymptotic::radial_map(&rho)?;
                let l = h.precompose(&g, domain.clone())?;
                let pts = sample_graph(&l, a.budget, seed, a.common.tol_eq)?;
                check_prop7_bound(&h, &rho, domain, &pts, a.tol, &cfg, seed)?
            }
        }
    };
    let mut o = Outcome::default();
    o.say(format!("check: {}", rep.name));
    for r in &rep.rows {
        o.say(format!(
            "  {} {} lhs {} rhs {} slack {}",
            if r.pass { "pass" } else { "FAIL" },
            r.label,
            r.lhs,
            r.rhs,
            r.slack
        ));
    }
    o.say(format!("all pass: {}", rep.all_pass()));
    o.table("calculus.csv", report::calculus_csv(std::slice::from_ref(&rep))?);
    write_outputs(&a.common.out, "calculus", a, &cfg, &o)?;
    Ok(o)
}

pub fn execute(cli: &Cli) -> CliResult<Outcome> {
    match &cli.command {
        Command::Rate(a) => cmd_rate(a),
        Command::Critical(a) => cmd_critical(a),
        Command::Asymptotic(a) => cmd_asymptotic(a),
        Command::Calculus(a) => cmd_calculus(a),
    }
}

/// Worker count from `REGVAR_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var("REGVAR_THREADS").ok()?.parse().ok().filter(|t| *t > 0)
}

/// Parses `args`, runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads_from_env() {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().expect("thread pool");
    match pool.install(|| execute(&cli)) {
        Ok(o) => {
            println!("{}", o.summary.join("\n"));
            EXIT_OK
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
