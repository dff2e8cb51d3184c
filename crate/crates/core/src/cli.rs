//! Command-line front end. `dsy <command> [flags]`; see `dsy --help`.
//!
//! Every run writes one JSON report (stdout, or `--out`) embedding the resolved
//! config, and CSV tables into the `--csv` directory when given. Exit codes:
//! 0 completed, 2 configuration error, 3 numerical failure, 4 inconclusive
//! verdict under `--strict`.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::criteria::{
    a_free_trace, cor36_criterion, default_grid, discretize_operator, find_min_a, key_lemma_criterion,
    operator_criterion, pair_criterion, asymmetry, trace_criterion, CriterionReport, GridSpec, Method, Verdict,
};
use crate::error::{Error, Result};
use crate::kernels::{
    convolution_identity_error, detailed_balance_residual, BesselKernel, MarkovKernel, StateSpace,
};
use crate::numerics::{bisect, Quadrature};
use crate::numerics::stats::RunningStats;
use crate::report::{fmt_float, num, nums, write_file, CsvTable, Report};
use crate::sim::{explosion_probability, run_trials, simulate_frontier, zeta_trials};

#[derive(Debug, Parser)]
#[command(name = "dsy", version, about = "Simulation and non-explosion criteria for doubly stochastic Yule cascades")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Frontier sizes |V(t)| at horizon t.
    Simulate,
    /// Minimal path sums ζ_1..ζ_n by best-first search.
    Zeta,
    /// Fraction of trials whose frontier outgrows the node budget before t.
    Explosion,
    /// One criterion method at one a.
    Criterion,
    /// Spectral radius and norm of T_a; `--a auto` searches the smallest passing a.
    Spectral,
    /// Trace condition, a-free trace and the b-test.
    Trace,
    /// Reversibility, normalization and kernel identities on a grid.
    KernelCheck,
    /// Rerun one of the bundled worked examples.
    Reproduce {
        #[arg(value_enum)]
        example: Example,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Example {
    BirthDeath,
    Bessel,
    MeanField,
    Kpp,
}

#[derive(Debug, Default, clap::Args)]
pub struct Options {
    /// Config file: flat `key = value` text with `[sections]`, or a JSON config or report.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Report path (default stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Directory for CSV tables.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// Require --seed and exit 4 on inconclusive verdicts.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Any config key, as `section.key=value`.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    pub set: Vec<String>,

    #[arg(long, global = true)]
    pub model: Option<String>,
    #[arg(long, global = true)]
    pub alpha: Option<String>,
    #[arg(long, global = true)]
    pub betas: Option<String>,
    #[arg(long, global = true)]
    pub j: Option<String>,
    #[arg(long, global = true)]
    pub law: Option<String>,
    #[arg(long, global = true)]
    pub intensity: Option<String>,
    #[arg(long, global = true)]
    pub initial: Option<String>,
    #[arg(long, global = true)]
    pub scale: Option<String>,
    #[arg(long, global = true)]
    pub offspring: Option<String>,
    #[arg(long, global = true)]
    pub siblings: Option<String>,
    #[arg(long, global = true)]
    pub t: Option<String>,
    #[arg(long, global = true)]
    pub n: Option<String>,
    #[arg(long, global = true)]
    pub budget: Option<String>,
    #[arg(long, global = true)]
    pub trials: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub a: Option<String>,
    #[arg(long, global = true)]
    pub method: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[arg(long, global = true)]
    pub b: Option<String>,
    #[arg(long, global = true)]
    pub mu: Option<String>,
}

impl Options {
    fn shortcuts(&self) -> Vec<(&'static str, &'static str, &Option<String>)> {
        vec![
            ("model", "name", &self.model),
            ("model", "alpha", &self.alpha),
            ("model", "betas", &self.betas),
            ("model", "j", &self.j),
            ("model", "law", &self.law),
            ("model", "intensity", &self.intensity),
            ("model", "initial", &self.initial),
            ("model", "scale", &self.scale),
            ("model", "offspring", &self.offspring),
            ("model", "siblings", &self.siblings),
            ("run", "t", &self.t),
            ("run", "n", &self.n),
            ("run", "budget", &self.budget),
            ("run", "trials", &self.trials),
            ("run", "a", &self.a),
            ("run", "method", &self.method),
            ("run", "grid", &self.grid),
            ("run", "b", &self.b),
            ("run", "mu", &self.mu),
        ]
    }
}

/// What a command produced: the report and named CSV tables.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Report,
    pub tables: Vec<(String, CsvTable)>,
}

/// Builds the resolved config: command preset, then file, then flags.
pub fn resolve(command: Command, opts: &Options) -> Result<ExperimentConfig> {
    let mut cfg = match command {
        Command::Reproduce { example } => preset(example),
        _ => ExperimentConfig::default(),
    };
    if let Some(path) = &opts.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        cfg.load(&text)?;
    }
    for (section, key, value) in opts.shortcuts() {
        if let Some(v) = value {
            cfg.set(section, key, v)?;
        }
    }
    for s in &opts.set {
        cfg.set_assignment(s)?;
    }
    if let Some(seed) = opts.seed {
        cfg.seed = Some(seed);
    }
    if opts.out.is_some() {
        cfg.output.out = opts.out.clone();
    }
    if opts.csv.is_some() {
        cfg.output.csv = opts.csv.clone();
    }
    if opts.threads.is_some() {
        cfg.output.threads = opts.threads;
    }
    cfg.output.strict |= opts.strict;
    if cfg.seed.is_none() {
        if cfg.output.strict {
            return Err(Error::Config("--strict requires --seed".into()));
        }
        let seed: u64 = rand::random();
        eprintln!("dsy: no seed given, using {seed}");
        cfg.seed = Some(seed);
    }
    Ok(cfg)
}

/// Parses `args` (including the program name), runs, writes outputs and returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("dsy: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let cfg = resolve(cli.command, &cli.opts)?;
    let outcome = run(cli.command, &cfg)?;
    let text = outcome.report.to_json();
    match &cfg.output.out {
        Some(path) => write_file(path, &text)?,
        None => print!("{text}"),
    }
    if let Some(dir) = &cfg.output.csv {
        std::fs::create_dir_all(dir)
            .map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))?;
        for (name, table) in &outcome.tables {
            write_file(&dir.join(name), &table.render())?;
        }
    }
    let inconclusive = outcome.report.verdict.as_deref() == Some(Verdict::Inconclusive.as_str());
    Ok(if cfg.output.strict && inconclusive { 4 } else { 0 })
}

/// Runs `command` under a resolved config.
pub fn run(command: Command, cfg: &ExperimentConfig) -> Result<Outcome> {
    let (results, diagnostics, verdict, tables) = match command {
        Command::Simulate => simulate(cfg)?,
        Command::Zeta => zeta(cfg)?,
        Command::Explosion => explosion(cfg)?,
        Command::Criterion => criterion(cfg)?,
        Command::Spectral => spectral(cfg)?,
        Command::Trace => trace(cfg)?,
        Command::KernelCheck => kernel_check(cfg)?,
        Command::Reproduce { example } => reproduce(example, cfg)?,
    };
    let name = match command {
        Command::Simulate => "simulate",
        Command::Zeta => "zeta",
        Command::Explosion => "explosion",
        Command::Criterion => "criterion",
        Command::Spectral => "spectral",
        Command::Trace => "trace",
        Command::KernelCheck => "kernel-check",
        Command::Reproduce { .. } => "reproduce",
    };
    let report = Report::new(name, cfg.to_json(), results, diagnostics, verdict.map(|v| v.as_str().to_string()));
    Ok(Outcome { report, tables })
}

type Parts = (Value, Value, Option<Verdict>, Vec<(String, CsvTable)>);

fn mean_se(xs: impl IntoIterator<Item = f64>) -> (f64, f64, u64) {
    let mut s = RunningStats::default();
    xs.into_iter().for_each(|x| s.push(x));
    let se = if s.count() >= 2 { s.std_error() } else { f64::NAN };
    (s.mean(), se, s.count())
}

fn binary_scale(cfg: &ExperimentConfig, name: &str) -> Option<f64> {
    (cfg.model.name == name && cfg.model.offspring == "binary").then_some(cfg.model.scale)
}

fn simulate(cfg: &ExperimentConfig) -> Result<Parts> {
    let model = cfg.cascade()?;
    let r = &cfg.run;
    let seed = cfg.seed()?;
    let runs = run_trials(r.trials, cfg.output.threads, |trial| {
        simulate_frontier(&model, r.t, r.budget, seed, trial, r.max_events)
    })?;
    let (mean, se, kept) = mean_se(runs.iter().filter(|f| !f.budget_exceeded).map(|f| f.crossed_count as f64));
    let censored = runs.iter().filter(|f| f.budget_exceeded).count();
    let mut table = CsvTable::new(&["trial", "crossed_count", "events", "budget_exceeded"]);
    let mut events = CsvTable::new(&["trial", "k", "time"]);
    for (i, f) in runs.iter().enumerate() {
        table.push(vec![i.to_string(), f.crossed_count.to_string(), f.events.to_string(), f.budget_exceeded.to_string()]);
        for (k, t) in f.event_times.iter().enumerate() {
            events.push(vec![i.to_string(), (k + 1).to_string(), fmt_float(*t)]);
        }
    }
    let results = json!({
        "horizon": num(r.t),
        "trials": r.trials,
        "censored": censored,
        "mean_crossed_count": num(mean),
        "std_error": num(se),
        "uncensored_trials": kept,
    });
    let mut diag = json!({});
    if let Some(c) = binary_scale(cfg, "yule") {
        // E N(t) solves dE N/dt = c E N
        diag["yule_mean"] = num((c * r.t).exp());
    }
    if censored > 0 {
        diag["caveat"] = json!("mean is over uncensored trials only");
    }
    let mut tables = vec![("frontier.csv".to_string(), table)];
    if r.max_events > 0 {
        tables.push(("events.csv".to_string(), events));
    }
    Ok((results, diag, None, tables))
}

/// Speed of the first-passage front on the binary tree: root of `c − 1 − ln c = ln 2` in `(0, 1)`.
pub fn fpp_speed() -> Result<f64> {
    let root = bisect(|c: f64| c - 1.0 - c.ln() - std::f64::consts::LN_2, 1e-6, 0.999_999, 1e-14)?;
    Ok(root.root)
}

fn zeta(cfg: &ExperimentConfig) -> Result<Parts> {
    let model = cfg.cascade()?;
    let r = &cfg.run;
    if r.n == 0 {
        return Err(Error::Config("n must be at least 1".into()));
    }
    let runs = zeta_trials(&model, r.n, r.budget, r.trials, cfg.seed()?, cfg.output.threads)?;
    let n = r.n as usize;
    let last = |z: &crate::sim::ZetaEstimate| z.zeta_n.get(n).copied().unwrap_or(f64::NAN);
    let usable = |z: &&crate::sim::ZetaEstimate| !z.censored && last(z).is_finite();
    let (mean, se, kept) = mean_se(runs.iter().filter(usable).map(|z| last(z) / r.n as f64));
    let infinite = runs.iter().filter(|z| !z.censored && last(z) == f64::INFINITY).count();
    let censored = runs.iter().filter(|z| z.censored).count();
    let (nodes, _, _) = mean_se(runs.iter().map(|z| z.nodes_expanded as f64));
    let mut table = CsvTable::new(&["trial", "n", "zeta_n"]);
    for (i, z) in runs.iter().enumerate() {
        for (k, v) in z.zeta_n.iter().enumerate().skip(1) {
            table.push(vec![i.to_string(), k.to_string(), fmt_float(*v)]);
        }
    }
    let results = json!({
        "n": r.n,
        "trials": r.trials,
        "mean_zeta_n_over_n": num(mean),
        "std_error": num(se),
        "finite_trials": kept,
        "infinite_trials": infinite,
        "censored": censored,
        "mean_nodes_expanded": num(nodes),
    });
    let mut diag = json!({ "budget": r.budget });
    if let Some(c) = binary_scale(cfg, "yule") {
        diag["fpp_speed"] = num(fpp_speed()? / c);
    }
    if censored > 0 {
        diag["caveat"] = json!(crate::sim::CENSORING_CAVEAT);
    }
    Ok((results, diag, None, vec![("zeta.csv".to_string(), table)]))
}

fn explosion(cfg: &ExperimentConfig) -> Result<Parts> {
    let model = cfg.cascade()?;
    let r = &cfg.run;
    let e = explosion_probability(&model, r.t, r.budget, r.trials, cfg.seed()?, cfg.output.threads)?;
    let mut table = CsvTable::new(&["trial", "budget_exceeded", "crossed_count"]);
    for (i, (c, x)) in e.crossed_counts.iter().zip(&e.budget_exceeded).enumerate() {
        table.push(vec![i.to_string(), x.to_string(), c.to_string()]);
    }
    let results = json!({
        "horizon": num(e.horizon),
        "budget": e.budget,
        "trials": e.trials,
        "exceeded": e.exceeded,
        "proportion": num(e.proportion.estimate),
        "ci95": nums(&[e.proportion.lo, e.proportion.hi]),
    });
    let diag = json!({ "caveat": e.caveat });
    Ok((results, diag, None, vec![("explosion.csv".to_string(), table)]))
}

/// `a` from the config, or the smallest passing `a` on the operator-norm criterion.
fn resolve_a(cfg: &ExperimentConfig, kernel: &dyn MarkovKernel, grid: Option<&GridSpec>) -> Result<(f64, Value)> {
    match cfg.a()? {
        Some(a) => Ok((a, Value::Null)),
        None => match find_min_a(kernel, grid, cfg.threshold()?, cfg.a_search(), cfg.power())? {
            Some(m) => Ok((m.a, json!({ "a": num(m.a), "norm": num(m.norm), "margin": num(m.margin) }))),
            None => Err(Error::Numerical("no a in the search range passes the operator-norm criterion".into())),
        },
    }
}

fn criterion(cfg: &ExperimentConfig) -> Result<Parts> {
    let kernel = cfg.require_kernel()?;
    let k = kernel.as_ref();
    let grid = cfg.grid()?;
    let threshold = cfg.threshold()?;
    let quad = cfg.quadrature();
    let method = cfg.method()?;
    let (a, search) = if method == Method::Cor36 { (f64::NAN, Value::Null) } else { resolve_a(cfg, k, grid.as_ref())? };
    let mut tables = Vec::new();
    let report: CriterionReport = match method {
        Method::KeyLemmaMc => {
            let r = &cfg.run;
            key_lemma_criterion(k, cfg.initial()?, a, r.n, r.trials, cfg.mu()?, cfg.seed()?, cfg.output.threads)?.0
        }
        Method::PairSequence => {
            let (rep, terms) = pair_criterion(k, grid.as_ref(), a, cfg.run.n, threshold)?;
            let mut t = CsvTable::new(&["n", "pair_value", "nth_root"]);
            for p in &terms {
                t.push(vec![p.n.to_string(), fmt_float(p.value), fmt_float(p.nth_root)]);
            }
            tables.push(("pairs.csv".to_string(), t));
            rep
        }
        Method::SpectralRadius | Method::OperatorNorm => operator_criterion(k, grid.as_ref(), a, method, threshold, cfg.power())?,
        Method::Trace => trace_criterion(k, a, threshold, &quad)?.0,
        Method::Cor36 => cor36_criterion(k, cfg.run.b, &quad)?.0,
    };
    let verdict = report.verdict;
    let diag = json!({ "a_search": search });
    Ok((report.to_json(), diag, Some(verdict), tables))
}

fn spectral(cfg: &ExperimentConfig) -> Result<Parts> {
    let kernel = cfg.require_kernel()?;
    let k = kernel.as_ref();
    let grid = cfg.grid()?;
    let threshold = cfg.threshold()?;
    match cfg.a()? {
        Some(a) => {
            let radius = operator_criterion(k, grid.as_ref(), a, Method::SpectralRadius, threshold, cfg.power())?;
            let norm = operator_criterion(k, grid.as_ref(), a, Method::OperatorNorm, threshold, cfg.power())?;
            let verdict = norm.verdict;
            let results = json!({ "a": num(a), "spectral_radius": radius.to_json(), "operator_norm": norm.to_json() });
            Ok((results, json!({}), Some(verdict), Vec::new()))
        }
        None => {
            let found = find_min_a(k, grid.as_ref(), threshold, cfg.a_search(), cfg.power())?;
            let range = cfg.a_search();
            let diag = json!({ "a_range": nums(&[range.lo, range.hi]), "a_rel_tol": num(range.rel_tol) });
            Ok(match found {
                Some(m) => {
                    let results = json!({
                        "found": true,
                        "a": num(m.a),
                        "threshold": num(threshold),
                        "norm": num(m.norm),
                        "norm_doubled_grid": num(m.norm_doubled),
                        "grid_delta": num(m.grid_delta),
                        "margin": num(m.margin),
                        "grid": m.grid.map(|g| g.to_string()),
                    });
                    (results, diag, Some(Verdict::compare(m.norm, threshold, m.margin)), Vec::new())
                }
                None => {
                    let results = json!({ "found": false, "threshold": num(threshold) });
                    (results, diag, Some(Verdict::Inconclusive), Vec::new())
                }
            })
        }
    }
}

fn trace(cfg: &ExperimentConfig) -> Result<Parts> {
    let kernel = cfg.require_kernel()?;
    let k = kernel.as_ref();
    let quad = cfg.quadrature();
    let a = cfg
        .a()?
        .ok_or_else(|| Error::Config("trace needs a numeric a".into()))?;
    let (rep, t) = trace_criterion(k, a, cfg.threshold()?, &quad)?;
    let (cor, _) = cor36_criterion(k, cfg.run.b, &quad)?;
    let results = json!({
        "a": num(a),
        "trace": num(t.trace.value),
        "a_free_trace": t.a_free.map_or(json!("inf"), num),
        "criterion": rep.to_json(),
        "b_test": cor.to_json(),
    });
    let mut table = CsvTable::new(&["cutoff", "partial"]);
    for (c, p) in t.trace.cutoffs.iter().zip(&t.trace.partials) {
        table.push(vec![fmt_float(*c), fmt_float(*p)]);
    }
    Ok((results, json!({}), Some(rep.verdict), vec![("trace.csv".to_string(), table)]))
}

/// `max |∫ p(x, y) m(dy) − 1|` over `xs`.
pub fn row_mass_error(kernel: &dyn MarkovKernel, xs: &[f64], quad: &Quadrature) -> Result<f64> {
    let mut worst = 0.0f64;
    for &x in xs {
        let mass = match kernel.state_space() {
            StateSpace::Discrete { atoms } => atoms.iter().map(|&y| kernel.density(x, y).unwrap_or(0.0)).sum(),
            StateSpace::Interval { lo, hi } => {
                let mut breaks = vec![*lo, *hi];
                breaks.extend(kernel.breakpoints(x).into_iter().filter(|b| lo < b && b < hi));
                quad.integrate_breaks(
                    |y| if y > *lo && y < *hi { kernel.density(x, y).unwrap_or(0.0) } else { 0.0 },
                    &breaks,
                )?
            }
        };
        worst = worst.max((mass - 1.0).abs());
    }
    Ok(worst)
}

fn kernel_check(cfg: &ExperimentConfig) -> Result<Parts> {
    let kernel = cfg.require_kernel()?;
    let k = kernel.as_ref();
    let quad = cfg.quadrature();
    let caps = k.capabilities();
    let (nodes, grid_text) = match (k.state_space(), cfg.grid()?) {
        (StateSpace::Discrete { atoms }, _) => (atoms.clone(), None),
        (_, Some(g)) => (g.nodes(), Some(g.to_string())),
        (_, None) => {
            let g = default_grid(k)?;
            let g = GridSpec::new(g.lo, g.hi, 200)?;
            (g.nodes(), Some(g.to_string()))
        }
    };
    let inside: Vec<f64> = nodes.into_iter().filter(|&x| k.state_space().contains(x)).collect();
    let mut results = json!({ "kernel": k.name(), "grid": grid_text, "states": inside.len(), "capabilities": caps });
    let mut diag = json!({});
    if caps.density && caps.invariant_density {
        results["detailed_balance_residual"] = num(detailed_balance_residual(k, &inside)?);
    }
    if caps.density {
        let step = (inside.len() / 8).max(1);
        let probes: Vec<f64> = inside.iter().step_by(step).copied().collect();
        results["row_mass_error"] = num(row_mass_error(k, &probes, &quad)?);
        results["row_mass_probes"] = nums(&probes);
    }
    if k.state_space().is_discrete() && caps.invariant_density {
        let op = discretize_operator(k, None, 0.0)?;
        results["asymmetry"] = num(asymmetry(&op));
    }
    if k.name() == "kpp" {
        let pts: Vec<f64> = inside.iter().copied().filter(|x| x.abs() <= 5.0).collect();
        results["convolution_identity_error"] = num(convolution_identity_error(&pts, &quad)?);
        diag["convolution_points"] = json!(pts.len());
    }
    Ok((results, diag, None, Vec::new()))
}

/// Bundled config of a worked example.
pub fn preset(example: Example) -> ExperimentConfig {
    let mut c = ExperimentConfig { seed: Some(20_240_601), ..ExperimentConfig::default() };
    match example {
        Example::BirthDeath => {
            c.model.name = "birth-death".into();
            c.model.betas = "constant:1/3".into();
            c.model.j = 50;
            c.run.n = 10;
            c.run.trials = 4000;
            c.run.a = "1".into();
        }
        Example::Bessel => {
            c.model.name = "bessel".into();
            c.run.a = "auto".into();
            c.run.grid = "0:16:401".into();
        }
        Example::MeanField => {
            c.model.name = "mean-field".into();
            c.model.law = "point:1".into();
            c.model.intensity = "x".into();
            c.run.n = 40;
            c.run.a = "auto".into();
        }
        Example::Kpp => {
            c.model.name = "kpp".into();
            c.run.a = "1".into();
            c.run.grid = "-6:6:241".into();
        }
    }
    c
}

fn sub(p: Parts) -> Value {
    let (results, diagnostics, verdict, _) = p;
    json!({ "results": results, "diagnostics": diagnostics, "verdict": verdict })
}

fn with(cfg: &ExperimentConfig, edits: &[(&str, &str, &str)]) -> Result<ExperimentConfig> {
    let mut c = cfg.clone();
    for (s, k, v) in edits {
        c.set(s, k, v)?;
    }
    Ok(c)
}

fn reproduce(example: Example, cfg: &ExperimentConfig) -> Result<Parts> {
    let mut out = serde_json::Map::new();
    out.insert("example".into(), json!(example.to_possible_value().map(|v| v.get_name().to_string())));
    out.insert("kernel_check".into(), sub(kernel_check(cfg)?));
    match example {
        Example::BirthDeath => {
            for m in ["spectral_radius", "pair_sequence", "key_lemma_mc"] {
                let c = with(cfg, &[("run", "method", m)])?;
                out.insert(m.into(), sub(criterion(&c)?));
            }
            let geometric = with(cfg, &[("model", "betas", "geometric:1/2")])?;
            out.insert("trace_constant".into(), sub(trace(cfg)?));
            out.insert("trace_geometric".into(), sub(trace(&geometric)?));
            out.insert("spectral_auto".into(), sub(spectral(&with(cfg, &[("run", "a", "auto")])?)?));
        }
        Example::Bessel => {
            let quad = cfg.quadrature();
            let k = BesselKernel::new();
            let mut split = serde_json::Map::new();
            for x in [5.0, 20.0, 100.0] {
                let (below, above) = k.two_step_split(x, &quad)?;
                split.insert(fmt_float(x), json!({ "below": num(x * x * below), "above": num(x * x * above) }));
            }
            out.insert("scaled_two_step_split".into(), Value::Object(split));
            out.insert("a_free_trace".into(), num(a_free_trace(&k, &quad)?.value));
            out.insert("b_test".into(), sub(criterion(&with(cfg, &[("run", "method", "cor36")])?)?));
            out.insert("spectral_auto".into(), sub(spectral(cfg)?));
        }
        Example::MeanField => {
            for a in ["0.5", "1", "2"] {
                let c = with(cfg, &[("run", "a", a)])?;
                out.insert(format!("spectral_a={a}"), sub(spectral(&c)?));
                out.insert(format!("pair_sequence_a={a}"), sub(criterion(&with(&c, &[("run", "method", "pair_sequence")])?)?));
            }
            out.insert("spectral_auto".into(), sub(spectral(cfg)?));
        }
        Example::Kpp => {
            let quad = cfg.quadrature();
            let kernel = cfg.require_kernel()?;
            out.insert("row_mass_error_0_1_5".into(), num(row_mass_error(kernel.as_ref(), &[0.0, 1.0, 5.0], &quad)?));
            out.insert("trace".into(), sub(trace(cfg)?));
            out.insert("spectral".into(), sub(spectral(cfg)?));
        }
    }
    Ok((Value::Object(out), json!({}), None, Vec::new()))
}
