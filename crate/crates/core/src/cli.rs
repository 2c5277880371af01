//! Command-line front end.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 solver failure,
//! 3 verification failure.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::analysis::{expected_npv_ge, npv_by_type, segments, two_point_example, variance_sweep_beta};
use crate::config::{parse_distribution, ExperimentConfig, OUTPUT_DIR_ENV};
use crate::demand::{DemandFunction, Regime};
use crate::endo_policy::{
    ge_constant_elasticity, ge_from_signal, ge_increasing_elasticity, ge_value_constant, EndoModel, EndoParams,
};
use crate::error::{Error, Result};
use crate::exo_policy::{le_trajectory_exo, uniform_closed_form, ExoModel, ExoParams};
use crate::hybrid::{inclusiveness_compare, relative_advantage, EndoConstModel, HybridModel};
use crate::income_dist::IncomeDistribution;
use crate::mc_sim::{simulate_cohort, SimConfig, SimPolicy};
use crate::output::{to_json_string, write_atomic, Cell, Table};
use crate::value_fn::ViConfig;
use crate::verify::{run_suite, Suite};

pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "dynlend", version, about = "Optimal dynamic lending policies")]
pub struct Cli {
    /// JSON experiment configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file (written atomically).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output directory; the file is named after the subcommand.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads for grid and path parallelism.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Exo,
    Endo,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fixed-discount model: threshold, value function and policy.
    SolveExo(SolveExoArgs),
    /// Endogenous-discount model, dispatched on the demand elasticity regime.
    SolveEndo(SolveEndoArgs),
    /// Hybrid policies driven by an income signal.
    Hybrid(HybridArgs),
    /// NPV by default period and the three income segments.
    Segment(SegmentArgs),
    /// Expected NPV across symmetric Beta incomes of varying variance.
    SweepVariance(SweepArgs),
    /// Two-point income example comparing policies A and B.
    TwoPoint(TwoPointArgs),
    /// Monte Carlo cohort simulation.
    Simulate(SimulateArgs),
    /// Runs the property suite and prints one PASS/FAIL line per check.
    Verify(VerifyArgs),
}

#[derive(Debug, Args, Default)]
pub struct ModelArgs {
    #[arg(long)]
    pub rho: Option<f64>,
    /// `uniform`, `beta:a,b`, `gamma:shape,scale`, `weibull:shape,scale`,
    /// `two_point:center,delta` or a JSON object.
    #[arg(long)]
    pub dist: Option<String>,
}

#[derive(Debug, Args, Default)]
pub struct SolverArgs {
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolveTable {
    Summary,
    ValueFunction,
}

#[derive(Debug, Args)]
pub struct SolveExoArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub d: Option<f64>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum, default_value = "summary")]
    pub table: SolveTable,
}

#[derive(Debug, Args, Default)]
pub struct DemandArgs {
    /// Constant elasticity exponent.
    #[arg(long, conflicts_with = "demand")]
    pub alpha: Option<f64>,
    /// Demand as a JSON object, e.g. `{"kind":"exponential","params":{"rate":3}}`.
    #[arg(long)]
    pub demand: Option<String>,
}

#[derive(Debug, Args)]
pub struct SolveEndoArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub demand: DemandArgs,
    /// Income signal (lower bound on income); 0 means no information.
    #[arg(long)]
    pub x0: Option<f64>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum, default_value = "summary")]
    pub table: SolveTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HybridTable {
    Npv,
    Inclusiveness,
}

#[derive(Debug, Args)]
pub struct HybridArgs {
    #[arg(long, value_enum, default_value = "exo")]
    pub model: ModelKind,
    #[command(flatten)]
    pub base: ModelArgs,
    #[arg(long)]
    pub d: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Number of evenly spaced signals on [0, 1).
    #[arg(long, default_value_t = 200)]
    pub x0_points: usize,
    #[arg(long, value_enum, default_value = "npv")]
    pub table: HybridTable,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub d: Option<f64>,
    /// Last default period reported.
    #[arg(long, default_value_t = 40)]
    pub k_max: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub a_min: Option<f64>,
    #[arg(long)]
    pub a_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TwoPointArgs {
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Mean income.
    #[arg(long)]
    pub u: Option<f64>,
    /// Number of spreads on [0, u].
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "exo")]
    pub model: ModelKind,
    #[command(flatten)]
    pub base: ModelArgs,
    #[arg(long)]
    pub d: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub antithetic: bool,
    #[arg(long)]
    pub horizon: Option<usize>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// all, dist, demand, exo, endo, hybrid, analysis or sim.
    #[arg(long, default_value = "all")]
    pub suite: String,
}

/// Emitted result: a CSV table and its JSON counterpart.
struct Report {
    stem: &'static str,
    table: Table,
    json: Value,
}

/// Summary report: CSV is `key,value` rows, JSON an object.
fn summary(stem: &'static str, entries: Vec<(&str, Cell)>) -> Report {
    let mut table = Table::new(["key", "value"]);
    let mut map = Map::new();
    for (k, v) in entries {
        map.insert(k.to_string(), cell_json(&v));
        table.push(vec![Cell::from(k), v]);
    }
    Report { stem, table, json: Value::Object(map) }
}

fn tabular(stem: &'static str, table: Table, meta: Vec<(&str, Value)>) -> Report {
    let mut map: Map<String, Value> = meta.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    map.insert("rows".into(), table.to_json_value());
    Report { stem, table, json: Value::Object(map) }
}

fn cell_json(c: &Cell) -> Value {
    match c {
        Cell::Num(v) => json!(v),
        Cell::Int(v) => json!(v),
        Cell::Text(s) => json!(s),
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Io(_) | Error::InvalidParameter(_) => EXIT_CONFIG,
        _ => EXIT_SOLVER,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_with_io<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
            } else {
                let _ = write!(stdout, "{text}");
            }
            return code;
        }
    };
    match run(&cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<i32> {
    let cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let pool = match cli.jobs {
        Some(0) => return Err(Error::Config("--jobs must be at least 1".into())),
        Some(n) => {
            Some(rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| Error::Config(e.to_string()))?)
        }
        None => None,
    };
    if let Command::Verify(args) = &cli.command {
        let suite: Suite = args.suite.parse()?;
        let results = match &pool {
            Some(p) => p.install(|| run_suite(suite)),
            None => run_suite(suite),
        };
        let mut failed = 0;
        for r in &results {
            writeln!(stdout, "{r}")?;
            failed += usize::from(!r.passed);
        }
        writeln!(stdout, "{} checks, {} failed", results.len(), failed)?;
        return Ok(if failed == 0 { 0 } else { EXIT_VERIFY });
    }
    let report = match &pool {
        Some(p) => p.install(|| dispatch(&cli.command, &cfg))?,
        None => dispatch(&cli.command, &cfg)?,
    };
    emit(cli, &cfg, &report, stdout)?;
    Ok(0)
}

fn emit(cli: &Cli, cfg: &ExperimentConfig, report: &Report, stdout: &mut dyn Write) -> Result<()> {
    let format = match (cli.format, cfg.output.format.as_deref()) {
        (Some(f), _) => f,
        (None, Some("csv")) | (None, None) => Format::Csv,
        (None, Some("json")) => Format::Json,
        (None, Some(other)) => return Err(Error::Config(format!("unknown output format '{other}'"))),
    };
    let (text, ext) = match format {
        Format::Csv => (report.table.to_csv(), "csv"),
        Format::Json => (to_json_string(&report.json)?, "json"),
    };
    let dir = cli
        .out_dir
        .clone()
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from));
    let path = match (&cli.out, dir) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(d)) => Some(d.join(format!("{}.{ext}", report.stem))),
        (None, None) => None,
    };
    match path {
        Some(p) => write_atomic(&p, &text),
        None => Ok(stdout.write_all(text.as_bytes())?),
    }
}

fn resolve_dist(arg: &Option<String>, cfg: &ExperimentConfig) -> Result<IncomeDistribution> {
    match (arg, &cfg.distribution) {
        (Some(s), _) => parse_distribution(s),
        (None, Some(d)) => d.clone().validated(),
        (None, None) => Ok(IncomeDistribution::uniform()),
    }
}

fn resolve_rho(arg: Option<f64>, cfg: &ExperimentConfig) -> f64 {
    arg.or(cfg.model.rho).unwrap_or(0.95)
}

fn resolve_exo(rho: Option<f64>, d: Option<f64>, cfg: &ExperimentConfig) -> Result<ExoParams> {
    ExoParams::new(resolve_rho(rho, cfg), d.or(cfg.model.d).unwrap_or(5.0 / 6.0))
}

fn resolve_endo(
    rho: Option<f64>,
    alpha: Option<f64>,
    demand: Option<&str>,
    cfg: &ExperimentConfig,
) -> Result<EndoParams> {
    let dem = match (alpha, demand, &cfg.demand) {
        (Some(a), _, _) => DemandFunction::constant_elasticity(a)?,
        (None, Some(s), _) => DemandFunction::from_json(s)?,
        (None, None, Some(spec)) => DemandFunction::from_spec(spec.clone())?,
        (None, None, None) => DemandFunction::constant_elasticity(1.0)?,
    };
    EndoParams::new(resolve_rho(rho, cfg), dem)
}

fn resolve_solver(args: &SolverArgs, cfg: &ExperimentConfig) -> Result<ViConfig> {
    let mut vi = cfg.solver.clone().unwrap_or_default();
    if let Some(n) = args.grid {
        vi.grid_size = n;
    }
    if let Some(t) = args.tol {
        vi.tol = t;
    }
    vi.validate()?;
    Ok(vi)
}

fn dispatch(cmd: &Command, cfg: &ExperimentConfig) -> Result<Report> {
    match cmd {
        Command::SolveExo(a) => solve_exo(a, cfg),
        Command::SolveEndo(a) => solve_endo(a, cfg),
        Command::Hybrid(a) => hybrid(a, cfg),
        Command::Segment(a) => segment(a, cfg),
        Command::SweepVariance(a) => sweep_variance(a, cfg),
        Command::TwoPoint(a) => two_point(a, cfg),
        Command::Simulate(a) => simulate(a, cfg),
        Command::Verify(_) => unreachable!("handled before dispatch"),
    }
}

fn solve_exo(a: &SolveExoArgs, cfg: &ExperimentConfig) -> Result<Report> {
    let dist = resolve_dist(&a.model.dist, cfg)?;
    let params = resolve_exo(a.model.rho, a.d, cfg)?;
    let vi = resolve_solver(&a.solver, cfg)?;
    let model = ExoModel::solve(&dist, &params, &vi)?;
    if a.table == SolveTable::ValueFunction {
        let mut t = Table::new(["x", "value", "policy"]);
        for (i, &x) in model.vf.points().iter().enumerate() {
            t.push(vec![x.into(), model.vf.values[i].into(), model.vf.policy[i].into()]);
        }
        return Ok(tabular("solve-exo", t, vec![("x_bar", json!(model.x_bar))]));
    }
    let mut entries = vec![
        ("distribution", Cell::from(dist.name())),
        ("rho", params.rho.into()),
        ("d", params.d.into()),
        ("x_bar", model.x_bar.into()),
        ("dynamic_npv", model.dynamic_npv().into()),
        ("safe_multiplier", params.safe_multiplier().into()),
        ("iterations", model.vf.iterations.into()),
        ("residual", model.vf.residual.into()),
    ];
    if matches!(dist, IncomeDistribution::Uniform { upper } if upper == 1.0) {
        let cf = uniform_closed_form(&params)?;
        entries.push(("closed_form_npv", cf.c.into()));
        entries.push(("policy_slope", cf.m.into()));
        entries.push(("policy_intercept", cf.n.into()));
    }
    Ok(summary("solve-exo", entries))
}

fn solve_endo(a: &SolveEndoArgs, cfg: &ExperimentConfig) -> Result<Report> {
    let dist = resolve_dist(&a.model.dist, cfg)?;
    let params = resolve_endo(a.model.rho, a.demand.alpha, a.demand.demand.as_deref(), cfg)?;
    let x0 = a.x0.or(cfg.model.x0).unwrap_or(0.0);
    let st = params.stationary()?;
    let regime = params.regime();
    if a.table == SolveTable::ValueFunction {
        let vi = resolve_solver(&a.solver, cfg)?;
        let model = EndoModel::solve(&dist, &params, &vi)?;
        let disc = model.vf.discount.clone().unwrap_or_default();
        let mut t = Table::new(["x", "value", "repayment", "discount"]);
        for (i, &x) in model.vf.points().iter().enumerate() {
            t.push(vec![x.into(), model.vf.values[i].into(), model.vf.policy[i].into(), disc[i].into()]);
        }
        return Ok(tabular(
            "solve-endo",
            t,
            vec![("x_bar", json!(model.x_bar)), ("regime", json!(regime.to_string()))],
        ));
    }
    let mut entries = vec![
        ("regime", Cell::from(regime.to_string())),
        ("rho", params.rho.into()),
        ("x0", x0.into()),
        ("d_star", st.d_star.into()),
        ("s_star", st.s_star.into()),
        ("beta", st.beta.into()),
    ];
    match regime {
        Regime::Constant => {
            let ge =
                if x0 == 0.0 { ge_constant_elasticity(&dist, &params)? } else { ge_from_signal(&dist, &params, x0)? };
            entries.extend([
                ("x_bar", ge.x_bar.into()),
                ("policy", Cell::from("grand_experiment")),
                ("y0", ge.y0.into()),
                ("d0", ge.d0.into()),
                ("npv", ge_value_constant(&dist, &params, x0)?.into()),
            ]);
        }
        Regime::Increasing => {
            let ge = ge_increasing_elasticity(&dist, &params, x0)?;
            entries.extend([
                ("x_bar", ge.x_bar.into()),
                ("policy", Cell::from("grand_experiment")),
                ("y0", ge.y0.into()),
                ("d0", ge.d0.into()),
            ]);
        }
        Regime::Decreasing => {
            let vi = resolve_solver(&a.solver, cfg)?;
            let model = EndoModel::solve(&dist, &params, &vi)?;
            let (y0, d0) = model.policy_at(x0);
            entries.extend([
                ("x_bar", model.x_bar.into()),
                ("policy", Cell::from("lean_experimentation")),
                ("y0", y0.into()),
                ("d0", d0.into()),
                ("npv", model.vf.value_at(x0).into()),
                ("iterations", model.vf.iterations.into()),
            ]);
        }
        Regime::Mixed => {
            return Err(Error::Regime { expected: "monotone elasticity".into(), found: regime.to_string() });
        }
    }
    Ok(summary("solve-endo", entries))
}

fn signal_grid(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Config("--x0-points must be positive".into()));
    }
    Ok((0..n).map(|i| i as f64 / n as f64).collect())
}

fn hybrid(a: &HybridArgs, cfg: &ExperimentConfig) -> Result<Report> {
    let dist = resolve_dist(&a.base.dist, cfg)?;
    let grid = signal_grid(a.x0_points)?;
    if a.table == HybridTable::Inclusiveness {
        if a.model != ModelKind::Endo {
            return Err(Error::Config("the inclusiveness table needs --model endo".into()));
        }
        let params = resolve_endo(a.base.rho, a.alpha, None, cfg)?;
        let rows = inclusiveness_compare(&dist, &params, &grid)?;
        let mut t = Table::new([
            "x0",
            "discount_dyn",
            "discount_hyb",
            "loan_dyn",
            "loan_hyb",
            "retention_dyn",
            "retention_hyb",
            "hybrid_dominates",
        ]);
        for r in &rows {
            t.push(vec![
                r.x0.into(),
                r.discount_dyn.into(),
                r.discount_hyb.into(),
                r.loan_dyn.into(),
                r.loan_hyb.into(),
                r.retention_dyn.into(),
                r.retention_hyb.into(),
                Cell::from(if r.hybrid_dominates() { "true" } else { "false" }),
            ]);
        }
        return Ok(tabular("hybrid", t, vec![]));
    }
    let exo;
    let endo;
    let model = match a.model {
        ModelKind::Exo => {
            exo = ExoModel::solve(&dist, &resolve_exo(a.base.rho, a.d, cfg)?, &resolve_solver(&a.solver, cfg)?)?;
            HybridModel::Exo(&exo)
        }
        ModelKind::Endo => {
            endo = EndoConstModel::new(&dist, &resolve_endo(a.base.rho, a.alpha, None, cfg)?)?;
            HybridModel::EndoConstant(&endo)
        }
    };
    let pd = model.dynamic_npv();
    let mut t = Table::new(["x0", "hybrid_npv", "dynamic_npv", "branch"]);
    for &x0 in &grid {
        let branch = if x0 < model.x_bar() { "below_threshold" } else { "above_threshold" };
        t.push(vec![x0.into(), model.hybrid_npv(x0).into(), pd.into(), branch.into()]);
    }
    let adv = relative_advantage(model)?;
    Ok(tabular(
        "hybrid",
        t,
        vec![("x_bar", json!(model.x_bar())), ("dynamic_npv", json!(pd)), ("relative_advantage", json!(adv))],
    ))
}

fn segment(a: &SegmentArgs, cfg: &ExperimentConfig) -> Result<Report> {
    let dist = resolve_dist(&a.model.dist, cfg)?;
    let params = resolve_exo(a.model.rho, a.d, cfg)?;
    let horizon = a.k_max.max(1) * 10;
    let traj = if matches!(dist, IncomeDistribution::Uniform { upper } if upper == 1.0) {
        uniform_closed_form(&params)?.trajectory(0.0, horizon)
    } else {
        let model = ExoModel::solve(&dist, &params, &resolve_solver(&a.solver, cfg)?)?;
        le_trajectory_exo(&model, 0.0, horizon)
    };
    let rep = npv_by_type(&traj, &params, a.k_max);
    let seg = segments(&rep, dist.support_upper());
    let mut t = Table::new(["k", "repayment", "pv_interest", "pv_default_loss", "npv", "profitable"]);
    for ty in &rep.types {
        let prof = if ty.npv >= 0.0 { "true" } else { "false" };
        t.push(vec![
            ty.k.into(),
            ty.repayment.into(),
            ty.pv_interest.into(),
            ty.pv_default_loss.into(),
            ty.npv.into(),
            prof.into(),
        ]);
    }
    Ok(tabular(
        "segment",
        t,
        vec![
            ("k_star", json!(rep.k_star)),
            ("theta_star", json!(rep.theta_star)),
            ("x_bar", json!(rep.x_bar)),
            ("npv_infinity", json!(rep.npv_infinity)),
            ("segments", serde_json::to_value(seg)?),
        ],
    ))
}

fn sweep_variance(a: &SweepArgs, cfg: &ExperimentConfig) -> Result<Report> {
    let params = resolve_endo(a.rho, a.alpha, None, cfg)?;
    let lo = a.a_min.or(cfg.sweep.a_min).unwrap_or(0.02);
    let hi = a.a_max.or(cfg.sweep.a_max).unwrap_or(12.0);
    let n = a.points.or(cfg.sweep.points).unwrap_or(60);
    if !(lo > 0.0 && hi > lo && n >= 2) {
        return Err(Error::Config(format!("bad sweep range [{lo}, {hi}] with {n} points")));
    }
    let grid: Vec<f64> = (0..n).map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp()).collect();
    let sweep = variance_sweep_beta(&params, &grid)?;
    let mut t = Table::new(["a", "variance", "expected_npv", "x_bar"]);
    for r in &sweep.rows {
        t.push(vec![r.a.into(), r.variance.into(), r.expected_npv.into(), r.x_bar.into()]);
    }
    Ok(tabular(
        "sweep-variance",
        t,
        vec![
            ("u_shape", json!(sweep.u_shape)),
            ("bernoulli_limit", json!(sweep.bernoulli_limit)),
            ("degenerate_limit", json!(sweep.degenerate_limit)),
        ],
    ))
}

fn two_point(a: &TwoPointArgs, cfg: &ExperimentConfig) -> Result<Report> {
    let params = resolve_endo(a.rho, a.alpha, None, cfg)?;
    let u = a.u.or(cfg.sweep.u).unwrap_or(0.5);
    let n = a.points.or(cfg.sweep.points).unwrap_or(51);
    if n < 2 {
        return Err(Error::Config("--points must be at least 2".into()));
    }
    let deltas: Vec<f64> = (0..n).map(|i| u * i as f64 / (n - 1) as f64).collect();
    let rep = two_point_example(&params, u, &deltas)?;
    let mut t = Table::new(["delta", "pi_a", "pi_b", "winner"]);
    for r in &rep.rows {
        let w = serde_json::to_value(r.winner)?;
        t.push(vec![r.delta.into(), r.pi_a.into(), r.pi_b.into(), Cell::from(w.as_str().unwrap_or_default())]);
    }
    Ok(tabular("two-point", t, vec![("crossing", json!(rep.crossing)), ("d0", json!(rep.d0))]))
}

fn simulate(a: &SimulateArgs, cfg: &ExperimentConfig) -> Result<Report> {
    let dist = resolve_dist(&a.base.dist, cfg)?;
    let sim = &cfg.simulation;
    let defaults = SimConfig::default();
    let mut sc = SimConfig {
        n_paths: a.paths.or(sim.n_paths).unwrap_or(defaults.n_paths),
        seed: a.seed.or(sim.seed).unwrap_or(defaults.seed),
        horizon: a.horizon.or(sim.horizon).unwrap_or(defaults.horizon),
        antithetic: a.antithetic || sim.antithetic.unwrap_or(false),
        ..defaults
    };
    let (policy, analytic) = match a.model {
        ModelKind::Exo => {
            let params = resolve_exo(a.base.rho, a.d, cfg)?;
            sc.rho = params.rho;
            let model = ExoModel::solve(&dist, &params, &resolve_solver(&a.solver, cfg)?)?;
            let traj = le_trajectory_exo(&model, 0.0, sc.horizon);
            (SimPolicy::exogenous(&traj, params.d)?, model.dynamic_npv())
        }
        ModelKind::Endo => {
            let params = resolve_endo(a.base.rho, a.alpha, None, cfg)?;
            sc.rho = params.rho;
            let ge = ge_constant_elasticity(&dist, &params)?;
            let npv = expected_npv_ge(&dist, &params)?;
            (SimPolicy::grand_experiment(&ge, params.demand.clone()), npv)
        }
    };
    let r = simulate_cohort(&dist, &policy, &sc)?;
    let z = if r.std_error > 0.0 { (r.mean_npv - analytic) / r.std_error } else { 0.0 };
    Ok(summary(
        "simulate",
        vec![
            ("n_paths", r.n_paths.into()),
            ("seed", sc.seed.into()),
            ("antithetic", Cell::from(if sc.antithetic { "true" } else { "false" })),
            ("mean_npv", r.mean_npv.into()),
            ("std_error", r.std_error.into()),
            ("analytic_npv", analytic.into()),
            ("z_score", z.into()),
            ("balked", r.balked.into()),
            ("never_defaulted", r.never_defaulted.into()),
        ],
    ))
}
