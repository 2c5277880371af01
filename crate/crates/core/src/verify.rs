//! Property suite run by `dynlend verify`.

use std::fmt;
use std::str::FromStr;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{
    expected_npv_ge, family_threshold, npv_by_type, quasiconvexity_check, segments, single_crossing_check,
    two_point_example, variance_sweep_beta, SymmetricBetaFamily,
};
use crate::demand::{solve_d_star, DemandFunction};
use crate::endo_policy::{
    ge_constant_elasticity, ge_increasing_elasticity, ge_residual, le_decreasing_elasticity, threshold_endo, EndoModel,
    EndoParams,
};
use crate::error::Error;
use crate::exo_policy::{le_trajectory_exo, threshold_exo, uniform_closed_form, ExoModel, ExoParams};
use crate::hybrid::{inclusiveness_compare, EndoConstModel, HybridModel};
use crate::income_dist::IncomeDistribution;
use crate::mc_sim::{empirical_segments, simulate_cohort, SimConfig, SimPolicy};
use crate::numeric::GaussLegendre;
use crate::value_fn::ViConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Dist,
    Demand,
    Exo,
    Endo,
    Hybrid,
    Analysis,
    Sim,
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        Ok(match s {
            "all" => Suite::All,
            "dist" => Suite::Dist,
            "demand" => Suite::Demand,
            "exo" => Suite::Exo,
            "endo" => Suite::Endo,
            "hybrid" => Suite::Hybrid,
            "analysis" => Suite::Analysis,
            "sim" => Suite::Sim,
            other => return Err(Error::Config(format!("unknown suite '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub suite: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}::{} {}", self.suite, self.name, self.detail)
    }
}

type Check = fn() -> Result<String, String>;

fn e2s(e: Error) -> String {
    e.to_string()
}

fn ensure(cond: bool, detail: String) -> Result<String, String> {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

struct Draw(ChaCha8Rng);

impl Draw {
    fn new(seed: u64) -> Self {
        Draw(ChaCha8Rng::seed_from_u64(seed))
    }
    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * ((self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64)
    }
    fn log_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.uniform(lo.ln(), hi.ln()).exp()
    }
}

fn uniform_exo() -> ExoParams {
    ExoParams { rho: 0.95, d: 5.0 / 6.0 }
}

fn linear_endo() -> Result<EndoParams, String> {
    EndoParams::new(0.95, DemandFunction::constant_elasticity(1.0).map_err(e2s)?).map_err(e2s)
}

fn dist_assumption1() -> Result<String, String> {
    let mut r = Draw::new(11);
    let mut n = 0;
    for _ in 0..10 {
        let fams = [
            IncomeDistribution::beta(r.log_uniform(0.2, 12.0), r.log_uniform(0.2, 12.0)),
            IncomeDistribution::gamma(r.log_uniform(0.2, 12.0), r.log_uniform(0.2, 5.0)),
            IncomeDistribution::weibull(r.log_uniform(0.3, 8.0), r.log_uniform(0.2, 5.0)),
        ];
        for d in fams {
            let d = d.map_err(e2s)?;
            let rep = d.check_assumption1(10_000).map_err(e2s)?;
            if !rep.holds() {
                return Err(format!("{d:?}: {rep:?}"));
            }
            n += 1;
        }
    }
    Ok(format!("{n} parameterisations"))
}

fn dist_inverse_roundtrip() -> Result<String, String> {
    let mut r = Draw::new(12);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let d = IncomeDistribution::beta(r.log_uniform(0.5, 5.0), r.log_uniform(0.5, 5.0)).map_err(e2s)?;
        let x = r.uniform(0.01, 0.95);
        let back = d.g_inverse(d.g_value(x).map_err(e2s)?).map_err(e2s)?;
        worst = worst.max((back - x).abs());
    }
    ensure(worst <= 1e-8, format!("max error {worst:.2e}"))
}

fn dist_conditional_survival() -> Result<String, String> {
    let d = IncomeDistribution::beta(2.0, 3.0).map_err(e2s)?;
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let x = i as f64 / 60.0;
        let y = x + 0.1;
        let c = d.conditional_survival(y, x).map_err(e2s)?;
        worst = worst.max((c * d.survival(x) - d.survival(y)).abs());
    }
    ensure(worst <= 1e-12, format!("max error {worst:.2e}"))
}

fn dist_pdf_mass() -> Result<String, String> {
    let gl = GaussLegendre::new(64);
    let mut worst: f64 = 0.0;
    for d in [
        IncomeDistribution::beta(2.0, 5.0).map_err(e2s)?,
        IncomeDistribution::gamma(3.0, 0.5).map_err(e2s)?,
        IncomeDistribution::weibull(1.5, 1.0).map_err(e2s)?,
    ] {
        let up = d.truncation_upper();
        let mass = gl.integrate_composite(|x| d.pdf(x), 0.0, up, 64);
        worst = worst.max((mass - d.cdf(up)).abs());
    }
    // Weibull(1.5) has a sqrt-type endpoint at 0, which limits the quadrature
    ensure(worst <= 1e-7, format!("max |mass - F(upper)| {worst:.2e}"))
}

fn demand_d_star_monotone() -> Result<String, String> {
    let mut prev = 0.0;
    for i in 1..=9 {
        let dem = DemandFunction::constant_elasticity(i as f64 / 10.0).map_err(e2s)?;
        let d = solve_d_star(&dem, 0.95).map_err(e2s)?;
        if d <= prev {
            return Err(format!("d* not increasing at alpha = {}", i as f64 / 10.0));
        }
        prev = d;
    }
    Ok("alpha 0.1..0.9".into())
}

fn demand_identity() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for dem in [
        DemandFunction::constant_elasticity(0.4).map_err(e2s)?,
        DemandFunction::exponential(3.0).map_err(e2s)?,
        DemandFunction::power_linear(0.5, 0.2).map_err(e2s)?,
    ] {
        let p = EndoParams::new(0.95, dem).map_err(e2s)?;
        let st = p.stationary().map_err(e2s)?;
        worst = worst.max((0.95 * st.beta - p.demand.eta(st.d_star)).abs());
    }
    ensure(worst <= 1e-10, format!("max |rho beta - eta(d*)| {worst:.2e}"))
}

fn exo_closed_form() -> Result<String, String> {
    let cf = uniform_closed_form(&uniform_exo()).map_err(e2s)?;
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        worst = worst.max(cf.bellman_residual(cf.x_bar * (i as f64 + 0.5) / 100.0));
    }
    ensure(
        cf.m > 0.0 && cf.m < 1.0 && ((1.0 - cf.m) * cf.x_bar - cf.n).abs() <= 1e-10 && worst <= 1e-8,
        format!("m = {:.7}, Bellman residual {worst:.2e}", cf.m),
    )
}

fn exo_value_iteration() -> Result<String, String> {
    let p = uniform_exo();
    let cf = uniform_closed_form(&p).map_err(e2s)?;
    let m = ExoModel::solve(&IncomeDistribution::uniform(), &p, &ViConfig::default()).map_err(e2s)?;
    let pts = m.vf.points();
    let mut err: f64 = 0.0;
    let mut monotone = true;
    let mut above = true;
    for (i, &x) in pts.iter().enumerate() {
        if x < cf.x_bar {
            err = err.max((m.vf.values[i] - cf.value(x)).abs());
        }
        above &= m.vf.policy[i] >= x;
        if i > 0 {
            monotone &= m.vf.policy[i] >= m.vf.policy[i - 1];
        }
    }
    let traj = le_trajectory_exo(&m, 0.0, 500);
    let h = pts[1] - pts[0];
    let sup = traj.iter().cloned().fold(0.0, f64::max);
    ensure(
        err <= 1e-4 && monotone && above && (sup - m.x_bar).abs() <= 2.0 * h,
        format!("sup error {err:.2e}, trajectory gap {:.2e}", (sup - m.x_bar).abs()),
    )
}

fn endo_threshold() -> Result<String, String> {
    let p = linear_endo()?;
    let xb = threshold_endo(&IncomeDistribution::uniform(), &p).map_err(e2s)?;
    ensure((xb - 1.0 / 3.0).abs() <= 1e-10, format!("x_bar = {xb}"))
}

fn endo_ge_perturbation() -> Result<String, String> {
    let dist = IncomeDistribution::uniform();
    let p = linear_endo()?;
    let st = p.stationary().map_err(e2s)?;
    let ge = ge_constant_elasticity(&dist, &p).map_err(e2s)?;
    let obj = |y: f64, d: f64| -p.demand.s(d) * d * y + p.rho * p.demand.s(d) * dist.survival(y) * st.beta * y;
    let base = obj(ge.y0, ge.d0);
    for (dy, dd) in [(1e-3, 0.0), (-1e-3, 0.0), (0.0, 1e-3), (0.0, -1e-3)] {
        if obj(ge.y0 + dy, ge.d0 + dd) > base {
            return Err(format!("perturbation ({dy}, {dd}) improves the objective"));
        }
    }
    Ok(format!("y0 = {:.6}, d0 = {:.6}", ge.y0, ge.d0))
}

fn endo_decreasing() -> Result<String, String> {
    let dist = IncomeDistribution::uniform();
    let p = EndoParams::new(0.95, DemandFunction::exponential(3.0).map_err(e2s)?).map_err(e2s)?;
    let m = le_decreasing_elasticity(&dist, &p, &ViConfig::default().with_grid(300)).map_err(e2s)?;
    let pts = m.vf.points();
    let disc = m.vf.discount.as_ref().ok_or("missing discount policy")?;
    let mut jerr: f64 = 0.0;
    let mut derr: f64 = 0.0;
    for i in 0..pts.len() {
        if pts[i] >= m.x_bar {
            jerr = jerr.max((m.vf.values[i] - m.stationary.beta * pts[i]).abs());
            derr = derr.max((disc[i] - m.stationary.d_star).abs());
        }
    }
    ensure(jerr <= 1e-8 && derr <= 1e-6, format!("J error {jerr:.2e}, d error {derr:.2e}"))
}

fn endo_increasing_root() -> Result<String, String> {
    let dist = IncomeDistribution::uniform();
    let p = EndoParams::new(0.95, DemandFunction::power_linear(0.5, 0.2).map_err(e2s)?).map_err(e2s)?;
    let st = p.stationary().map_err(e2s)?;
    let x0 = 0.1;
    let lo = ge_residual(&dist, &p, x0, 1e-9).map_err(e2s)?;
    let hi = ge_residual(&dist, &p, x0, st.d_star).map_err(e2s)?;
    let ge = ge_increasing_elasticity(&dist, &p, x0).map_err(e2s)?;
    ensure(
        lo < 0.0 && hi > 0.0 && ge.d0 < st.d_star && ge.y0 >= ge.x_bar,
        format!("d0 = {:.6}, y0 = {:.6}", ge.d0, ge.y0),
    )
}

fn endo_constant_recovers_ge() -> Result<String, String> {
    let dist = IncomeDistribution::uniform();
    let p = linear_endo()?;
    let m = EndoModel::solve(&dist, &p, &ViConfig::default().with_grid(400)).map_err(e2s)?;
    let cm = EndoConstModel::new(&dist, &p).map_err(e2s)?;
    let pts = m.vf.points();
    let h = pts[1] - pts[0];
    let mut jerr: f64 = 0.0;
    let mut yerr: f64 = 0.0;
    for (i, &x) in pts.iter().enumerate() {
        jerr = jerr.max((m.vf.values[i] - cm.value(x)).abs());
        if x < m.x_bar - h {
            yerr = yerr.max((m.vf.policy[i] - m.x_bar).abs());
        }
    }
    ensure(jerr <= 1e-4 && yerr <= h, format!("J error {jerr:.2e}, jump error {yerr:.2e}"))
}

fn hybrid_dominance() -> Result<String, String> {
    let dist = IncomeDistribution::uniform();
    let exo = ExoModel::solve(&dist, &uniform_exo(), &ViConfig::default()).map_err(e2s)?;
    let endo = EndoConstModel::new(&dist, &linear_endo()?).map_err(e2s)?;
    for model in [HybridModel::Exo(&exo), HybridModel::EndoConstant(&endo)] {
        let pd = model.dynamic_npv();
        for i in 0..200 {
            let x0 = i as f64 / 200.0;
            if model.hybrid_npv(x0) < pd {
                return Err(format!("hybrid below dynamic at x0 = {x0}"));
            }
        }
        let xb = model.x_bar();
        let gap = (model.hybrid_npv(xb - 1e-12) - model.hybrid_npv(xb)).abs();
        if gap > 1e-6 {
            return Err(format!("jump {gap:.2e} at threshold"));
        }
    }
    Ok("200 signals, both models".into())
}

fn hybrid_inclusiveness() -> Result<String, String> {
    let grid: Vec<f64> = (0..200).map(|i| i as f64 / 200.0).collect();
    let rows = inclusiveness_compare(&IncomeDistribution::uniform(), &linear_endo()?, &grid).map_err(e2s)?;
    let bad = rows.iter().filter(|r| !r.hybrid_dominates()).count();
    ensure(bad == 0, format!("{bad} violating rows"))
}

fn analysis_segmentation() -> Result<String, String> {
    let mut notes = Vec::new();
    for (d, monotone) in [(0.67, true), (0.83, false)] {
        let p = ExoParams::new(0.95, d).map_err(e2s)?;
        let cf = uniform_closed_form(&p).map_err(e2s)?;
        let rep = npv_by_type(&cf.trajectory(0.0, 400), &p, 60);
        let k = rep.k_star.ok_or("no profitable type")?;
        let seg = segments(&rep, 1.0);
        let npv: Vec<f64> = rep.types.iter().map(|t| t.npv).collect();
        let is_mono = npv[..=k].windows(2).all(|w| w[1] >= w[0]);
        let tail_ok = npv[k..].windows(2).all(|w| w[1] >= w[0]);
        let nonempty = !seg.unprofitable.is_empty()
            && seg.profitable.is_some_and(|s| !s.is_empty())
            && !seg.creditworthy.is_empty();
        if !(npv[0] < 0.0 && tail_ok && nonempty && is_mono == monotone) {
            return Err(format!("d = {d}: k* = {k}, monotone below k* = {is_mono}"));
        }
        notes.push(format!("d={d}: k*={k}"));
    }
    Ok(notes.join(", "))
}

fn analysis_u_shape() -> Result<String, String> {
    let grid: Vec<f64> =
        (0..60).map(|i| (0.02f64.ln() + (12f64.ln() - 0.02f64.ln()) * i as f64 / 59.0).exp()).collect();
    for alpha in [0.3, 0.5, 0.9] {
        let p = EndoParams::new(0.95, DemandFunction::constant_elasticity(alpha).map_err(e2s)?).map_err(e2s)?;
        let sweep = variance_sweep_beta(&p, &grid).map_err(e2s)?;
        let st = p.stationary().map_err(e2s)?;
        let bern = 2f64.powf(-1.0 - alpha) * st.d_star.powf(1.0 + alpha) / alpha;
        let degen = 0.5 * (st.beta - 1.0);
        if !sweep.u_shape
            || (sweep.bernoulli_limit - bern).abs() > 1e-8
            || (sweep.degenerate_limit - degen).abs() > 1e-8
        {
            return Err(format!("alpha = {alpha}"));
        }
    }
    Ok("alpha 0.3, 0.5, 0.9".into())
}

fn analysis_two_point() -> Result<String, String> {
    let p = linear_endo()?;
    let deltas: Vec<f64> = (0..=50).map(|i| 0.5 * i as f64 / 50.0).collect();
    let rep = two_point_example(&p, 0.5, &deltas).map_err(e2s)?;
    let best: Vec<f64> = rep.rows.iter().map(|r| r.pi_a.max(r.pi_b)).collect();
    ensure(
        rep.rows[0].pi_b >= rep.rows[0].pi_a && rep.crossing.is_some() && crate::analysis::u_shape_verdict(&best),
        format!("crossing at {:?}", rep.crossing),
    )
}

fn analysis_structure() -> Result<String, String> {
    let mut r = Draw::new(13);
    for _ in 0..20 {
        let (a, b) = (r.log_uniform(0.25, 12.0), r.log_uniform(0.25, 12.0));
        let (a, b) = (a.min(b), a.max(b));
        let rep = single_crossing_check(&SymmetricBetaFamily, a, b, 10_000);
        if rep.crossing_count != 1 {
            return Err(format!("Beta({a:.3}) vs Beta({b:.3}): {} crossings", rep.crossing_count));
        }
        let alpha = r.uniform(0.1, 1.0);
        let grid: Vec<f64> =
            (0..30).map(|i| (0.25f64.ln() + (12f64.ln() - 0.25f64.ln()) * i as f64 / 29.0).exp()).collect();
        let xs: Vec<f64> = grid
            .iter()
            .map(|&a| family_threshold(&SymmetricBetaFamily, a, 1.0 / (alpha + 1.0)))
            .collect::<Result<_, _>>()
            .map_err(e2s)?;
        if !quasiconvexity_check(&xs) {
            return Err(format!("threshold not quasi-convex for alpha = {alpha:.3}"));
        }
    }
    Ok("20 pairs".into())
}

fn sim_agreement() -> Result<String, String> {
    let dist = IncomeDistribution::uniform();
    let p = uniform_exo();
    let m = ExoModel::solve(&dist, &p, &ViConfig::default()).map_err(e2s)?;
    let traj = le_trajectory_exo(&m, 0.0, 2000);
    let cfg = SimConfig { n_paths: 200_000, seed: 5, ..Default::default() };
    let r = simulate_cohort(&dist, &SimPolicy::exogenous(&traj, p.d).map_err(e2s)?, &cfg).map_err(e2s)?;
    let z_exo = (r.mean_npv - m.dynamic_npv()) / r.std_error;
    let again = simulate_cohort(&dist, &SimPolicy::exogenous(&traj, p.d).map_err(e2s)?, &cfg).map_err(e2s)?;
    let cmp = empirical_segments(&r, &npv_by_type(&traj, &p, 40), &dist).map_err(e2s)?;
    let ep = linear_endo()?;
    let ge = ge_constant_elasticity(&dist, &ep).map_err(e2s)?;
    let e = simulate_cohort(&dist, &SimPolicy::grand_experiment(&ge, ep.demand.clone()), &cfg).map_err(e2s)?;
    let z_endo = (e.mean_npv - expected_npv_ge(&dist, &ep).map_err(e2s)?) / e.std_error;
    ensure(
        z_exo.abs() <= 3.0 && z_endo.abs() <= 3.0 && again == r && cmp.passes_chi_square,
        format!("z_exo = {z_exo:.2}, z_endo = {z_endo:.2}, chi2 = {:.1}/{:.1}", cmp.chi_square, cmp.critical_value),
    )
}

fn exo_threshold_formula() -> Result<String, String> {
    let p = uniform_exo();
    let xb = threshold_exo(&IncomeDistribution::uniform(), &p).map_err(e2s)?;
    let oracle = (p.rho - p.d) / (2.0 * p.rho - p.d - p.d * p.rho);
    ensure((xb - oracle).abs() <= 1e-10, format!("x_bar = {xb}"))
}

fn registry() -> Vec<(Suite, &'static str, &'static str, Check)> {
    vec![
        (Suite::Dist, "dist", "assumption1_random_families", dist_assumption1 as Check),
        (Suite::Dist, "dist", "g_inverse_roundtrip", dist_inverse_roundtrip),
        (Suite::Dist, "dist", "conditional_survival_identity", dist_conditional_survival),
        (Suite::Dist, "dist", "pdf_integrates_to_one", dist_pdf_mass),
        (Suite::Demand, "demand", "d_star_increasing_in_alpha", demand_d_star_monotone),
        (Suite::Demand, "demand", "rho_beta_equals_eta", demand_identity),
        (Suite::Exo, "exo", "threshold_formula", exo_threshold_formula),
        (Suite::Exo, "exo", "closed_form_consistency", exo_closed_form),
        (Suite::Exo, "exo", "value_iteration_vs_closed_form", exo_value_iteration),
        (Suite::Endo, "endo", "threshold_uniform", endo_threshold),
        (Suite::Endo, "endo", "ge_perturbation", endo_ge_perturbation),
        (Suite::Endo, "endo", "decreasing_elasticity_stationary", endo_decreasing),
        (Suite::Endo, "endo", "increasing_elasticity_root", endo_increasing_root),
        (Suite::Endo, "endo", "constant_elasticity_recovers_ge", endo_constant_recovers_ge),
        (Suite::Hybrid, "hybrid", "dominance_and_continuity", hybrid_dominance),
        (Suite::Hybrid, "hybrid", "inclusiveness", hybrid_inclusiveness),
        (Suite::Analysis, "analysis", "segmentation_pattern", analysis_segmentation),
        (Suite::Analysis, "analysis", "variance_u_shape", analysis_u_shape),
        (Suite::Analysis, "analysis", "two_point_v_shape", analysis_two_point),
        (Suite::Analysis, "analysis", "single_crossing_quasiconvexity", analysis_structure),
        (Suite::Sim, "sim", "monte_carlo_agreement", sim_agreement),
    ]
}

/// Runs every check in `suite`.
pub fn run_suite(suite: Suite) -> Vec<CheckResult> {
    registry()
        .into_iter()
        .filter(|(s, ..)| suite == Suite::All || *s == suite)
        .map(|(_, group, name, check)| {
            let (passed, detail) = match check() {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckResult { suite: group, name, passed, detail }
        })
        .collect()
}
