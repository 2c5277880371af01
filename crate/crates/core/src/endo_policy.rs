//! Lending when the discount is chosen by the lender and accepted with
//! probability `s(d)`: stationary discount, thresholds, Grand Experiment
//! policies and two-control value iteration.

use serde::{Deserialize, Serialize};

use crate::demand::{beta_factor, classify_regime, solve_d_star, DemandFunction, Regime};
use crate::error::{Error, Result};
use crate::exo_policy::build_trajectory;
use crate::income_dist::IncomeDistribution;
use crate::numeric::{bracket_root, golden_section_max, Grid, RootOptions};
use crate::value_fn::{iterate, BellmanStep, ValueFunction, ViConfig, Weighted, TIE_TOL};

/// Lower end of the admissible discount interval.
pub const D_FLOOR: f64 = 1e-9;
/// Grid size used when classifying the demand regime.
pub const REGIME_GRID: usize = 400;

/// Discount factor and demand curve for the endogenous model.
#[derive(Debug, Clone)]
pub struct EndoParams {
    pub rho: f64,
    pub demand: DemandFunction,
}

/// Stationary discount `d*`, acceptance `s(d*)` and value multiplier `β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stationary {
    pub d_star: f64,
    pub s_star: f64,
    pub beta: f64,
}

impl EndoParams {
    pub fn new(rho: f64, demand: DemandFunction) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::InvalidParameter(format!("rho must lie in (0, 1), got {rho}")));
        }
        let demand = demand.with_domain(rho);
        demand.validate(rho)?;
        Ok(EndoParams { rho, demand })
    }

    pub fn stationary(&self) -> Result<Stationary> {
        let d_star = solve_d_star(&self.demand, self.rho)?;
        Ok(Stationary { d_star, s_star: self.demand.s(d_star), beta: beta_factor(&self.demand, self.rho, d_star) })
    }

    pub fn regime(&self) -> Regime {
        classify_regime(&self.demand, REGIME_GRID)
    }

    fn d_hi(&self) -> f64 {
        self.rho - D_FLOOR
    }
}

/// Threshold `x̄ = G⁻¹(1 - d*/(ρβ))`.
pub fn threshold_endo(dist: &IncomeDistribution, params: &EndoParams) -> Result<f64> {
    let st = params.stationary()?;
    dist.g_inverse(1.0 - st.d_star / (params.rho * st.beta))
}

/// Initial offer `(y0, d0)` followed by the stationary offer `(y0, d*)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GePolicy {
    pub y0: f64,
    pub d0: f64,
    pub y_inf: f64,
    pub d_inf: f64,
    pub x_bar: f64,
}

fn require_constant(params: &EndoParams) -> Result<f64> {
    match params.demand.constant_alpha() {
        Some(a) => Ok(a),
        None => match params.regime() {
            Regime::Constant => Ok(params.demand.elasticity(0.5 * params.rho)),
            r => Err(Error::Regime { expected: "constant".into(), found: r.to_string() }),
        },
    }
}

/// Grand Experiment for constant-elasticity demand, starting from `θ >= x0`.
pub fn ge_from_signal(dist: &IncomeDistribution, params: &EndoParams, x0: f64) -> Result<GePolicy> {
    require_constant(params)?;
    let st = params.stationary()?;
    let x_bar = threshold_endo(dist, params)?;
    if x0 >= x_bar {
        return Ok(GePolicy { y0: x0, d0: st.d_star, y_inf: x0, d_inf: st.d_star, x_bar });
    }
    let d0 = dist.survival(x_bar) / dist.survival(x0) * st.d_star;
    Ok(GePolicy { y0: x_bar, d0, y_inf: x_bar, d_inf: st.d_star, x_bar })
}

/// Grand Experiment for constant-elasticity demand with no prior information.
pub fn ge_constant_elasticity(dist: &IncomeDistribution, params: &EndoParams) -> Result<GePolicy> {
    ge_from_signal(dist, params, 0.0)
}

/// Value of the Grand Experiment started at state `x` (constant elasticity).
pub fn ge_value_constant(dist: &IncomeDistribution, params: &EndoParams, x: f64) -> Result<f64> {
    let alpha = require_constant(params)?;
    let st = params.stationary()?;
    let x_bar = threshold_endo(dist, params)?;
    Ok(ge_value_with(dist, params.rho, alpha, &st, x_bar, x))
}

pub(crate) fn ge_value_with(
    dist: &IncomeDistribution,
    rho: f64,
    alpha: f64,
    st: &Stationary,
    x_bar: f64,
    x: f64,
) -> f64 {
    if x >= x_bar {
        return st.beta * x;
    }
    let ratio = dist.survival(x_bar) / dist.survival(x);
    let dx = ratio * st.d_star;
    x - dx.powf(alpha + 1.0) * x_bar + rho * dx.powf(alpha) * ratio * st.beta * x_bar
}

/// `M(d) = G⁻¹(1 - d/η(d)) - F⁻¹(1 - S(x0) η(d)/(ρβ))`; its root on `(0, d*)`
/// is the initial discount when elasticity increases.
pub fn ge_residual(dist: &IncomeDistribution, params: &EndoParams, x0: f64, d: f64) -> Result<f64> {
    let st = params.stationary()?;
    residual_with(dist, params, &st, x0, d)
}

fn residual_with(dist: &IncomeDistribution, params: &EndoParams, st: &Stationary, x0: f64, d: f64) -> Result<f64> {
    let eta = params.demand.eta(d);
    let left = dist.g_inverse(1.0 - d / eta)?;
    let tail = dist.survival(x0) * eta / (params.rho * st.beta);
    let right = dist.upper_tail_quantile(tail.min(1.0));
    Ok(left - right)
}

/// Grand Experiment for increasing-elasticity demand and increasing hazard.
pub fn ge_increasing_elasticity(dist: &IncomeDistribution, params: &EndoParams, x0: f64) -> Result<GePolicy> {
    match params.regime() {
        Regime::Increasing | Regime::Constant => {}
        r => return Err(Error::Regime { expected: "increasing".into(), found: r.to_string() }),
    }
    check_increasing_hazard(dist)?;
    let st = params.stationary()?;
    let x_bar = threshold_endo(dist, params)?;
    if !(x0 >= 0.0 && x0 < x_bar) {
        return Err(Error::InvalidParameter(format!("signal x0 = {x0} must lie in [0, {x_bar})")));
    }
    let lo = D_FLOOR.max(st.d_star * 1e-9);
    let d0 = bracket_root(
        |d| residual_with(dist, params, &st, x0, d).unwrap_or(f64::NAN),
        lo,
        st.d_star,
        RootOptions { xtol: 1e-15, ..Default::default() },
    )?;
    let eta = params.demand.eta(d0);
    let y0 = dist.g_inverse(1.0 - d0 / eta)?;
    Ok(GePolicy { y0, d0, y_inf: y0, d_inf: st.d_star, x_bar })
}

/// Errors unless the hazard rate is non-decreasing on the working support.
pub fn check_increasing_hazard(dist: &IncomeDistribution) -> Result<()> {
    let upper = dist.truncation_upper();
    let grid = Grid::uniform(upper * 1e-6, upper * 0.999, 400);
    let mut prev = dist.hazard(grid.points[0]);
    for &x in &grid.points[1..] {
        let h = dist.hazard(x);
        if h < prev * (1.0 - 1e-9) {
            return Err(Error::Assumption(format!("hazard rate decreases near x = {x}")));
        }
        prev = h;
    }
    Ok(())
}

struct EndoBellman<'a> {
    rho: f64,
    demand: &'a DemandFunction,
    d_hi: f64,
}

impl EndoBellman<'_> {
    // best discount and value for a fixed next level y
    fn inner(&self, x: f64, s_x: f64, cont: &Weighted<'_>, y: f64) -> (f64, f64) {
        let w = cont.eval(y) / s_x;
        let target = if y > 0.0 { self.rho * w / y } else { f64::INFINITY };
        let d = self.demand.eta_inverse(target, D_FLOOR, self.d_hi);
        (x + self.demand.s(d) * (self.rho * w - d * y), d)
    }

    fn best(&self, x: f64, s_x: f64, cont: &Weighted<'_>, upper: f64) -> (f64, f64, f64) {
        let (stay, d_stay) = self.inner(x, s_x, cont, x);
        if x >= upper {
            return (stay, x, d_stay);
        }
        let (y, v) = golden_section_max(|y| self.inner(x, s_x, cont, y).0, x, upper, 1e-11 * upper.max(1.0));
        if v - stay < TIE_TOL {
            (stay, x, d_stay)
        } else {
            (v, y, self.inner(x, s_x, cont, y).1)
        }
    }
}

impl BellmanStep for EndoBellman<'_> {
    fn step(&self, x: f64, s_x: f64, _j_x: f64, cont: &Weighted<'_>, upper: f64) -> (f64, f64, f64) {
        self.best(x, s_x, cont, upper)
    }
}

/// Value iteration over both controls `(y, d)`; valid for any demand regime.
pub fn two_control_value_iteration(
    dist: &IncomeDistribution,
    params: &EndoParams,
    cfg: &ViConfig,
) -> Result<ValueFunction> {
    cfg.validate()?;
    if dist.is_discrete() {
        return Err(Error::Domain("value iteration needs a distribution with a density".into()));
    }
    let st = params.stationary()?;
    let x_bar = threshold_endo(dist, params).unwrap_or(0.0);
    let grid = cfg.build_grid(dist, x_bar);
    let survival: Vec<f64> = grid.points.iter().map(|&x| dist.survival(x)).collect();
    let initial: Vec<f64> = grid.points.iter().map(|x| st.beta * x).collect();
    let bell = EndoBellman { rho: params.rho, demand: &params.demand, d_hi: params.d_hi() };
    iterate(grid, survival, initial, cfg, &bell, true)
}

/// Lean Experimentation with endogenous discount; requires decreasing elasticity.
pub fn le_decreasing_elasticity(dist: &IncomeDistribution, params: &EndoParams, cfg: &ViConfig) -> Result<EndoModel> {
    match params.regime() {
        Regime::Decreasing => {}
        r => return Err(Error::Regime { expected: "decreasing".into(), found: r.to_string() }),
    }
    EndoModel::solve(dist, params, cfg)
}

/// Solved endogenous model.
#[derive(Debug, Clone)]
pub struct EndoModel {
    pub dist: IncomeDistribution,
    pub params: EndoParams,
    pub stationary: Stationary,
    pub x_bar: f64,
    pub vf: ValueFunction,
}

impl EndoModel {
    pub fn solve(dist: &IncomeDistribution, params: &EndoParams, cfg: &ViConfig) -> Result<Self> {
        let stationary = params.stationary()?;
        let x_bar = threshold_endo(dist, params)?;
        let vf = two_control_value_iteration(dist, params, cfg)?;
        Ok(EndoModel { dist: dist.clone(), params: params.clone(), stationary, x_bar, vf })
    }

    /// Optimal `(y, d)` from state `x`, re-optimised off the grid.
    pub fn policy_at(&self, x: f64) -> (f64, f64) {
        let cont = self.vf.weighted();
        let bell = EndoBellman { rho: self.params.rho, demand: &self.params.demand, d_hi: self.params.d_hi() };
        let (_, y, d) = bell.best(x, self.dist.survival(x), &cont, self.vf.grid.upper());
        (y, d)
    }

    /// Successive offers `(y_t, d_t)` from state `x0`.
    pub fn trajectory(&self, x0: f64, horizon: usize) -> Vec<(f64, f64)> {
        let levels = build_trajectory(|x| self.policy_at(x).0, x0, horizon);
        let mut prev = x0;
        levels
            .into_iter()
            .map(|y| {
                let d = self.policy_at(prev).1;
                prev = y;
                (y, d)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear() -> EndoParams {
        EndoParams::new(0.95, DemandFunction::constant_elasticity(1.0).unwrap()).unwrap()
    }

    #[test]
    fn stationary_values_for_linear_demand() {
        let st = linear().stationary().unwrap();
        assert!((st.d_star - 0.7239474737685).abs() < 1e-12);
        assert!((st.beta - 1.5241).abs() < 1e-4);
        assert!((st.beta - 1.0 - st.d_star * st.d_star).abs() < 1e-12);
    }

    #[test]
    fn uniform_threshold_is_reciprocal_of_alpha_plus_two() {
        for alpha in [0.3, 0.5, 1.0] {
            let p = EndoParams::new(0.95, DemandFunction::constant_elasticity(alpha).unwrap()).unwrap();
            let xb = threshold_endo(&IncomeDistribution::uniform(), &p).unwrap();
            assert!((xb - 1.0 / (alpha + 2.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn ge_value_is_continuous_at_threshold() {
        let dist = IncomeDistribution::uniform();
        let p = linear();
        let xb = threshold_endo(&dist, &p).unwrap();
        let below = ge_value_constant(&dist, &p, xb - 1e-12).unwrap();
        let above = ge_value_constant(&dist, &p, xb).unwrap();
        assert!((below - above).abs() < 1e-9);
    }

    #[test]
    fn increasing_solver_rejects_decreasing_demand() {
        let p = EndoParams::new(0.95, DemandFunction::exponential(3.0).unwrap()).unwrap();
        let e = ge_increasing_elasticity(&IncomeDistribution::uniform(), &p, 0.0).unwrap_err();
        assert!(matches!(e, Error::Regime { .. }));
    }
}
