//! Lending with an exogenously fixed discount: threshold, value iteration and
//! Lean Experimentation trajectories.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::income_dist::IncomeDistribution;
use crate::numeric::golden_section_max;
use crate::value_fn::{iterate, BellmanStep, ValueFunction, ViConfig, Weighted, TIE_TOL};

/// Increments below this end a trajectory; the remainder is constant.
pub const TRAJECTORY_STOP: f64 = 1e-10;

/// Discount factor `ρ` and fixed loan discount `d`, with `0 < d < ρ < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExoParams {
    pub rho: f64,
    pub d: f64,
}

impl ExoParams {
    pub fn new(rho: f64, d: f64) -> Result<Self> {
        let p = ExoParams { rho, d };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::InvalidParameter(format!("rho must lie in (0, 1), got {}", self.rho)));
        }
        if !(self.d > 0.0 && self.d < self.rho) {
            return Err(Error::InvalidParameter(format!("d must lie in (0, rho), got {}", self.d)));
        }
        Ok(())
    }

    /// Slope of the safe value `J(x) = (1-d)/(1-ρ) x`.
    pub fn safe_multiplier(&self) -> f64 {
        (1.0 - self.d) / (1.0 - self.rho)
    }

    /// Target of `G` at the threshold: `(ρ - d) / (ρ (1 - d))`.
    pub fn threshold_target(&self) -> f64 {
        (self.rho - self.d) / (self.rho * (1.0 - self.d))
    }
}

/// Creditworthiness threshold `x̄ = G⁻¹((ρ-d)/(ρ(1-d)))`.
pub fn threshold_exo(dist: &IncomeDistribution, params: &ExoParams) -> Result<f64> {
    params.validate()?;
    dist.g_inverse(params.threshold_target())
}

/// Exact solution for θ ~ Uniform[0, 1].
///
/// Below the threshold `J(x) = x + (a x² + b x + c) / (1 - x)` and the policy is
/// `y(x) = m x + n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformClosedForm {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub m: f64,
    pub n: f64,
    pub x_bar: f64,
    pub rho: f64,
    pub d: f64,
}

pub fn uniform_closed_form(params: &ExoParams) -> Result<UniformClosedForm> {
    params.validate()?;
    let (rho, d) = (params.rho, params.d);
    let root = ((rho - d * d) / (rho * d * d)).sqrt();
    // the other root of the quadratic gives m > 1 and is discarded
    let a = 0.5 * (1.0 - d * root);
    let denom = 2.0 * rho - rho * d - d;
    let b = (rho - d) * (d * root + d - 1.0) / denom;
    let c = (rho - d).powi(2) * (1.0 - 2.0 * d + rho - (1.0 - rho) * (1.0 - d * d / rho).sqrt())
        / (2.0 * (1.0 - rho) * denom * denom);
    let m = d / (2.0 * rho * (1.0 - a));
    let n = (rho - d + b * rho) / (2.0 * rho * (1.0 - a));
    let x_bar = (rho - d) / denom;
    Ok(UniformClosedForm { a, b, c, m, n, x_bar, rho, d })
}

impl UniformClosedForm {
    pub fn value(&self, x: f64) -> f64 {
        if x >= self.x_bar {
            (1.0 - self.d) / (1.0 - self.rho) * x
        } else {
            x + (self.a * x * x + self.b * x + self.c) / (1.0 - x)
        }
    }

    pub fn policy(&self, x: f64) -> f64 {
        if x >= self.x_bar {
            x
        } else {
            self.m * x + self.n
        }
    }

    /// `horizon` successive repayment levels starting from state `x0`.
    pub fn trajectory(&self, x0: f64, horizon: usize) -> Vec<f64> {
        build_trajectory(|x| self.policy(x), x0, horizon)
    }

    /// Residual of the Bellman equation at `x` against the exact maximiser.
    pub fn bellman_residual(&self, x: f64) -> f64 {
        let y = self.policy(x);
        let rhs = x - self.d * y + self.rho * (1.0 - y) / (1.0 - x) * self.value(y);
        (self.value(x) - rhs).abs()
    }
}

pub(crate) fn build_trajectory<P: FnMut(f64) -> f64>(mut policy: P, x0: f64, horizon: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(horizon);
    let mut x = x0;
    let mut settled = false;
    for _ in 0..horizon {
        let y = if settled { x } else { policy(x) };
        if !settled && !out.is_empty() && (y - x).abs() < TRAJECTORY_STOP {
            settled = true;
        }
        out.push(y);
        x = y;
    }
    out
}

struct ExoBellman {
    rho: f64,
    d: f64,
}

impl ExoBellman {
    fn best(&self, x: f64, s_x: f64, cont: &Weighted<'_>, upper: f64) -> (f64, f64) {
        let obj = |y: f64| x - self.d * y + self.rho * cont.eval(y) / s_x;
        let stay = obj(x);
        if x >= upper {
            return (stay, x);
        }
        let (y, v) = golden_section_max(obj, x, upper, 1e-11 * upper.max(1.0));
        if v - stay < TIE_TOL {
            (stay, x)
        } else {
            (v, y)
        }
    }
}

impl BellmanStep for ExoBellman {
    fn step(&self, x: f64, s_x: f64, _j_x: f64, cont: &Weighted<'_>, upper: f64) -> (f64, f64, f64) {
        let (v, y) = self.best(x, s_x, cont, upper);
        (v, y, self.d)
    }
}

/// Value iteration for the fixed-discount problem, started from the safe value.
pub fn value_iteration_exo(dist: &IncomeDistribution, params: &ExoParams, cfg: &ViConfig) -> Result<ValueFunction> {
    params.validate()?;
    cfg.validate()?;
    if dist.is_discrete() {
        return Err(Error::Domain("value iteration needs a distribution with a density".into()));
    }
    let x_bar = threshold_exo(dist, params).unwrap_or(0.0);
    let grid = cfg.build_grid(dist, x_bar);
    let survival: Vec<f64> = grid.points.iter().map(|&x| dist.survival(x)).collect();
    let k = params.safe_multiplier();
    let initial: Vec<f64> = grid.points.iter().map(|x| k * x).collect();
    iterate(grid, survival, initial, cfg, &ExoBellman { rho: params.rho, d: params.d }, false)
}

/// Solved fixed-discount model: threshold plus value function.
#[derive(Debug, Clone)]
pub struct ExoModel {
    pub dist: IncomeDistribution,
    pub params: ExoParams,
    pub x_bar: f64,
    pub vf: ValueFunction,
}

impl ExoModel {
    pub fn solve(dist: &IncomeDistribution, params: &ExoParams, cfg: &ViConfig) -> Result<Self> {
        let x_bar = threshold_exo(dist, params)?;
        let vf = value_iteration_exo(dist, params, cfg)?;
        Ok(ExoModel { dist: dist.clone(), params: *params, x_bar, vf })
    }

    pub fn value(&self, x: f64) -> f64 {
        self.vf.value_at(x)
    }

    /// Optimal next repayment level from state `x`, re-optimised off the grid.
    pub fn policy_at(&self, x: f64) -> f64 {
        let cont = self.vf.weighted();
        let bell = ExoBellman { rho: self.params.rho, d: self.params.d };
        bell.best(x, self.dist.survival(x), &cont, self.vf.grid.upper()).1
    }

    /// Lender NPV when nothing is known beyond θ >= 0, `J(0)`.
    pub fn dynamic_npv(&self) -> f64 {
        self.value(0.0)
    }
}

/// Lean Experimentation repayment levels `y_0, y_1, ...` starting from `x_start`.
pub fn le_trajectory_exo(model: &ExoModel, x_start: f64, horizon: usize) -> Vec<f64> {
    let cont = model.vf.weighted();
    let bell = ExoBellman { rho: model.params.rho, d: model.params.d };
    let upper = model.vf.grid.upper();
    build_trajectory(|x| bell.best(x, model.dist.survival(x), &cont, upper).1, x_start, horizon)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_reference_values() {
        let cf = uniform_closed_form(&ExoParams::new(0.95, 5.0 / 6.0).unwrap()).unwrap();
        assert!((cf.m - 0.5776107).abs() < 1e-6);
        assert!((cf.n - 0.1791955).abs() < 1e-6);
        assert!((cf.x_bar - 0.4242424).abs() < 1e-6);
        assert!((cf.c - 0.4632735).abs() < 1e-6);
        for x in [0.0, 0.1, 0.3, 0.42] {
            assert!(cf.bellman_residual(x) < 1e-10);
        }
    }

    #[test]
    fn threshold_matches_closed_form() {
        let p = ExoParams::new(0.95, 0.7).unwrap();
        let xb = threshold_exo(&IncomeDistribution::uniform(), &p).unwrap();
        assert!((xb - uniform_closed_form(&p).unwrap().x_bar).abs() < 1e-12);
    }

    #[test]
    fn rejects_d_above_rho() {
        assert!(ExoParams::new(0.9, 0.95).is_err());
        assert!(ExoParams::new(1.0, 0.5).is_err());
    }

    #[test]
    fn trajectory_settles() {
        let cf = uniform_closed_form(&ExoParams::new(0.95, 0.8).unwrap()).unwrap();
        let t = cf.trajectory(0.0, 200);
        assert_eq!(t.len(), 200);
        assert!((t[199] - cf.x_bar).abs() < 1e-9);
        assert!(t.windows(2).all(|w| w[1] >= w[0]));
    }
}
