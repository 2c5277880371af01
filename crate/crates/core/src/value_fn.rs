//! Grid value functions and the fixed-point engine shared by both lending models.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::income_dist::IncomeDistribution;
use crate::numeric::{hermite_slopes, interp_cubic, interp_linear, Grid};

/// Gains below this are treated as ties and resolved in favour of `y = x`.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    Linear,
    Cubic,
}

/// Settings for value iteration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ViConfig {
    pub grid_size: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub interpolation: Interpolation,
    /// Adds 4x denser points on `[0.8, 1.2]` times the threshold.
    pub refine_near_threshold: bool,
    /// Upper end of the state grid; defaults to the truncation quantile.
    pub upper: Option<f64>,
}

impl Default for ViConfig {
    fn default() -> Self {
        ViConfig {
            grid_size: 2000,
            tol: 1e-9,
            max_iter: 100_000,
            interpolation: Interpolation::Cubic,
            refine_near_threshold: false,
            upper: None,
        }
    }
}

impl ViConfig {
    pub fn with_grid(mut self, n: usize) -> Self {
        self.grid_size = n;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_size < 3 {
            return Err(Error::InvalidParameter(format!("grid size must be at least 3, got {}", self.grid_size)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("iteration cap must be positive".into()));
        }
        Ok(())
    }

    pub(crate) fn build_grid(&self, dist: &IncomeDistribution, threshold: f64) -> Grid {
        let upper = self.upper.unwrap_or_else(|| dist.truncation_upper());
        let mut grid = Grid::uniform(0.0, upper, self.grid_size);
        if self.refine_near_threshold && threshold > 0.0 && threshold < upper {
            grid = grid.refined(0.8 * threshold, (1.2 * threshold).min(upper), 4);
        }
        grid
    }
}

/// Survival-weighted continuation `W(y) = S(y) J(y)` interpolated on the grid.
///
/// Interpolating the product keeps every Bellman evaluation free of
/// distribution-function calls.
pub(crate) struct Weighted<'a> {
    grid: &'a Grid,
    w: Vec<f64>,
    slopes: Option<Vec<f64>>,
}

impl<'a> Weighted<'a> {
    pub(crate) fn new(grid: &'a Grid, survival: &[f64], values: &[f64], mode: Interpolation) -> Self {
        let w: Vec<f64> = survival.iter().zip(values).map(|(s, j)| s * j).collect();
        let slopes = match mode {
            Interpolation::Linear => None,
            Interpolation::Cubic => Some(hermite_slopes(grid, &w)),
        };
        Weighted { grid, w, slopes }
    }

    pub(crate) fn eval(&self, y: f64) -> f64 {
        match &self.slopes {
            None => interp_linear(self.grid, &self.w, y),
            Some(m) => interp_cubic(self.grid, &self.w, m, y),
        }
    }
}

/// Converged value function with its policy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValueFunction {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub survival: Vec<f64>,
    /// Optimal next repayment level `y(x)`.
    pub policy: Vec<f64>,
    /// Optimal discount `d(x)` when the discount is a control.
    pub discount: Option<Vec<f64>>,
    pub iterations: usize,
    pub residual: f64,
    pub residual_history: Vec<f64>,
    pub interpolation: Interpolation,
    value_slopes: Vec<f64>,
}

impl ValueFunction {
    pub fn points(&self) -> &[f64] {
        &self.grid.points
    }

    /// Interpolated `J(x)`.
    pub fn value_at(&self, x: f64) -> f64 {
        match self.interpolation {
            Interpolation::Linear => interp_linear(&self.grid, &self.values, x),
            Interpolation::Cubic => interp_cubic(&self.grid, &self.values, &self.value_slopes, x),
        }
    }

    /// Interpolated continuation weight `S(y) J(y)`.
    pub(crate) fn weighted(&self) -> Weighted<'_> {
        Weighted::new(&self.grid, &self.survival, &self.values, self.interpolation)
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}

/// One Bellman update at a state: returns `(value, y, d)`.
pub(crate) trait BellmanStep: Sync {
    fn step(&self, x: f64, s_x: f64, j_x: f64, cont: &Weighted<'_>, upper: f64) -> (f64, f64, f64);
}

pub(crate) fn iterate<B: BellmanStep>(
    grid: Grid,
    survival: Vec<f64>,
    initial: Vec<f64>,
    cfg: &ViConfig,
    bellman: &B,
    with_discount: bool,
) -> Result<ValueFunction> {
    let upper = grid.upper();
    let mut values = initial;
    let mut history = Vec::new();
    let mut policy = vec![0.0; grid.len()];
    let mut discount = vec![0.0; grid.len()];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        let cont = Weighted::new(&grid, &survival, &values, cfg.interpolation);
        let updates: Vec<(f64, f64, f64)> = grid
            .points
            .par_iter()
            .enumerate()
            .map(|(i, &x)| bellman.step(x, survival[i], values[i], &cont, upper))
            .collect();
        residual = updates.iter().zip(&values).map(|(u, v)| (u.0 - v).abs()).fold(0.0, f64::max);
        for (i, u) in updates.into_iter().enumerate() {
            values[i] = u.0;
            policy[i] = u.1;
            discount[i] = u.2;
        }
        history.push(residual);
        if !residual.is_finite() {
            return Err(Error::NonConvergence { iterations, residual });
        }
        if residual < cfg.tol {
            break;
        }
    }
    if residual >= cfg.tol {
        return Err(Error::NonConvergence { iterations, residual });
    }
    let value_slopes = hermite_slopes(&grid, &values);
    Ok(ValueFunction {
        value_slopes,
        grid,
        values,
        survival,
        policy,
        discount: with_discount.then_some(discount),
        iterations,
        residual,
        residual_history: history,
        interpolation: cfg.interpolation,
    })
}
