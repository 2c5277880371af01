use rayon::prelude::*;
use serde::Serialize;

use crate::endo_policy::{threshold_endo, EndoParams};
use crate::error::{Error, Result};
use crate::income_dist::IncomeDistribution;

fn constant_alpha(params: &EndoParams) -> Result<f64> {
    params
        .demand
        .constant_alpha()
        .ok_or_else(|| Error::Regime { expected: "constant".into(), found: params.regime().to_string() })
}

/// Expected lender NPV of the Grand Experiment,
/// `(d*)^{α+1}/α · S(x̄)^{α+1} · x̄`.
///
/// For atomic distributions the test level is chosen among the atoms.
pub fn expected_npv_ge(dist: &IncomeDistribution, params: &EndoParams) -> Result<f64> {
    let alpha = constant_alpha(params)?;
    let st = params.stationary()?;
    let scale = st.d_star.powf(alpha + 1.0) / alpha;
    if let IncomeDistribution::TwoPoint { center, delta } = dist {
        let best = [center - delta, center + delta]
            .into_iter()
            .map(|y| dist.survival(y).powf(alpha + 1.0) * y)
            .fold(0.0, f64::max);
        return Ok(scale * best);
    }
    let x_bar = threshold_endo(dist, params)?;
    Ok(scale * dist.survival(x_bar).powf(alpha + 1.0) * x_bar)
}

/// Limit of the expected NPV as symmetric-Beta income approaches atoms at 0 and 1.
pub fn bernoulli_limit(params: &EndoParams) -> Result<f64> {
    expected_npv_ge(&IncomeDistribution::two_point(0.5, 0.5)?, params)
}

/// Limit of the expected NPV as symmetric-Beta income concentrates at 1/2.
pub fn degenerate_limit(params: &EndoParams) -> Result<f64> {
    expected_npv_ge(&IncomeDistribution::two_point(0.5, 0.0)?, params)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceRow {
    pub a: f64,
    pub variance: f64,
    pub expected_npv: f64,
    pub x_bar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceSweep {
    /// Sorted by increasing variance.
    pub rows: Vec<VarianceRow>,
    pub u_shape: bool,
    pub bernoulli_limit: f64,
    pub degenerate_limit: f64,
}

/// Expected GE NPV and threshold across symmetric Beta(a, a) incomes.
pub fn variance_sweep_beta(params: &EndoParams, a_grid: &[f64]) -> Result<VarianceSweep> {
    constant_alpha(params)?;
    let mut rows: Vec<VarianceRow> = a_grid
        .par_iter()
        .map(|&a| {
            let dist = IncomeDistribution::beta(a, a)?;
            Ok(VarianceRow {
                a,
                variance: 1.0 / (4.0 * (2.0 * a + 1.0)),
                expected_npv: expected_npv_ge(&dist, params)?,
                x_bar: threshold_endo(&dist, params)?,
            })
        })
        .collect::<Result<_>>()?;
    rows.sort_by(|p, q| p.variance.total_cmp(&q.variance));
    let values: Vec<f64> = rows.iter().map(|r| r.expected_npv).collect();
    Ok(VarianceSweep {
        u_shape: u_shape_verdict(&values),
        rows,
        bernoulli_limit: bernoulli_limit(params)?,
        degenerate_limit: degenerate_limit(params)?,
    })
}

/// True when the successive differences change sign exactly once, from negative to positive.
pub fn u_shape_verdict(values: &[f64]) -> bool {
    let signs: Vec<i8> = values
        .windows(2)
        .filter_map(|w| {
            let diff = w[1] - w[0];
            if diff > 0.0 {
                Some(1)
            } else if diff < 0.0 {
                Some(-1)
            } else {
                None
            }
        })
        .collect();
    let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
    changes == 1 && signs.first() == Some(&-1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Winner {
    A,
    B,
    Tie,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoPointRow {
    pub delta: f64,
    pub pi_a: f64,
    pub pi_b: f64,
    pub winner: Winner,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoPointReport {
    pub rows: Vec<TwoPointRow>,
    /// Spread at which both policies earn the same.
    pub crossing: Option<f64>,
    /// Discount of the experimental first loan in policy A.
    pub d0: f64,
}

/// Policies for income at `u ± δ` with equal probability.
///
/// Policy A tests the upper atom with a first loan at discount `d0 = d*/2`;
/// policy B lends `u - δ` at `d*` forever.
pub fn two_point_example(params: &EndoParams, u: f64, deltas: &[f64]) -> Result<TwoPointReport> {
    let alpha = constant_alpha(params)?;
    if let Some(bad) = deltas.iter().find(|&&d| !(0.0..=u).contains(&d)) {
        return Err(Error::InvalidParameter(format!("delta {bad} outside [0, {u}]")));
    }
    let st = params.stationary()?;
    let rho = params.rho;
    let beta = st.beta;
    let d0 = 0.5 * st.d_star;
    let pi_a = |delta: f64| {
        -d0.powf(alpha + 1.0) * (u - delta) + 0.5 * rho * d0.powf(alpha) * ((u - delta) + (beta - 1.0) * (u + delta))
    };
    let pi_b = |delta: f64| (beta - 1.0) * (u - delta);
    let rows = deltas
        .iter()
        .map(|&delta| {
            let (a, b) = (pi_a(delta), pi_b(delta));
            let winner = if a > b {
                Winner::A
            } else if b > a {
                Winner::B
            } else {
                Winner::Tie
            };
            TwoPointRow { delta, pi_a: a, pi_b: b, winner }
        })
        .collect();
    // both payoffs are affine in δ
    let diff0 = pi_a(0.0) - pi_b(0.0);
    let slope = (pi_a(u) - pi_b(u)) - diff0;
    let crossing = if slope != 0.0 {
        let c = -diff0 * u / slope;
        (0.0..=u).contains(&c).then_some(c)
    } else {
        None
    };
    Ok(TwoPointReport { rows, crossing, d0 })
}
