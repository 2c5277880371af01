//! Hybrid architecture: the lender first observes a signal `x0` with `θ >= x0`
//! and then lends dynamically from that state.

use serde::Serialize;

use crate::endo_policy::{ge_from_signal, ge_value_with, threshold_endo, EndoParams, GePolicy, Stationary};
use crate::error::{Error, Result};
use crate::exo_policy::{le_trajectory_exo, ExoModel};
use crate::income_dist::IncomeDistribution;
use crate::numeric::{GaussLegendre, NeumaierSum};

/// Quadrature nodes per sub-interval for expectations over the signal.
pub const SIGNAL_NODES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    BelowThreshold,
    AboveThreshold,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HybridPayload {
    /// Lean Experimentation repayment levels from the signal.
    Trajectory(Vec<f64>),
    Ge(GePolicy),
    /// Same repayment and discount every period.
    Constant {
        repayment: f64,
        discount: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HybridPolicy {
    pub signal: f64,
    pub x_bar: f64,
    pub branch: Branch,
    pub payload: HybridPayload,
    /// Lender NPV `Π_h(x0) = J(x0) - x0`.
    pub npv: f64,
}

/// Hybrid policy in the fixed-discount model.
pub fn hybrid_policy_exo(model: &ExoModel, x0: f64, horizon: usize) -> Result<HybridPolicy> {
    check_signal(&model.dist, x0)?;
    let p = model.params;
    if x0 >= model.x_bar {
        return Ok(HybridPolicy {
            signal: x0,
            x_bar: model.x_bar,
            branch: Branch::AboveThreshold,
            payload: HybridPayload::Constant { repayment: x0, discount: p.d },
            npv: (p.rho - p.d) / (1.0 - p.rho) * x0,
        });
    }
    Ok(HybridPolicy {
        signal: x0,
        x_bar: model.x_bar,
        branch: Branch::BelowThreshold,
        payload: HybridPayload::Trajectory(le_trajectory_exo(model, x0, horizon)),
        npv: model.value(x0) - x0,
    })
}

fn check_signal(dist: &IncomeDistribution, x0: f64) -> Result<()> {
    if !(x0 >= 0.0 && x0 < dist.support_upper()) {
        return Err(Error::InvalidParameter(format!("signal x0 = {x0} outside the support")));
    }
    Ok(())
}

/// Endogenous model with constant-elasticity demand, solved in closed form.
#[derive(Debug, Clone)]
pub struct EndoConstModel {
    pub dist: IncomeDistribution,
    pub params: EndoParams,
    pub alpha: f64,
    pub stationary: Stationary,
    pub x_bar: f64,
}

impl EndoConstModel {
    pub fn new(dist: &IncomeDistribution, params: &EndoParams) -> Result<Self> {
        let alpha = params
            .demand
            .constant_alpha()
            .ok_or_else(|| Error::Regime { expected: "constant".into(), found: params.regime().to_string() })?;
        Ok(EndoConstModel {
            dist: dist.clone(),
            params: params.clone(),
            alpha,
            stationary: params.stationary()?,
            x_bar: threshold_endo(dist, params)?,
        })
    }

    pub fn value(&self, x: f64) -> f64 {
        ge_value_with(&self.dist, self.params.rho, self.alpha, &self.stationary, self.x_bar, x)
    }
}

/// Hybrid policy in the endogenous model with constant elasticity.
pub fn hybrid_policy_endo_const(model: &EndoConstModel, x0: f64) -> Result<HybridPolicy> {
    check_signal(&model.dist, x0)?;
    let ge = ge_from_signal(&model.dist, &model.params, x0)?;
    let (branch, payload) = if x0 >= model.x_bar {
        (Branch::AboveThreshold, HybridPayload::Constant { repayment: x0, discount: model.stationary.d_star })
    } else {
        (Branch::BelowThreshold, HybridPayload::Ge(ge))
    };
    Ok(HybridPolicy { signal: x0, x_bar: model.x_bar, branch, payload, npv: model.value(x0) - x0 })
}

/// Either solved model, viewed through the hybrid lens.
#[derive(Debug, Clone, Copy)]
pub enum HybridModel<'a> {
    Exo(&'a ExoModel),
    EndoConstant(&'a EndoConstModel),
}

impl HybridModel<'_> {
    pub fn dist(&self) -> &IncomeDistribution {
        match self {
            HybridModel::Exo(m) => &m.dist,
            HybridModel::EndoConstant(m) => &m.dist,
        }
    }

    pub fn x_bar(&self) -> f64 {
        match self {
            HybridModel::Exo(m) => m.x_bar,
            HybridModel::EndoConstant(m) => m.x_bar,
        }
    }

    /// `Π_h(x0)`.
    pub fn hybrid_npv(&self, x0: f64) -> f64 {
        match self {
            HybridModel::Exo(m) => {
                if x0 >= m.x_bar {
                    (m.params.rho - m.params.d) / (1.0 - m.params.rho) * x0
                } else {
                    m.value(x0) - x0
                }
            }
            HybridModel::EndoConstant(m) => m.value(x0) - x0,
        }
    }

    /// `Π_d`, the NPV without a signal.
    pub fn dynamic_npv(&self) -> f64 {
        self.hybrid_npv(0.0)
    }

    /// `E_{x0}[Π_h]` with the signal distributed as income.
    pub fn expected_hybrid_npv(&self) -> f64 {
        let dist = self.dist();
        let gl = GaussLegendre::new(SIGNAL_NODES);
        let x_bar = self.x_bar();
        let upper = dist.truncation_upper();
        let mut acc = NeumaierSum::new();
        acc.add(gl.integrate(|x| self.hybrid_npv(x) * dist.pdf(x), 0.0, x_bar));
        acc.add(gl.integrate_composite(|x| self.hybrid_npv(x) * dist.pdf(x), x_bar, upper, 4));
        acc.value()
    }
}

/// `(E_{x0}[Π_h] - Π_d) / Π_d`.
pub fn relative_advantage(model: HybridModel<'_>) -> Result<f64> {
    if model.dist().is_discrete() {
        return Err(Error::Domain("relative advantage needs a distribution with a density".into()));
    }
    let pd = model.dynamic_npv();
    if !(pd > 0.0) {
        return Err(Error::Domain(format!("dynamic NPV {pd} is not positive")));
    }
    Ok((model.expected_hybrid_npv() - pd) / pd)
}

/// First-period loan, discount and retention with and without the signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InclusivenessRow {
    pub x0: f64,
    pub discount_dyn: f64,
    pub discount_hyb: f64,
    pub loan_dyn: f64,
    pub loan_hyb: f64,
    pub retention_dyn: f64,
    pub retention_hyb: f64,
}

impl InclusivenessRow {
    pub fn hybrid_dominates(&self) -> bool {
        self.loan_hyb >= self.loan_dyn && self.retention_hyb >= self.retention_dyn
    }
}

/// Compares the period-0 offers of the dynamic and hybrid lenders for
/// borrowers with `θ >= x0`.
pub fn inclusiveness_compare(
    dist: &IncomeDistribution,
    params: &EndoParams,
    x0_grid: &[f64],
) -> Result<Vec<InclusivenessRow>> {
    let model = EndoConstModel::new(dist, params)?;
    let demand = &params.demand;
    let d_star = model.stationary.d_star;
    let x_bar = model.x_bar;
    let s_bar = dist.survival(x_bar);
    let discount_dyn = s_bar * d_star;
    let loan_dyn = discount_dyn * x_bar;
    x0_grid
        .iter()
        .map(|&x0| {
            check_signal(dist, x0)?;
            if x0 < x_bar {
                // both lenders test x̄, so the repayment probability is shared
                let repay = s_bar / dist.survival(x0);
                let discount_hyb = repay * d_star;
                Ok(InclusivenessRow {
                    x0,
                    discount_dyn,
                    discount_hyb,
                    loan_dyn,
                    loan_hyb: discount_hyb * x_bar,
                    retention_dyn: demand.s(discount_dyn) * repay,
                    retention_hyb: demand.s(discount_hyb) * repay,
                })
            } else {
                Ok(InclusivenessRow {
                    x0,
                    discount_dyn,
                    discount_hyb: d_star,
                    loan_dyn,
                    loan_hyb: d_star * x0,
                    retention_dyn: demand.s(discount_dyn),
                    retention_hyb: demand.s(d_star),
                })
            }
        })
        .collect()
}
