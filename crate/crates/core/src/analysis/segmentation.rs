use serde::Serialize;

use crate::exo_policy::ExoParams;

/// Lender NPV from a borrower who defaults in period `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TypeNpv {
    pub k: usize,
    pub repayment: f64,
    pub pv_interest: f64,
    pub pv_default_loss: f64,
    pub npv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NpvReport {
    pub trajectory: Vec<f64>,
    pub types: Vec<TypeNpv>,
    /// NPV from a borrower who never defaults.
    pub npv_infinity: f64,
    /// First profitable type.
    pub k_star: Option<usize>,
    pub theta_star: Option<f64>,
    /// Limit of the trajectory.
    pub x_bar: f64,
    pub params: ExoParams,
}

/// Decomposes NPV by default period along a repayment trajectory.
///
/// Levels beyond the end of `trajectory` repeat its last value.
pub fn npv_by_type(trajectory: &[f64], params: &ExoParams, k_max: usize) -> NpvReport {
    assert!(!trajectory.is_empty(), "trajectory must not be empty");
    let (rho, d) = (params.rho, params.d);
    let last = trajectory[trajectory.len() - 1];
    let y = |i: usize| trajectory.get(i).copied().unwrap_or(last);
    let mut types = Vec::with_capacity(k_max + 1);
    let mut interest = 0.0;
    let mut disc = 1.0;
    for k in 0..=k_max {
        let loss = disc * d * y(k);
        types.push(TypeNpv { k, repayment: y(k), pv_interest: interest, pv_default_loss: loss, npv: interest - loss });
        interest += disc * (rho - d) * y(k);
        disc *= rho;
    }
    let mut inf = 0.0;
    let mut disc = 1.0;
    for &yi in trajectory {
        inf += disc * (rho - d) * yi;
        disc *= rho;
    }
    inf += disc * (rho - d) * last / (1.0 - rho);
    let k_star = types.iter().position(|t| t.npv >= 0.0);
    NpvReport {
        trajectory: trajectory.to_vec(),
        theta_star: k_star.map(y),
        types,
        npv_infinity: inf,
        k_star,
        x_bar: last,
        params: *params,
    }
}

/// Half-open income interval `[lower, upper)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub lower: f64,
    pub upper: f64,
}

impl Segment {
    pub fn is_empty(&self) -> bool {
        !(self.upper > self.lower)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segments {
    pub unprofitable: Segment,
    /// Absent under a Grand Experiment.
    pub profitable: Option<Segment>,
    pub creditworthy: Segment,
}

/// Unprofitable / profitable / creditworthy split of `[0, u)` under Lean Experimentation.
pub fn segments(report: &NpvReport, support_upper: f64) -> Segments {
    let theta = report.theta_star.unwrap_or(report.x_bar);
    Segments {
        unprofitable: Segment { lower: 0.0, upper: theta },
        profitable: Some(Segment { lower: theta, upper: report.x_bar }),
        creditworthy: Segment { lower: report.x_bar, upper: support_upper },
    }
}

/// Under a Grand Experiment every non-creditworthy borrower is unprofitable.
pub fn ge_segments(x_bar: f64, support_upper: f64) -> Segments {
    Segments {
        unprofitable: Segment { lower: 0.0, upper: x_bar },
        profitable: None,
        creditworthy: Segment { lower: x_bar, upper: support_upper },
    }
}
