//! Acceptance probability `s(d)` of a loan offered at discount `d`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{bracket_root, RootOptions};

/// Absolute tolerance on elasticity differences used by [`classify_regime`].
pub const REGIME_TOL: f64 = 1e-9;

/// Serializable description of a demand curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum DemandSpec {
    /// `s(d) = d^alpha`.
    ConstantElasticity { alpha: f64 },
    /// `s(d) = 1 - exp(-rate d)`; elasticity decreases in `d`.
    Exponential { rate: f64 },
    /// `s(d) = d^alpha (1 + c d) / (1 + c)`; elasticity increases in `d`.
    PowerLinear { alpha: f64, c: f64 },
    /// Tabulated `(d, s)` pairs, interpolated linearly in log-log space.
    Table { points: Vec<[f64; 2]> },
}

type CurveFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Curve {
    Spec(DemandSpec),
    Custom { s: CurveFn, ds: Option<CurveFn> },
}

/// A demand curve on the domain `(0, upper]`.
#[derive(Clone)]
pub struct DemandFunction {
    curve: Curve,
    upper: f64,
}

impl fmt::Debug for DemandFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.curve {
            Curve::Spec(s) => f.debug_struct("DemandFunction").field("spec", s).field("upper", &self.upper).finish(),
            Curve::Custom { .. } => {
                f.debug_struct("DemandFunction").field("spec", &"custom").field("upper", &self.upper).finish()
            }
        }
    }
}

/// Shape of the elasticity `d s'(d) / s(d)` over the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Constant,
    Increasing,
    Decreasing,
    Mixed,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::Constant => "constant",
            Regime::Increasing => "increasing",
            Regime::Decreasing => "decreasing",
            Regime::Mixed => "mixed",
        };
        f.write_str(s)
    }
}

impl DemandFunction {
    pub fn from_spec(spec: DemandSpec) -> Result<Self> {
        match &spec {
            DemandSpec::ConstantElasticity { alpha } => {
                if !(*alpha > 0.0 && *alpha <= 1.0) {
                    return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1], got {alpha}")));
                }
            }
            DemandSpec::Exponential { rate } => {
                if !(rate.is_finite() && *rate > 0.0) {
                    return Err(Error::InvalidParameter(format!("rate must be positive, got {rate}")));
                }
            }
            DemandSpec::PowerLinear { alpha, c } => {
                if !(*alpha > 0.0 && *alpha < 1.0) || !(c.is_finite() && *c >= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "power_linear needs alpha in (0,1) and c >= 0, got ({alpha}, {c})"
                    )));
                }
            }
            DemandSpec::Table { points } => {
                if points.len() < 2 {
                    return Err(Error::InvalidParameter("demand table needs at least two points".into()));
                }
                for p in points {
                    if !(p[0] > 0.0 && p[1] > 0.0 && p[1] <= 1.0 && p[0].is_finite()) {
                        return Err(Error::InvalidParameter(format!(
                            "table point ({}, {}) must have d > 0 and s in (0, 1]",
                            p[0], p[1]
                        )));
                    }
                }
                if points.windows(2).any(|w| !(w[1][0] > w[0][0] && w[1][1] > w[0][1])) {
                    return Err(Error::InvalidParameter("table must be strictly increasing in d and s".into()));
                }
            }
        }
        Ok(DemandFunction { curve: Curve::Spec(spec), upper: 1.0 })
    }

    pub fn constant_elasticity(alpha: f64) -> Result<Self> {
        Self::from_spec(DemandSpec::ConstantElasticity { alpha })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::from_spec(DemandSpec::Exponential { rate })
    }

    pub fn power_linear(alpha: f64, c: f64) -> Result<Self> {
        Self::from_spec(DemandSpec::PowerLinear { alpha, c })
    }

    pub fn table(points: Vec<[f64; 2]>) -> Result<Self> {
        Self::from_spec(DemandSpec::Table { points })
    }

    /// Demand from closures; `ds` falls back to central differences when absent.
    pub fn custom<S, D>(s: S, ds: Option<D>) -> Self
    where
        S: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        DemandFunction { curve: Curve::Custom { s: Arc::new(s), ds: ds.map(|d| Arc::new(d) as CurveFn) }, upper: 1.0 }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_spec(serde_json::from_str(s)?)
    }

    /// Restricts the domain to `(0, upper]`.
    pub fn with_domain(mut self, upper: f64) -> Self {
        self.upper = upper;
        self
    }

    pub fn domain_upper(&self) -> f64 {
        self.upper
    }

    pub fn spec(&self) -> Option<&DemandSpec> {
        match &self.curve {
            Curve::Spec(s) => Some(s),
            Curve::Custom { .. } => None,
        }
    }

    /// The exponent when the curve is `d^alpha`.
    pub fn constant_alpha(&self) -> Option<f64> {
        match self.spec() {
            Some(DemandSpec::ConstantElasticity { alpha }) => Some(*alpha),
            _ => None,
        }
    }

    pub fn s(&self, d: f64) -> f64 {
        if d <= 0.0 {
            return 0.0;
        }
        match &self.curve {
            Curve::Custom { s, .. } => s(d),
            Curve::Spec(spec) => match spec {
                DemandSpec::ConstantElasticity { alpha } => d.powf(*alpha),
                DemandSpec::Exponential { rate } => -(-rate * d).exp_m1(),
                DemandSpec::PowerLinear { alpha, c } => d.powf(*alpha) * (1.0 + c * d) / (1.0 + c),
                DemandSpec::Table { points } => {
                    let (ln_s, _) = table_eval(points, d);
                    ln_s.exp()
                }
            },
        }
    }

    pub fn ds(&self, d: f64) -> f64 {
        match &self.curve {
            Curve::Custom { ds: Some(ds), .. } => ds(d),
            Curve::Custom { ds: None, .. } => {
                let h = 1e-6 * d.max(1e-8);
                (self.s(d + h) - self.s(d - h)) / (2.0 * h)
            }
            Curve::Spec(spec) => match spec {
                DemandSpec::ConstantElasticity { alpha } => alpha * d.powf(alpha - 1.0),
                DemandSpec::Exponential { rate } => rate * (-rate * d).exp(),
                DemandSpec::PowerLinear { alpha, c } => {
                    d.powf(alpha - 1.0) * (alpha + c * (alpha + 1.0) * d) / (1.0 + c)
                }
                DemandSpec::Table { points } => {
                    let (ln_s, slope) = table_eval(points, d);
                    ln_s.exp() * slope / d
                }
            },
        }
    }

    /// Second derivative by central differences of `s'`.
    pub fn d2s(&self, d: f64) -> f64 {
        let h = 1e-5 * d;
        (self.ds(d + h) - self.ds(d - h)) / (2.0 * h)
    }

    /// Elasticity `ξ(d) = d s'(d) / s(d)`.
    pub fn elasticity(&self, d: f64) -> f64 {
        match &self.curve {
            Curve::Spec(DemandSpec::ConstantElasticity { alpha }) => *alpha,
            Curve::Spec(DemandSpec::Table { points }) => table_eval(points, d).1,
            _ => d * self.ds(d) / self.s(d),
        }
    }

    /// `η(d) = d + s(d) / s'(d)`; increasing for concave `s`.
    pub fn eta(&self, d: f64) -> f64 {
        d + d / self.elasticity(d)
    }

    /// Solves `η(d) = target` for `d` in `[lo, hi]`, clamping to the ends.
    pub fn eta_inverse(&self, target: f64, lo: f64, hi: f64) -> f64 {
        if target <= self.eta(lo) {
            return lo;
        }
        if target >= self.eta(hi) {
            return hi;
        }
        bracket_root(|d| self.eta(d) - target, lo, hi, RootOptions { xtol: 1e-15, ..Default::default() }).unwrap_or(hi)
    }

    /// Checks `s(0) = 0`, `s` in `[0, 1]`, `s' > 0` and `s'' <= 0` on `(0, rho]`.
    pub fn validate(&self, rho: f64) -> Result<()> {
        if self.s(0.0) != 0.0 {
            return Err(Error::Assumption("s(0) must be 0".into()));
        }
        let n = 400;
        for i in 1..=n {
            let d = rho * i as f64 / n as f64;
            let (s, ds) = (self.s(d), self.ds(d));
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::Assumption(format!("s({d}) = {s} outside [0, 1]")));
            }
            if !(ds > 0.0) {
                return Err(Error::Assumption(format!("s'({d}) = {ds} is not positive")));
            }
            if i < n {
                let d2 = self.d2s(d);
                // linear demand (alpha = 1) sits on the concavity boundary and is accepted
                if d2 > 1e-6 * (1.0 + ds / d) {
                    return Err(Error::Assumption(format!("s''({d}) = {d2} is positive")));
                }
            }
        }
        Ok(())
    }
}

// (ln s, d ln s / d ln d) for a log-log piecewise-linear table
fn table_eval(points: &[[f64; 2]], d: f64) -> (f64, f64) {
    let ld = d.ln();
    let n = points.len();
    let i = points.partition_point(|p| p[0] <= d).saturating_sub(1).min(n - 2);
    let (x0, y0) = (points[i][0].ln(), points[i][1].ln());
    let (x1, y1) = (points[i + 1][0].ln(), points[i + 1][1].ln());
    let slope = (y1 - y0) / (x1 - x0);
    (y0 + slope * (ld - x0), slope)
}

/// Classifies the elasticity on `grid_size` interior points of the domain.
pub fn classify_regime(demand: &DemandFunction, grid_size: usize) -> Regime {
    let n = grid_size.max(3);
    let upper = demand.domain_upper();
    let xi: Vec<f64> = (1..=n).map(|i| demand.elasticity(upper * i as f64 / (n + 1) as f64)).collect();
    let (mut up, mut down) = (false, false);
    for w in xi.windows(2) {
        let diff = w[1] - w[0];
        if diff > REGIME_TOL {
            up = true;
        } else if diff < -REGIME_TOL {
            down = true;
        }
    }
    match (up, down) {
        (false, false) => Regime::Constant,
        (true, false) => Regime::Increasing,
        (false, true) => Regime::Decreasing,
        (true, true) => Regime::Mixed,
    }
}

/// `(ρ - d) s'(d) + ρ s(d)^2 - s(d)`, whose root is the stationary discount.
pub fn d_star_residual(demand: &DemandFunction, rho: f64, d: f64) -> f64 {
    let s = demand.s(d);
    (rho - d) * demand.ds(d) + rho * s * s - s
}

/// Stationary discount `d*` on `(0, ρ)`; errors when the root is not unique.
pub fn solve_d_star(demand: &DemandFunction, rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidParameter(format!("rho must lie in (0, 1), got {rho}")));
    }
    let lo = rho * 1e-12;
    let n = 2000;
    let mut changes = 0;
    let mut bracket = None;
    // sign changes between nonzero samples; a root landing on a node counts once
    let mut prev = (lo, d_star_residual(demand, rho, lo));
    for i in 1..=n {
        let d = rho * i as f64 / n as f64;
        let f = d_star_residual(demand, rho, d);
        if f == 0.0 {
            continue;
        }
        if prev.1 != 0.0 && f.signum() != prev.1.signum() {
            changes += 1;
            if bracket.is_none() {
                bracket = Some((prev.0, d));
            }
        }
        prev = (d, f);
    }
    if changes > 1 {
        return Err(Error::Assumption(format!("stationary discount is not unique ({changes} roots)")));
    }
    let (a, b) = bracket.ok_or_else(|| Error::NoBracket {
        lo,
        hi: rho,
        f_lo: d_star_residual(demand, rho, lo),
        f_hi: d_star_residual(demand, rho, rho),
    })?;
    bracket_root(|d| d_star_residual(demand, rho, d), a, b, RootOptions { xtol: 1e-16, ..Default::default() })
}

/// Stationary value multiplier `β = (1 - s* d*) / (1 - s* ρ)`.
pub fn beta_factor(demand: &DemandFunction, rho: f64, d_star: f64) -> f64 {
    let s = demand.s(d_star);
    (1.0 - s * d_star) / (1.0 - s * rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_demand_d_star() {
        let dem = DemandFunction::constant_elasticity(1.0).unwrap();
        let d = solve_d_star(&dem, 0.95).unwrap();
        let closed = (1.0 - (1.0f64 - 0.95 * 0.95).sqrt()) / 0.95;
        assert!((d - closed).abs() < 1e-13);
        assert!((2.0 * d / (1.0 + d * d) - 0.95).abs() < 1e-13);
    }

    #[test]
    fn power_law_table_has_constant_elasticity() {
        let pts: Vec<[f64; 2]> = [0.01, 0.1, 0.3, 0.6, 1.0].iter().map(|&d: &f64| [d, d.powf(0.5)]).collect();
        let dem = DemandFunction::table(pts).unwrap().with_domain(0.95);
        assert_eq!(classify_regime(&dem, 200), Regime::Constant);
        assert!((dem.s(0.42) - 0.42f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn regimes_of_builtin_families() {
        let c = DemandFunction::constant_elasticity(0.5).unwrap().with_domain(0.95);
        let e = DemandFunction::exponential(3.0).unwrap().with_domain(0.95);
        let p = DemandFunction::power_linear(0.5, 0.2).unwrap().with_domain(0.95);
        assert_eq!(classify_regime(&c, 100), Regime::Constant);
        assert_eq!(classify_regime(&e, 100), Regime::Decreasing);
        assert_eq!(classify_regime(&p, 100), Regime::Increasing);
        for dem in [c, e, p] {
            dem.validate(0.95).unwrap();
        }
    }

    #[test]
    fn eta_inverse_roundtrip() {
        let dem = DemandFunction::exponential(2.0).unwrap();
        let d = 0.4;
        let back = dem.eta_inverse(dem.eta(d), 1e-9, 0.95);
        assert!((back - d).abs() < 1e-12);
    }

    #[test]
    fn rejects_convex_demand() {
        let dem = DemandFunction::custom(|d: f64| d * d, Some(|d: f64| 2.0 * d));
        assert!(dem.validate(0.95).is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(DemandFunction::from_json(r#"{"kind":"constant_elasticity","params":{"alpha":0.5}}"#).is_ok());
        assert!(DemandFunction::from_json(r#"{"kind":"constant_elasticity","params":{"alpha":0.5,"beta":1}}"#).is_err());
    }
}
