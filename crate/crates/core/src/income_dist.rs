//! Income distributions and the size-biased hazard `G(x) = x f(x) / (1 - F(x))`.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::numeric::{bracket_root, Grid, RootOptions};

/// Upper-tail mass left out when an unbounded (or singular) support is truncated.
pub const TAIL_MASS: f64 = 1e-9;

/// Income distribution of the borrower's private type θ.
///
/// Survival follows the left-continuous convention `S(x) = P(θ >= x)`, and
/// `cdf(x) = 1 - S(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum IncomeDistribution {
    /// Uniform on `[0, upper]`.
    Uniform {
        upper: f64,
    },
    Beta {
        a: f64,
        b: f64,
    },
    Gamma {
        shape: f64,
        scale: f64,
    },
    Weibull {
        shape: f64,
        scale: f64,
    },
    /// Equal atoms at `center - delta` and `center + delta`.
    TwoPoint {
        center: f64,
        delta: f64,
    },
    /// Piecewise-linear density through `(x, density)` nodes, normalised on construction.
    EmpiricalGrid {
        x: Vec<f64>,
        density: Vec<f64>,
    },
}

/// Result of checking monotonicity of `G` on a sampling grid.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    pub monotone: bool,
    pub g_at_zero: f64,
    pub g_at_upper: f64,
    pub upper_at_least_one: bool,
    pub first_violation: Option<f64>,
}

impl AssumptionReport {
    pub fn holds(&self) -> bool {
        self.monotone && self.g_at_zero == 0.0 && self.upper_at_least_one
    }
}

impl IncomeDistribution {
    pub fn uniform() -> Self {
        IncomeDistribution::Uniform { upper: 1.0 }
    }

    pub fn beta(a: f64, b: f64) -> Result<Self> {
        Self::Beta { a, b }.validated()
    }

    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        Self::Gamma { shape, scale }.validated()
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        Self::Weibull { shape, scale }.validated()
    }

    pub fn two_point(center: f64, delta: f64) -> Result<Self> {
        Self::TwoPoint { center, delta }.validated()
    }

    pub fn empirical_grid(x: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        Self::EmpiricalGrid { x, density }.validated()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let d: IncomeDistribution = serde_json::from_str(s)?;
        d.validated()
    }

    /// Checks parameters and normalises tabulated densities.
    pub fn validated(self) -> Result<Self> {
        use IncomeDistribution::*;
        let pos = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match self {
            Uniform { upper } => {
                pos("upper", upper)?;
                Ok(self)
            }
            Beta { a, b } => {
                pos("a", a)?;
                pos("b", b)?;
                Ok(self)
            }
            Gamma { shape, scale } | Weibull { shape, scale } => {
                pos("shape", shape)?;
                pos("scale", scale)?;
                Ok(self)
            }
            TwoPoint { center, delta } => {
                pos("center", center)?;
                if !(delta.is_finite() && delta >= 0.0 && delta <= center) {
                    return Err(Error::InvalidParameter(format!("delta must lie in [0, center], got {delta}")));
                }
                Ok(self)
            }
            EmpiricalGrid { x, density } => {
                if x.len() < 2 || x.len() != density.len() {
                    return Err(Error::InvalidParameter("grid needs at least two (x, density) pairs".into()));
                }
                if x[0] != 0.0 {
                    return Err(Error::InvalidParameter("grid must start at 0".into()));
                }
                if x.windows(2).any(|w| !(w[1] > w[0])) || x.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidParameter(
                        "grid abscissae must be finite and strictly increasing".into(),
                    ));
                }
                if density.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::InvalidParameter("densities must be finite and non-negative".into()));
                }
                let mass: f64 =
                    x.windows(2).zip(density.windows(2)).map(|(w, f)| 0.5 * (w[1] - w[0]) * (f[0] + f[1])).sum();
                if !(mass > 0.0) {
                    return Err(Error::InvalidParameter("density has zero mass".into()));
                }
                let density = density.into_iter().map(|f| f / mass).collect();
                Ok(EmpiricalGrid { x, density })
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            IncomeDistribution::Uniform { .. } => "uniform",
            IncomeDistribution::Beta { .. } => "beta",
            IncomeDistribution::Gamma { .. } => "gamma",
            IncomeDistribution::Weibull { .. } => "weibull",
            IncomeDistribution::TwoPoint { .. } => "two_point",
            IncomeDistribution::EmpiricalGrid { .. } => "empirical_grid",
        }
    }

    /// True when the distribution has atoms (no density).
    pub fn is_discrete(&self) -> bool {
        matches!(self, IncomeDistribution::TwoPoint { .. })
    }

    /// Supremum of the support (may be infinite).
    pub fn support_upper(&self) -> f64 {
        match self {
            IncomeDistribution::Uniform { upper } => *upper,
            IncomeDistribution::Beta { .. } => 1.0,
            IncomeDistribution::Gamma { .. } | IncomeDistribution::Weibull { .. } => f64::INFINITY,
            IncomeDistribution::TwoPoint { center, delta } => center + delta,
            IncomeDistribution::EmpiricalGrid { x, .. } => x[x.len() - 1],
        }
    }

    /// Working upper bound for grids: the `1 - TAIL_MASS` quantile.
    pub fn truncation_upper(&self) -> f64 {
        if self.is_discrete() {
            return self.support_upper();
        }
        self.upper_tail_quantile(TAIL_MASS)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        use IncomeDistribution::*;
        if x < 0.0 {
            return 0.0;
        }
        match self {
            Uniform { upper } => {
                if x <= *upper {
                    1.0 / upper
                } else {
                    0.0
                }
            }
            Beta { a, b } => {
                if x > 1.0 {
                    return 0.0;
                }
                let ln_b = ln_gamma(*a) + ln_gamma(*b) - ln_gamma(a + b);
                ((a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln() - ln_b).exp()
            }
            Gamma { shape, scale } => {
                let z = x / scale;
                ((shape - 1.0) * z.ln() - z - ln_gamma(*shape)).exp() / scale
            }
            Weibull { shape, scale } => {
                let z = x / scale;
                shape / scale * z.powf(shape - 1.0) * (-z.powf(*shape)).exp()
            }
            TwoPoint { .. } => 0.0,
            EmpiricalGrid { x: xs, density } => {
                if x > xs[xs.len() - 1] {
                    return 0.0;
                }
                let g = grid_ref(xs);
                let i = g.segment(x);
                let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
                density[i] + t * (density[i + 1] - density[i])
            }
        }
    }

    /// `S(x) = P(θ >= x)`.
    pub fn survival(&self, x: f64) -> f64 {
        use IncomeDistribution::*;
        if x <= 0.0 {
            return 1.0;
        }
        match self {
            Uniform { upper } => (1.0 - x / upper).max(0.0),
            Beta { a, b } => {
                if x >= 1.0 {
                    0.0
                } else {
                    beta_reg(*b, *a, 1.0 - x)
                }
            }
            Gamma { shape, scale } => gamma_ur(*shape, x / scale),
            Weibull { shape, scale } => (-(x / scale).powf(*shape)).exp(),
            TwoPoint { center, delta } => {
                let (lo, hi) = (center - delta, center + delta);
                if *delta == 0.0 {
                    return if x <= lo { 1.0 } else { 0.0 };
                }
                if x <= lo {
                    1.0
                } else if x <= hi {
                    0.5
                } else {
                    0.0
                }
            }
            EmpiricalGrid { x: xs, density } => {
                let n = xs.len();
                if x >= xs[n - 1] {
                    return 0.0;
                }
                let i = grid_ref(xs).segment(x);
                // mass on the partial segment [x, x_{i+1}] of a linear density
                let f_x = self.pdf(x);
                let mut s = 0.5 * (xs[i + 1] - x) * (f_x + density[i + 1]);
                for j in (i + 1)..(n - 1) {
                    s += 0.5 * (xs[j + 1] - xs[j]) * (density[j] + density[j + 1]);
                }
                s.clamp(0.0, 1.0)
            }
        }
    }

    /// `F(x) = 1 - S(x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        use IncomeDistribution::*;
        if x <= 0.0 {
            return 0.0;
        }
        match self {
            Beta { a, b } if x < 0.5 => beta_reg(*a, *b, x),
            Gamma { shape, scale } => gamma_lr(*shape, x / scale),
            Weibull { shape, scale } => -(-(x / scale).powf(*shape)).exp_m1(),
            _ => 1.0 - self.survival(x),
        }
    }

    /// `P(θ >= y | θ >= x)` for `x <= y`.
    pub fn conditional_survival(&self, y: f64, x: f64) -> Result<f64> {
        if x > y {
            return Err(Error::Domain(format!("conditioning level {x} exceeds {y}")));
        }
        let sx = self.survival(x);
        if sx <= 0.0 {
            return Err(Error::Domain(format!("no mass above x = {x}")));
        }
        Ok((self.survival(y) / sx).clamp(0.0, 1.0))
    }

    /// Hazard rate `f(x) / S(x)`.
    pub fn hazard(&self, x: f64) -> f64 {
        self.pdf(x) / self.survival(x)
    }

    /// `G(x) = x f(x) / S(x)`, with `G(0) = 0` by continuity.
    pub fn g_value(&self, x: f64) -> Result<f64> {
        if self.is_discrete() {
            return Err(Error::Domain(format!("G is undefined for the atomic distribution {}", self.name())));
        }
        if x < 0.0 || x > self.support_upper() {
            return Err(Error::Domain(format!("x = {x} outside the support")));
        }
        if x == 0.0 {
            return Ok(0.0);
        }
        let s = self.survival(x);
        if s <= 0.0 {
            return Ok(f64::INFINITY);
        }
        Ok(x * self.pdf(x) / s)
    }

    /// Smallest `x` with `F(x) >= q`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Domain(format!("quantile level {q} outside [0, 1]")));
        }
        if q >= 0.5 {
            Ok(self.upper_tail_quantile(1.0 - q))
        } else {
            Ok(self.lower_quantile(q))
        }
    }

    fn lower_quantile(&self, q: f64) -> f64 {
        use IncomeDistribution::*;
        if q <= 0.0 {
            return 0.0;
        }
        match self {
            Uniform { upper } => q * upper,
            Weibull { shape, scale } => scale * (-(-q).ln_1p()).powf(1.0 / shape),
            TwoPoint { center, delta } => center - delta,
            _ => {
                let hi = self.upper_tail_quantile(0.5);
                bracket_root(|x| self.cdf(x) - q, 0.0, hi, RootOptions { xtol: 1e-15, ..Default::default() })
                    .unwrap_or(hi)
            }
        }
    }

    /// `x` with `S(x) = tail`, solved on the survival scale for accuracy near the top.
    pub fn upper_tail_quantile(&self, tail: f64) -> f64 {
        use IncomeDistribution::*;
        if tail <= 0.0 {
            return self.support_upper();
        }
        if tail >= 1.0 {
            return 0.0;
        }
        match self {
            Uniform { upper } => upper * (1.0 - tail),
            Weibull { shape, scale } => scale * (-tail.ln()).powf(1.0 / shape),
            TwoPoint { center, delta } => {
                if tail > 0.5 || *delta == 0.0 {
                    center - delta
                } else {
                    center + delta
                }
            }
            _ => {
                let mut hi = if self.support_upper().is_finite() { self.support_upper() } else { 1.0 };
                if !self.support_upper().is_finite() {
                    while self.survival(hi) > tail {
                        hi *= 2.0;
                    }
                }
                let target = tail.ln();
                let f = |x: f64| {
                    let s = self.survival(x);
                    if s <= 0.0 {
                        -1e300
                    } else {
                        s.ln() - target
                    }
                };
                bracket_root(f, 0.0, hi, RootOptions { xtol: 1e-15, ..Default::default() }).unwrap_or(hi)
            }
        }
    }

    /// Solves `G(x) = target` on the support.
    pub fn g_inverse(&self, target: f64) -> Result<f64> {
        if self.is_discrete() {
            return Err(Error::Domain(format!("G is undefined for the atomic distribution {}", self.name())));
        }
        if !(target >= 0.0) || !target.is_finite() {
            return Err(Error::Domain(format!("target {target} outside [0, inf)")));
        }
        if target == 0.0 {
            return Ok(0.0);
        }
        let mut hi = self.truncation_upper();
        let mut g_hi = self.g_value(hi)?;
        let mut tail = TAIL_MASS;
        while g_hi < target && tail > 1e-300 {
            tail *= 1e-10;
            hi = self.upper_tail_quantile(tail);
            g_hi = self.g_value(hi)?;
        }
        if g_hi < target {
            return Err(Error::NoBracket { lo: 0.0, hi, f_lo: -target, f_hi: g_hi - target });
        }
        bracket_root(
            |x| self.g_value(x).unwrap_or(f64::INFINITY) - target,
            0.0,
            hi,
            RootOptions { xtol: 1e-15, ftol: 0.0, max_iter: 500 },
        )
    }

    /// Samples `G` on a log-spaced grid and checks strict monotonicity.
    pub fn check_assumption1(&self, grid_size: usize) -> Result<AssumptionReport> {
        let upper = self.truncation_upper();
        let grid = Grid::geometric(upper * 1e-6, upper, grid_size.max(2));
        let mut prev = self.g_value(0.0)?;
        let g0 = prev;
        let mut first_violation = None;
        for &x in &grid.points {
            let g = self.g_value(x)?;
            if !(g > prev) && first_violation.is_none() {
                first_violation = Some(x);
            }
            prev = g;
        }
        Ok(AssumptionReport {
            monotone: first_violation.is_none(),
            g_at_zero: g0,
            g_at_upper: prev,
            upper_at_least_one: prev >= 1.0,
            first_violation,
        })
    }

    /// Mean of θ.
    pub fn mean(&self) -> f64 {
        use IncomeDistribution::*;
        match self {
            Uniform { upper } => 0.5 * upper,
            Beta { a, b } => a / (a + b),
            Gamma { shape, scale } => shape * scale,
            Weibull { shape, scale } => scale * ln_gamma(1.0 + 1.0 / shape).exp(),
            TwoPoint { center, .. } => *center,
            EmpiricalGrid { x, density } => x
                .windows(2)
                .zip(density.windows(2))
                .map(|(w, f)| {
                    let h = w[1] - w[0];
                    h * (f[0] * (2.0 * w[0] + w[1]) + f[1] * (w[0] + 2.0 * w[1])) / 6.0
                })
                .sum(),
        }
    }

    /// Variance of θ where a closed form is available.
    pub fn variance(&self) -> Option<f64> {
        use IncomeDistribution::*;
        match self {
            Uniform { upper } => Some(upper * upper / 12.0),
            Beta { a, b } => Some(a * b / ((a + b) * (a + b) * (a + b + 1.0))),
            Gamma { shape, scale } => Some(shape * scale * scale),
            TwoPoint { delta, .. } => Some(delta * delta),
            _ => None,
        }
    }

    /// Inverse-CDF draw from a uniform variate `u` in (0, 1).
    pub fn sample_from_uniform(&self, u: f64) -> f64 {
        use IncomeDistribution::*;
        match self {
            TwoPoint { center, delta } => {
                if u < 0.5 {
                    center - delta
                } else {
                    center + delta
                }
            }
            _ => self.quantile(u.clamp(0.0, 1.0)).unwrap_or(0.0),
        }
    }
}

fn grid_ref(xs: &[f64]) -> Grid {
    Grid { points: xs.to_vec() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_g_closed_form() {
        let d = IncomeDistribution::uniform();
        for x in [0.1, 0.4, 0.9] {
            assert!((d.g_value(x).unwrap() - x / (1.0 - x)).abs() < 1e-14);
        }
        assert!((d.g_inverse(1.0).unwrap() - 0.5).abs() < 1e-13);
    }

    #[test]
    fn beta_survival_matches_uniform_special_case() {
        let d = IncomeDistribution::beta(1.0, 1.0).unwrap();
        assert!((d.survival(0.3) - 0.7).abs() < 1e-14);
        assert!((d.pdf(0.3) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn left_continuous_survival_for_atoms() {
        let d = IncomeDistribution::two_point(0.5, 0.2).unwrap();
        assert_eq!(d.survival(0.3), 1.0);
        assert_eq!(d.survival(0.5), 0.5);
        assert_eq!(d.survival(0.7), 0.5);
        assert_eq!(d.survival(0.7000001), 0.0);
        assert!(d.g_value(0.4).is_err());
    }

    #[test]
    fn empirical_grid_reproduces_uniform() {
        let d = IncomeDistribution::empirical_grid(vec![0.0, 0.5, 1.0], vec![2.0, 2.0, 2.0]).unwrap();
        assert!((d.pdf(0.2) - 1.0).abs() < 1e-14);
        assert!((d.survival(0.2) - 0.8).abs() < 1e-14);
        assert!((d.mean() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn quantiles_invert_cdf() {
        for d in [
            IncomeDistribution::beta(2.0, 3.0).unwrap(),
            IncomeDistribution::gamma(2.5, 1.5).unwrap(),
            IncomeDistribution::weibull(1.7, 2.0).unwrap(),
        ] {
            for q in [0.01, 0.3, 0.5, 0.9, 0.999] {
                let x = d.quantile(q).unwrap();
                assert!((d.cdf(x) - q).abs() < 1e-10, "{d:?} {q}");
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(IncomeDistribution::beta(-1.0, 2.0).is_err());
        assert!(IncomeDistribution::two_point(0.5, 0.7).is_err());
        assert!(IncomeDistribution::from_json(r#"{"kind":"beta","params":{"a":2,"b":2,"c":1}}"#).is_err());
        assert!(IncomeDistribution::from_json(r#"{"kind":"beta","params":{"a":2,"b":2}}"#).is_ok());
    }
}
