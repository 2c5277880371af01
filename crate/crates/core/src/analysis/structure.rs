use serde::Serialize;
use statrs::function::beta::{beta_reg, ln_beta};
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::Result;
use crate::numeric::{bracket_root, GaussLegendre, Grid, RootOptions};

/// One-parameter exponential family `h(x) exp(η(λ) T(x) - A(λ))` on `(0, upper)`.
pub trait ExponentialFamily: Sync {
    fn eta(&self, lambda: f64) -> f64;
    fn t(&self, x: f64) -> f64;
    fn h(&self, x: f64) -> f64;
    fn log_partition(&self, lambda: f64) -> f64;
    /// Finite upper end used for grids.
    fn upper(&self, lambda: f64) -> f64;

    fn density(&self, x: f64, lambda: f64) -> f64 {
        self.h(x) * (self.eta(lambda) * self.t(x) - self.log_partition(lambda)).exp()
    }

    /// `P(θ >= x)`; the default integrates the density numerically.
    fn survival(&self, x: f64, lambda: f64) -> f64 {
        let upper = self.upper(lambda);
        if x >= upper {
            return 0.0;
        }
        GaussLegendre::new(64).integrate_composite(|z| self.density(z, lambda), x, upper, 32)
    }

    fn g(&self, x: f64, lambda: f64) -> f64 {
        x * self.density(x, lambda) / self.survival(x, lambda)
    }
}

/// Beta(λ, λ): `η = λ - 1`, `T = ln(x(1-x))`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SymmetricBetaFamily;

impl ExponentialFamily for SymmetricBetaFamily {
    fn eta(&self, lambda: f64) -> f64 {
        lambda - 1.0
    }
    fn t(&self, x: f64) -> f64 {
        (x * (1.0 - x)).ln()
    }
    fn h(&self, _x: f64) -> f64 {
        1.0
    }
    fn log_partition(&self, lambda: f64) -> f64 {
        ln_beta(lambda, lambda)
    }
    fn upper(&self, _lambda: f64) -> f64 {
        1.0
    }
    fn survival(&self, x: f64, lambda: f64) -> f64 {
        if x >= 1.0 {
            0.0
        } else {
            beta_reg(lambda, lambda, 1.0 - x)
        }
    }
}

/// Gamma with shape λ and fixed scale: `η = λ - 1`, `T = ln x`.
#[derive(Debug, Clone, Copy)]
pub struct GammaShapeFamily {
    pub scale: f64,
}

impl ExponentialFamily for GammaShapeFamily {
    fn eta(&self, lambda: f64) -> f64 {
        lambda - 1.0
    }
    fn t(&self, x: f64) -> f64 {
        x.ln()
    }
    fn h(&self, x: f64) -> f64 {
        (-x / self.scale).exp()
    }
    fn log_partition(&self, lambda: f64) -> f64 {
        ln_gamma(lambda) + lambda * self.scale.ln()
    }
    fn upper(&self, lambda: f64) -> f64 {
        // far enough into the tail that S is below 1e-9 for moderate shapes
        self.scale * (lambda + 40.0 + 12.0 * lambda.sqrt())
    }
    fn survival(&self, x: f64, lambda: f64) -> f64 {
        gamma_ur(lambda, x / self.scale)
    }
}

type Scalar = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Family assembled from callbacks `(η, T, h, A)` on `(0, upper)`.
pub struct CallbackFamily {
    pub eta: Scalar,
    pub t: Scalar,
    pub h: Scalar,
    pub log_partition: Scalar,
    pub upper: f64,
}

impl ExponentialFamily for CallbackFamily {
    fn eta(&self, lambda: f64) -> f64 {
        (self.eta)(lambda)
    }
    fn t(&self, x: f64) -> f64 {
        (self.t)(x)
    }
    fn h(&self, x: f64) -> f64 {
        (self.h)(x)
    }
    fn log_partition(&self, lambda: f64) -> f64 {
        (self.log_partition)(lambda)
    }
    fn upper(&self, _lambda: f64) -> f64 {
        self.upper
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossingReport {
    pub crossing_count: usize,
    /// Location of the crossing when there is exactly one.
    pub x_star: Option<f64>,
    /// Sign of `G(·|λ1) - G(·|λ2)` at the left end of the grid (0 if identically zero).
    pub initial_sign: i8,
}

/// Relative size below which the two `G` values are treated as equal.
const CROSSING_TOL: f64 = 1e-12;

/// Counts sign changes of `G(·|λ1) - G(·|λ2)` on a grid that keeps a
/// relative margin of 1e-6 from both ends of the support.
pub fn single_crossing_check<F: ExponentialFamily + ?Sized>(
    family: &F,
    lambda1: f64,
    lambda2: f64,
    grid: usize,
) -> CrossingReport {
    let upper = family.upper(lambda1).min(family.upper(lambda2));
    let margin = 1e-6 * upper;
    let xs = Grid::uniform(margin, upper - margin, grid.max(2));
    let diff = |x: f64| {
        let (g1, g2) = (family.g(x, lambda1), family.g(x, lambda2));
        let d = g1 - g2;
        if d.abs() <= CROSSING_TOL * g1.abs().max(g2.abs()) {
            0.0
        } else {
            d
        }
    };
    let mut count = 0;
    let mut last: Option<(f64, f64)> = None;
    let mut initial_sign = 0i8;
    let mut bracket = None;
    for &x in &xs.points {
        let v = diff(x);
        if v == 0.0 || !v.is_finite() {
            continue;
        }
        if initial_sign == 0 {
            initial_sign = v.signum() as i8;
        }
        if let Some((px, pv)) = last {
            if pv.signum() != v.signum() {
                count += 1;
                bracket = Some((px, x));
            }
        }
        last = Some((x, v));
    }
    let x_star = if count == 1 {
        bracket.and_then(|(a, b)| bracket_root(diff, a, b, RootOptions { xtol: 1e-13, ..Default::default() }).ok())
    } else {
        None
    };
    CrossingReport { crossing_count: count, x_star, initial_sign }
}

/// Solves `G(x|λ) = target` within the family.
pub fn family_threshold<F: ExponentialFamily + ?Sized>(family: &F, lambda: f64, target: f64) -> Result<f64> {
    let upper = family.upper(lambda);
    let lo = upper * 1e-12;
    let hi = upper * (1.0 - 1e-9);
    bracket_root(|x| family.g(x, lambda) - target, lo, hi, RootOptions { xtol: 1e-14, ..Default::default() })
}

/// True when no interior point exceeds both the smallest value on its left
/// and the smallest value on its right (no interior strict maximum).
pub fn quasiconvexity_check(values: &[f64]) -> bool {
    let n = values.len();
    if n < 3 {
        return true;
    }
    let mut right_min = vec![f64::INFINITY; n];
    for i in (0..n - 1).rev() {
        right_min[i] = right_min[i + 1].min(values[i + 1]);
    }
    let mut left_min = values[0];
    for j in 1..n - 1 {
        if values[j] > left_min.max(right_min[j]) {
            return false;
        }
        left_min = left_min.min(values[j]);
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quasiconvexity_examples() {
        assert!(quasiconvexity_check(&[1.0, 2.0, 3.0]));
        assert!(quasiconvexity_check(&[3.0, 1.0, 2.0, 5.0]));
        assert!(!quasiconvexity_check(&[1.0, 3.0, 2.0]));
    }

    #[test]
    fn identical_parameters_never_cross() {
        let r = single_crossing_check(&SymmetricBetaFamily, 2.0, 2.0, 1000);
        assert_eq!(r.crossing_count, 0);
        assert_eq!(r.initial_sign, 0);
    }

    #[test]
    fn default_survival_matches_closed_form() {
        let fam = CallbackFamily {
            eta: Box::new(|l| l - 1.0),
            t: Box::new(|x: f64| (x * (1.0 - x)).ln()),
            h: Box::new(|_| 1.0),
            log_partition: Box::new(|l| ln_beta(l, l)),
            upper: 1.0,
        };
        for x in [0.1, 0.5, 0.8] {
            assert!((fam.survival(x, 2.5) - SymmetricBetaFamily.survival(x, 2.5)).abs() < 1e-12);
        }
    }
}
