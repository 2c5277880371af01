use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    pub xtol: f64,
    pub ftol: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions { xtol: 1e-14, ftol: 0.0, max_iter: 400 }
    }
}

/// Root of `f` on `[lo, hi]` by bisection with secant (Illinois) acceleration.
///
/// The bracket is kept throughout, so convergence is guaranteed for any
/// continuous `f` whose endpoint values differ in sign.
pub fn bracket_root<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, opts: RootOptions) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa.is_nan() || fb.is_nan() {
        return Err(Error::Domain(format!("function is NaN at bracket end [{lo}, {hi}]")));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoBracket { lo, hi, f_lo: fa, f_hi: fb });
    }
    // side tracks which endpoint was retained on the last step (Illinois rule)
    let mut side = 0i8;
    for _ in 0..opts.max_iter {
        let width = (b - a).abs();
        if width <= opts.xtol * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        let mut c = (a * fb - b * fa) / (fb - fa);
        let mid = 0.5 * (a + b);
        // fall back to bisection when the secant point is degenerate or too close to an end
        let lo_c = a.min(b) + 0.01 * width;
        let hi_c = a.max(b) - 0.01 * width;
        if !c.is_finite() || c <= lo_c || c >= hi_c {
            c = mid;
        }
        let fc = f(c);
        if fc.is_nan() {
            return Err(Error::Domain(format!("function is NaN at {c}")));
        }
        if fc == 0.0 || fc.abs() <= opts.ftol {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        // guarantee at least halving every other step
        if (b - a).abs() > 0.5 * width {
            let m = 0.5 * (a + b);
            let fm = f(m);
            if fm == 0.0 {
                return Ok(m);
            }
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
                fb = fm;
            }
            side = 0;
        }
    }
    Ok(if fa.abs() < fb.abs() { a } else { b })
}

/// Maximiser of a unimodal `f` on `[lo, hi]` by golden-section search.
/// Returns `(argmax, max)`.
pub fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, xtol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    if b <= a {
        return (a, f(a));
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > xtol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    // the endpoints are candidates too: the maximum may sit on the boundary
    let (mut best_x, mut best_f) = if fc >= fd { (c, fc) } else { (d, fd) };
    for x in [lo, hi] {
        let fx = f(x);
        if fx > best_f {
            best_x = x;
            best_f = fx;
        }
    }
    (best_x, best_f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = bracket_root(|x| x * x - 2.0, 0.0, 2.0, RootOptions::default()).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn reports_missing_bracket() {
        let e = bracket_root(|x| x * x + 1.0, -1.0, 1.0, RootOptions::default()).unwrap_err();
        assert!(matches!(e, Error::NoBracket { .. }));
    }

    #[test]
    fn handles_flat_steep_functions() {
        let r = bracket_root(|x: f64| x.powi(9) - 1e-9, 0.0, 1.0, RootOptions::default()).unwrap();
        assert!((r - 1e-1).abs() < 1e-12);
    }

    #[test]
    fn golden_section_interior_and_boundary() {
        let (x, fx) = golden_section_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6 && fx <= 0.0);
        let (x, _) = golden_section_max(|x| x, 0.0, 1.0, 1e-12);
        assert_eq!(x, 1.0);
    }
}
