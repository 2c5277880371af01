use serde::{Deserialize, Serialize};

/// Sorted grid with piecewise-linear interpolation helpers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Grid {
    pub points: Vec<f64>,
}

impl Grid {
    pub fn new(mut points: Vec<f64>) -> Self {
        points.sort_by(|a, b| a.partial_cmp(b).expect("grid contains NaN"));
        points.dedup();
        Grid { points }
    }

    /// `n` equally spaced points on `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64, n: usize) -> Self {
        let n = n.max(2);
        let h = (hi - lo) / (n - 1) as f64;
        let mut pts: Vec<f64> = (0..n).map(|i| lo + h * i as f64).collect();
        pts[n - 1] = hi;
        Grid { points: pts }
    }

    /// `n` geometrically spaced points on `[lo, hi]`, `lo > 0`.
    pub fn geometric(lo: f64, hi: f64, n: usize) -> Self {
        let n = n.max(2);
        let (a, b) = (lo.ln(), hi.ln());
        let mut pts: Vec<f64> = (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect();
        pts[0] = lo;
        pts[n - 1] = hi;
        Grid { points: pts }
    }

    /// Adds `factor`-times denser points inside `[lo, hi]`.
    pub fn refined(&self, lo: f64, hi: f64, factor: usize) -> Self {
        let mut pts = self.points.clone();
        for w in self.points.windows(2) {
            if w[1] <= lo || w[0] >= hi {
                continue;
            }
            for k in 1..factor {
                pts.push(w[0] + (w[1] - w[0]) * k as f64 / factor as f64);
            }
        }
        Grid::new(pts)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn lower(&self) -> f64 {
        self.points[0]
    }

    pub fn upper(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// Index `i` with `points[i] <= x < points[i+1]`, clamped to valid segments.
    pub fn segment(&self, x: f64) -> usize {
        let n = self.points.len();
        let i = self.points.partition_point(|&p| p <= x);
        i.saturating_sub(1).min(n - 2)
    }
}

/// Piecewise-linear interpolation; linear extrapolation beyond the ends.
pub fn interp_linear(grid: &Grid, values: &[f64], x: f64) -> f64 {
    let i = grid.segment(x);
    let (x0, x1) = (grid.points[i], grid.points[i + 1]);
    let t = (x - x0) / (x1 - x0);
    values[i] + t * (values[i + 1] - values[i])
}

/// Node slopes for a C1 cubic Hermite interpolant (weighted three-point rule).
pub fn hermite_slopes(grid: &Grid, values: &[f64]) -> Vec<f64> {
    let x = &grid.points;
    let n = x.len();
    let secant: Vec<f64> = (0..n - 1).map(|i| (values[i + 1] - values[i]) / (x[i + 1] - x[i])).collect();
    let mut m = vec![0.0; n];
    m[0] = secant[0];
    m[n - 1] = secant[n - 2];
    for i in 1..n - 1 {
        let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
        m[i] = (h1 * secant[i - 1] + h0 * secant[i]) / (h0 + h1);
    }
    m
}

/// Cubic Hermite interpolation with precomputed node slopes; linear beyond the ends.
pub fn interp_cubic(grid: &Grid, values: &[f64], slopes: &[f64], x: f64) -> f64 {
    let n = grid.points.len();
    if x <= grid.points[0] {
        return values[0] + slopes[0] * (x - grid.points[0]);
    }
    if x >= grid.points[n - 1] {
        return values[n - 1] + slopes[n - 1] * (x - grid.points[n - 1]);
    }
    let i = grid.segment(x);
    let (x0, x1) = (grid.points[i], grid.points[i + 1]);
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * values[i] + h10 * h * slopes[i] + h01 * values[i + 1] + h11 * h * slopes[i + 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_lines_exactly() {
        let g = Grid::uniform(0.0, 1.0, 11);
        let v: Vec<f64> = g.points.iter().map(|x| 3.0 * x + 1.0).collect();
        for x in [0.0, 0.05, 0.5, 0.999, 1.0, 1.2] {
            assert!((interp_linear(&g, &v, x) - (3.0 * x + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn cubic_reproduces_quadratics() {
        let g = Grid::new(vec![0.0, 0.1, 0.25, 0.3, 0.6, 0.7, 1.0]);
        let v: Vec<f64> = g.points.iter().map(|x| x * x - x).collect();
        let m = hermite_slopes(&g, &v);
        for x in [0.17, 0.28, 0.45, 0.66] {
            assert!((interp_cubic(&g, &v, &m, x) - (x * x - x)).abs() < 1e-14);
        }
    }

    #[test]
    fn refinement_keeps_original_points() {
        let g = Grid::uniform(0.0, 1.0, 11);
        let r = g.refined(0.35, 0.55, 4);
        for p in &g.points {
            assert!(r.points.contains(p));
        }
        assert!(r.len() > g.len());
    }
}
