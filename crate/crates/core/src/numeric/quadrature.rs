use std::f64::consts::PI;

/// Gauss–Legendre rule on [-1, 1]; nodes via Newton iteration on P_n.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "need at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, z);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integral of `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        if b == a {
            return 0.0;
        }
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = super::NeumaierSum::new();
        for (z, w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(mid + half * z));
        }
        acc.value() * half
    }

    /// Integral split into `panels` equal pieces.
    pub fn integrate_composite<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64, panels: usize) -> f64 {
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        let mut acc = super::NeumaierSum::new();
        for k in 0..panels {
            let lo = a + h * k as f64;
            let hi = if k + 1 == panels { b } else { lo + h };
            acc.add(self.integrate(&mut f, lo, hi));
        }
        acc.value()
    }
}

// (P_n(z), P_n'(z)) by the three-term recurrence
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        let gl = GaussLegendre::new(64);
        let s: f64 = gl.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-13);
    }

    #[test]
    fn exact_for_high_degree_polynomials() {
        let gl = GaussLegendre::new(64);
        let v = gl.integrate(|x| x.powi(100), 0.0, 1.0);
        assert!((v - 1.0 / 101.0).abs() < 1e-14);
        let v = gl.integrate(|x| x.exp(), -1.0, 2.0);
        assert!((v - (2f64.exp() - (-1f64).exp())).abs() < 1e-13);
    }

    #[test]
    fn small_rules() {
        let gl = GaussLegendre::new(3);
        let v = gl.integrate(|x| x.powi(5) + x * x, -1.0, 1.0);
        assert!((v - 2.0 / 3.0).abs() < 1e-15);
    }
}
