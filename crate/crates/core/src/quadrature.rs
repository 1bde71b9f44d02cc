//! Gauss-Legendre quadrature with composite panels for oscillatory
//! integrands.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
///
/// Newton iteration on the Legendre recurrence; accurate to machine
/// precision for the moderate orders used here.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// A reusable Gauss-Legendre rule of fixed order.
#[derive(Debug, Clone)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(order: usize) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Integrate `f` over `[a, b]` with a single panel.
    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(mid + half * x);
        }
        sum * half
    }

    /// Integrate over `[a, b]` split into `panels` equal panels. Used when
    /// the integrand oscillates faster than one panel can resolve.
    pub fn integrate_panels(&self, a: f64, b: f64, panels: usize, f: impl Fn(f64) -> f64) -> f64 {
        let panels = panels.max(1);
        let step = (b - a) / panels as f64;
        let mut sum = 0.0;
        for i in 0..panels {
            let lo = a + step * i as f64;
            sum += self.integrate(lo, lo + step, &f);
        }
        sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_are_symmetric_and_weights_sum_to_two() {
        for order in [8, 64] {
            let (x, w) = gauss_legendre(order);
            let total: f64 = w.iter().sum();
            assert!((total - 2.0).abs() < 1e-13);
            for i in 0..order {
                assert!((x[i] + x[order - 1 - i]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn exact_on_high_degree_polynomials() {
        let rule = GaussRule::new(8);
        // degree 15 is the highest exactly integrated by 8 nodes
        let val = rule.integrate(0.0, 1.0, |x| x.powi(15));
        assert!((val - 1.0 / 16.0).abs() < 1e-14);
    }

    #[test]
    fn oscillatory_integral_with_panels() {
        let rule = GaussRule::new(64);
        // int_0^1 cos(s u) du = sin(s)/s
        for s in [10.0, 60.0, 100.0] {
            let panels = 1 + (s / 30.0) as usize;
            let val = rule.integrate_panels(0.0, 1.0, panels, |u| (s * u).cos());
            assert!((val - s.sin() / s).abs() < 1e-12, "s={s}");
        }
    }
}
