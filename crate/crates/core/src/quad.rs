//! Composite Gauss–Legendre quadrature on graded panels.
//!
//! Everything downstream integrates even weights over `[-R, R]`, so rules are
//! stored on the half line `(0, R]` and integrands are folded: even
//! integrands are doubled, general integrands are evaluated at `±x`.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Compensated (Kahan) accumulator for the inner-product sums.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence and cached per point count.
type RuleCache = Mutex<BTreeMap<usize, Arc<(Vec<f64>, Vec<f64>)>>>;

pub fn gauss_legendre(n: usize) -> Arc<(Vec<f64>, Vec<f64>)> {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    let mut guard = cache.lock().expect("gauss rule cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| Arc::new(compute_gauss_legendre(n)))
        .clone()
}

fn compute_gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2, "need at least two nodes");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_pair(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_pair(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        let (_, d) = legendre_pair(n, 0.0);
        nodes[n / 2] = 0.0;
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

/// Value and derivative of the Legendre polynomial P_n at x.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Panel layout on `[0, R]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grading {
    /// Panel widths grow geometrically away from the origin by this ratio.
    Geometric(f64),
    Uniform,
}

/// Composite rule on the half line `(0, R]`.
#[derive(Debug, Clone)]
pub struct HalfLineRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub radius: f64,
}

impl HalfLineRule {
    pub fn new(radius: f64, panels: usize, nodes_per_panel: usize, grading: Grading) -> Self {
        assert!(radius > 0.0 && panels > 0);
        let bounds = panel_bounds(radius, panels, grading);
        let base = gauss_legendre(nodes_per_panel);
        let mut nodes = Vec::with_capacity(panels * nodes_per_panel);
        let mut weights = Vec::with_capacity(panels * nodes_per_panel);
        for p in 0..panels {
            let (lo, hi) = (bounds[p], bounds[p + 1]);
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (t, w) in base.0.iter().zip(base.1.iter()) {
                nodes.push(mid + half * t);
                weights.push(half * w);
            }
        }
        Self {
            nodes,
            weights,
            radius,
        }
    }

    /// ∫_{-R}^{R} f(x) dx for even f, folded to the half line.
    pub fn integrate_even<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        let mut acc = KahanSum::new();
        for (&x, &w) in self.nodes.iter().zip(self.weights.iter()) {
            acc.add(2.0 * w * f(x));
        }
        acc.total()
    }

    /// ∫_{-R}^{R} f(x) dx for general f, evaluated at ±x.
    pub fn integrate_full<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        let mut acc = KahanSum::new();
        for (&x, &w) in self.nodes.iter().zip(self.weights.iter()) {
            acc.add(w * (f(x) + f(-x)));
        }
        acc.total()
    }
}

fn panel_bounds(radius: f64, panels: usize, grading: Grading) -> Vec<f64> {
    let mut bounds = Vec::with_capacity(panels + 1);
    match grading {
        Grading::Uniform => {
            for i in 0..=panels {
                bounds.push(radius * i as f64 / panels as f64);
            }
        }
        Grading::Geometric(ratio) => {
            assert!(ratio > 1.0);
            // widths w0 * ratio^i summing to R
            let w0 = radius * (ratio - 1.0) / (ratio.powi(panels as i32) - 1.0);
            let mut x = 0.0;
            bounds.push(0.0);
            let mut w = w0;
            for _ in 0..panels {
                x += w;
                bounds.push(x);
                w *= ratio;
            }
            let last = bounds.len() - 1;
            bounds[last] = radius;
        }
    }
    bounds
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = gauss_legendre(8);
        // degree 15 monomial on [-1,1]
        let exact = 2.0 / 15.0;
        let got: f64 = rule
            .0
            .iter()
            .zip(rule.1.iter())
            .map(|(x, w)| w * x.powi(14))
            .sum();
        assert!((got - exact).abs() < 1e-14, "got {got}");
        let sum_w: f64 = rule.1.iter().sum();
        assert!((sum_w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn half_line_rule_gaussian() {
        // ∫ e^{-2x^2} dx over R = sqrt(pi/2)
        let rule = HalfLineRule::new(8.0, 10, 40, Grading::Geometric(1.2));
        let got = rule.integrate_even(|x| (-2.0 * x * x).exp());
        let exact = (std::f64::consts::PI / 2.0).sqrt();
        assert!((got - exact).abs() < 1e-13, "got {got} vs {exact}");
    }

    #[test]
    fn full_line_handles_asymmetric_integrands() {
        // ∫ e^{-(x-1)^2} dx = sqrt(pi)
        let rule = HalfLineRule::new(12.0, 12, 40, Grading::Uniform);
        let got = rule.integrate_full(|x| (-(x - 1.0) * (x - 1.0)).exp());
        assert!((got - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn geometric_bounds_cover_interval() {
        let b = panel_bounds(25.0, 13, Grading::Geometric(1.15));
        assert_eq!(b.len(), 14);
        assert_eq!(b[0], 0.0);
        assert_eq!(*b.last().unwrap(), 25.0);
        for w in b.windows(2) {
            assert!(w[1] > w[0]);
        }
    }
}
