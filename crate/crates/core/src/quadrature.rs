//! Gauss–Legendre rules and product grids over coupling directions and splittings.

use std::f64::consts::PI;

/// Nodes and weights on `[-1, 1]`; weights sum to 2.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// A one-dimensional rule whose weights sum to one.
#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn single(x: f64) -> Self {
        Self { nodes: vec![x], weights: vec![1.0] }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Composite Gauss–Legendre on `[lo, hi]` with `panels` equal panels of `n` nodes,
/// normalized to the uniform probability measure.
pub fn uniform_interval(lo: f64, hi: f64, n: usize, panels: usize) -> Rule {
    if hi == lo {
        return Rule::single(lo);
    }
    let (x, w) = gauss_legendre(n);
    let panels = panels.max(1);
    let h = (hi - lo) / panels as f64;
    let mut nodes = Vec::with_capacity(n * panels);
    let mut weights = Vec::with_capacity(n * panels);
    for p in 0..panels {
        let a = lo + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(a + 0.5 * h * (xi + 1.0));
            weights.push(0.5 * wi / panels as f64);
        }
    }
    Rule { nodes, weights }
}

/// Directions on the sphere: Gauss–Legendre in `cos θ` times uniform `φ`.
/// Each entry is `(θ, φ, weight)`, weights summing to one.
pub fn sphere(n_cos_theta: usize, n_phi: usize) -> Vec<(f64, f64, f64)> {
    let theta = polar_rule(n_cos_theta);
    let phi = azimuth_rule(n_phi);
    let mut out = Vec::with_capacity(theta.len() * phi.len());
    for (t, wt) in theta.nodes.iter().zip(&theta.weights) {
        for (p, wp) in phi.nodes.iter().zip(&phi.weights) {
            out.push((*t, *p, wt * wp));
        }
    }
    out
}

/// Polar angles `θ = arccos(x)` at Gauss–Legendre nodes `x`.
pub fn polar_rule(n: usize) -> Rule {
    let (x, w) = gauss_legendre(n);
    Rule {
        nodes: x.iter().map(|c| c.acos()).collect(),
        weights: w.iter().map(|wi| wi / 2.0).collect(),
    }
}

/// `n` equally spaced azimuths, a rule exact for trigonometric polynomials of degree `< n`.
pub fn azimuth_rule(n: usize) -> Rule {
    Rule {
        nodes: (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect(),
        weights: vec![1.0 / n as f64; n],
    }
}
