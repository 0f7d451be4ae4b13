//! Fixed-order quadrature rules for the celestial sphere.
//!
//! Polar angles use Gauss–Legendre on `[0, π]`, the azimuthal angle the
//! trapezoidal rule on `[0, 2π)`, which is exact for trigonometric polynomials
//! of degree below the point count. Orders are fixed so that outputs are
//! reproducible bit for bit.

use std::f64::consts::PI;

pub const DEFAULT_POLAR_ORDER: usize = 64;
pub const DEFAULT_AZIMUTHAL_POINTS: usize = 128;
pub const ORDER_ENV_VAR: &str = "PFORM_QUAD_ORDER";

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss–Legendre order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, refined by Newton on P_n.
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
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// One-dimensional rules used by the separable sphere integrals.
#[derive(Clone, Debug)]
pub struct Quadrature {
    polar_nodes: Vec<f64>,
    polar_weights: Vec<f64>,
    azimuthal_points: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature::new(DEFAULT_POLAR_ORDER, DEFAULT_AZIMUTHAL_POINTS)
    }
}

impl Quadrature {
    pub fn new(polar_order: usize, azimuthal_points: usize) -> Self {
        let (x, w) = gauss_legendre(polar_order);
        let polar_nodes = x.iter().map(|&xi| 0.5 * PI * (xi + 1.0)).collect();
        let polar_weights = w.iter().map(|&wi| 0.5 * PI * wi).collect();
        Quadrature {
            polar_nodes,
            polar_weights,
            azimuthal_points,
        }
    }

    /// Polar order from `PFORM_QUAD_ORDER` when set, else the default. The
    /// azimuthal point count is never below twice the polar order.
    pub fn from_env() -> Self {
        let order = std::env::var(ORDER_ENV_VAR)
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
            .filter(|&n| n > 0)
            .unwrap_or(DEFAULT_POLAR_ORDER);
        Self::with_order(order)
    }

    pub fn with_order(order: usize) -> Self {
        Quadrature::new(order, DEFAULT_AZIMUTHAL_POINTS.max(2 * order))
    }

    pub fn polar_order(&self) -> usize {
        self.polar_nodes.len()
    }

    pub fn azimuthal_points(&self) -> usize {
        self.azimuthal_points
    }

    pub fn polar_rule(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.polar_nodes
            .iter()
            .copied()
            .zip(self.polar_weights.iter().copied())
    }

    pub fn azimuthal_rule(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.azimuthal_points;
        let h = 2.0 * PI / n as f64;
        (0..n).map(move |i| (i as f64 * h, h))
    }

    /// `∫₀^π sin^a θ cos^b θ dθ`.
    pub fn polar(&self, sin_exp: i32, cos_exp: i32) -> f64 {
        self.polar_rule()
            .map(|(t, w)| w * t.sin().powi(sin_exp) * t.cos().powi(cos_exp))
            .sum()
    }

    /// `∫₀^{2π} sin^a φ cos^b φ dφ`.
    pub fn azimuthal(&self, sin_exp: i32, cos_exp: i32) -> f64 {
        self.azimuthal_rule()
            .map(|(t, w)| w * t.sin().powi(sin_exp) * t.cos().powi(cos_exp))
            .sum()
    }

    /// Gauss–Legendre rule mapped to `[a, b]`.
    pub fn interval(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let (x, w) = gauss_legendre(self.polar_order().min(32));
        let half = 0.5 * (b - a);
        x.iter()
            .zip(&w)
            .map(|(&xi, &wi)| (a + half * (xi + 1.0), half * wi))
            .collect()
    }
}
