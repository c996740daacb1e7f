//! Gauss-Legendre rules and principal-value integration.

use std::sync::OnceLock;

use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 32;

/// Gauss-Legendre rule on the reference interval `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes in ascending order.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped affinely onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        self.nodes.iter().zip(&self.weights).map(move |(&y, &w)| (mid + half * y, half * w))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn build_rule(n: usize) -> QuadratureRule {
    if n == 1 {
        return QuadratureRule { nodes: vec![0.0], weights: vec![2.0] };
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess; roots are returned in descending order
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
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
    QuadratureRule { nodes, weights }
}

/// The `n`-point Gauss-Legendre rule, `1 <= n <= 32`. Rules are built once
/// and cached for the lifetime of the process.
pub fn gauss_legendre(n: usize) -> Result<&'static QuadratureRule> {
    static CACHE: [OnceLock<QuadratureRule>; MAX_ORDER + 1] = [const { OnceLock::new() }; MAX_ORDER + 1];
    if n == 0 || n > MAX_ORDER {
        return Err(Error::QuadratureOrder(n));
    }
    Ok(CACHE[n].get_or_init(|| build_rule(n)))
}

pub fn integrate_panel<F>(rule: &QuadratureRule, a: f64, b: f64, integrand: F) -> f64
where
    F: Fn(f64) -> f64,
{
    rule.mapped(a, b).map(|(x, w)| w * integrand(x)).sum()
}

/// Composite rule with `panels` equal panels on `[a, b]`.
pub fn integrate_composite<F>(rule: &QuadratureRule, a: f64, b: f64, panels: usize, integrand: F) -> f64
where
    F: Fn(f64) -> f64,
{
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let lo = a + k as f64 * h;
            integrate_panel(rule, lo, lo + h, &integrand)
        })
        .sum()
}

/// Principal value over `[-a, a]` of `h(x - y) K(y)` for an odd kernel `K`
/// with a simple pole at the origin.
///
/// `odd_pair_integrand(y)` must return `[h(x - y) - h(x + y)] K(y)` for
/// `y > 0`; this paired form extends continuously to `y = 0`, so the rule is
/// applied on `(0, a]` directly and never touches the pole.
pub fn pv_integrate_symmetric<F>(rule: &QuadratureRule, half_width: f64, odd_pair_integrand: F) -> f64
where
    F: Fn(f64) -> f64,
{
    integrate_panel(rule, 0.0, half_width, odd_pair_integrand)
}

/// Points and weights on `[0, 1]` refined geometrically toward both ends.
///
/// Each half is split at `2^-k / 2`, `k = 0..levels`, so every panel is as
/// wide as its distance to the nearest endpoint; the innermost panels are
/// `2^-(levels + 1)` wide. Used for integrands with logarithmic endpoint
/// singularities.
#[derive(Debug, Clone)]
pub struct GradedRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GradedRule {
    pub fn new(rule: &QuadratureRule, levels: usize) -> Self {
        let mut breaks = vec![0.0];
        for k in (0..=levels).rev() {
            breaks.push(0.5 * 0.5f64.powi(k as i32));
        }
        let half = breaks.len();
        for k in (0..half - 1).rev() {
            breaks.push(1.0 - breaks[k]);
        }
        let mut points = Vec::with_capacity(rule.order() * (breaks.len() - 1));
        let mut weights = Vec::with_capacity(points.capacity());
        for w in breaks.windows(2) {
            for (x, wt) in rule.mapped(w[0], w[1]) {
                points.push(x);
                weights.push(wt);
            }
        }
        Self { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
