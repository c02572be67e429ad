//! Laguerre polynomials and the Gauss and Gauss–Radau rules for the weight
//! `e^{-t}` on the positive half-line.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported rule size.
pub const MAX_NODES: usize = 200;

/// Which Laguerre points serve as collocation nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeFamily {
    /// Zeros of `L_N`.
    #[serde(alias = "zeros")]
    LaguerreZeros,
    /// Zeros of `L_{N+1}'`, equivalently of `L_N^{(1)}`.
    #[serde(alias = "extrema")]
    LaguerreExtrema,
}

impl NodeFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeFamily::LaguerreZeros => "zeros",
            NodeFamily::LaguerreExtrema => "extrema",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "zeros" => Some(NodeFamily::LaguerreZeros),
            "extrema" => Some(NodeFamily::LaguerreExtrema),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RuleKind {
    Gauss,
    GaussRadau,
}

/// Quadrature rule for `∫_0^∞ f(t) e^{-t} dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    /// Ascending nodes; a Radau rule starts with 0.
    pub nodes: Vec<f64>,
    /// Weights for `f`, i.e. against the factor `e^{-t}`.
    pub weights: Vec<f64>,
    /// `weights[j] * e^{nodes[j]}`, computed without forming either factor.
    pub scaled_weights: Vec<f64>,
    pub kind: RuleKind,
    pub exactness_degree: usize,
}

impl QuadratureRule {
    /// Applies the rule to `f`, treating the `e^{-t}` factor as implicit.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }
}

/// Generalized Laguerre `L_n^{(α)}(t)` and `L_{n-1}^{(α)}(t)`, each multiplied by `scale`.
fn laguerre_pair(n: usize, alpha: f64, t: f64, scale: f64) -> (f64, f64) {
    let mut prev = 0.0;
    let mut cur = scale;
    for k in 0..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - t) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Generalized Laguerre polynomial `L_n^{(α)}(t)` by the three-term recurrence.
pub fn gen_laguerre_eval(n: usize, alpha: f64, t: f64) -> f64 {
    laguerre_pair(n, alpha, t, 1.0).0
}

/// `e^{-t/2} L_n^{(α)}(t)`, which stays bounded where `L_n` alone would overflow.
pub fn scaled_gen_laguerre_eval(n: usize, alpha: f64, t: f64) -> f64 {
    laguerre_pair(n, alpha, t, (-0.5 * t).exp()).0
}

/// Standard Laguerre polynomial `L_n(t)`.
pub fn laguerre_eval(n: usize, t: f64) -> f64 {
    gen_laguerre_eval(n, 0.0, t)
}

/// `d/dt L_n(t) = -L_{n-1}^{(1)}(t)`.
pub fn laguerre_deriv_eval(n: usize, t: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    -gen_laguerre_eval(n - 1, 1.0, t)
}

/// Zeros of `L_n^{(α)}` by Newton iteration from asymptotic initial guesses.
pub fn gen_laguerre_zeros(n: usize, alpha: f64) -> Result<Vec<f64>> {
    let nf = n as f64;
    let mut z: Vec<f64> = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = match i {
            0 => (1.0 + alpha) * (3.0 + 0.92 * alpha) / (1.0 + 2.4 * nf + 1.8 * alpha),
            1 => z[0] + (15.0 + 6.25 * alpha) / (1.0 + 0.9 * alpha + 2.5 * nf),
            _ => {
                let ai = (i - 1) as f64;
                z[i - 1]
                    + ((1.0 + 2.55 * ai) / (1.9 * ai) + 1.26 * ai * alpha / (1.0 + 3.5 * ai))
                        * (z[i - 1] - z[i - 2])
                        / (1.0 + 0.3 * alpha)
            }
        };
        let mut converged = false;
        let mut last = f64::INFINITY;
        for _ in 0..100 {
            let (p, pm1) = laguerre_pair(n, alpha, x, 1.0);
            let dp = (nf * p - (nf + alpha) * pm1) / x;
            let dx = (p / dp).abs();
            x -= p / dp;
            // stop at tolerance, or once roundoff makes the steps stall
            if dx <= 1e-15 * x.abs() || (dx <= 1e-11 * x.abs() && dx >= 0.5 * last) {
                converged = true;
                break;
            }
            last = dx;
        }
        if !converged || !x.is_finite() || (i > 0 && x <= z[i - 1]) {
            return Err(Error::ConvergenceFailure { index: i, n });
        }
        z.push(x);
    }
    Ok(z)
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_NODES {
        return Err(Error::InvalidInput(format!(
            "rule size must lie in 1..={MAX_NODES}, got {n}"
        )));
    }
    Ok(())
}

/// N-point Gauss–Laguerre rule, exact for polynomials of degree `2N-1`.
pub fn gauss_laguerre_rule(n: usize) -> Result<QuadratureRule> {
    check_size(n)?;
    let nodes = gen_laguerre_zeros(n, 0.0)?;
    let nf = n as f64;
    // 1/(t L_n'(t)^2) with the derivative taken at the computed node, which
    // keeps the weight insensitive to the last bits of the node
    let scaled_weights: Vec<f64> = nodes
        .iter()
        .map(|&t| {
            let (l, lm1) = laguerre_pair(n, 0.0, t, (-0.5 * t).exp());
            let d = nf * (l - lm1);
            t / (d * d)
        })
        .collect();
    let weights = nodes
        .iter()
        .zip(&scaled_weights)
        .map(|(&t, &s)| s * (-t).exp())
        .collect();
    Ok(QuadratureRule {
        nodes,
        weights,
        scaled_weights,
        kind: RuleKind::Gauss,
        exactness_degree: 2 * n - 1,
    })
}

/// Gauss–Radau–Laguerre rule on `{0} ∪ zeros(L_N^{(1)})`, exact up to degree `2N`.
pub fn radau_laguerre_rule(n: usize) -> Result<QuadratureRule> {
    check_size(n)?;
    let interior = gen_laguerre_zeros(n, 1.0)?;
    let np1 = (n + 1) as f64;
    let mut nodes = Vec::with_capacity(n + 1);
    let mut scaled_weights = Vec::with_capacity(n + 1);
    nodes.push(0.0);
    scaled_weights.push(1.0 / np1);
    let nf = n as f64;
    for &t in &interior {
        // Gauss weight of x e^{-x} at t, divided by t
        let (l, lm1) = laguerre_pair(n, 1.0, t, (-0.5 * t).exp());
        let d = nf * l - np1 * lm1;
        nodes.push(t);
        scaled_weights.push(np1 / (d * d));
    }
    let weights = nodes
        .iter()
        .zip(&scaled_weights)
        .map(|(&t, &s)| s * (-t).exp())
        .collect();
    Ok(QuadratureRule {
        nodes,
        weights,
        scaled_weights,
        kind: RuleKind::GaussRadau,
        exactness_degree: 2 * n,
    })
}

/// Positive collocation points of `family`, ascending.
pub fn family_nodes(family: NodeFamily, n: usize) -> Result<Vec<f64>> {
    check_size(n)?;
    match family {
        NodeFamily::LaguerreZeros => gen_laguerre_zeros(n, 0.0),
        NodeFamily::LaguerreExtrema => gen_laguerre_zeros(n, 1.0),
    }
}

/// Quadrature rule that pairs with `family`: Gauss for zeros, Radau for extrema.
pub fn family_rule(family: NodeFamily, n: usize) -> Result<QuadratureRule> {
    match family {
        NodeFamily::LaguerreZeros => gauss_laguerre_rule(n),
        NodeFamily::LaguerreExtrema => radau_laguerre_rule(n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(k: usize) -> f64 {
        (1..=k).map(|i| i as f64).product()
    }

    #[test]
    fn low_degree_values() {
        assert_eq!(laguerre_eval(0, 7.3), 1.0);
        assert_eq!(laguerre_eval(1, 1.0), 0.0);
        assert!(laguerre_eval(2, 2.0 - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(laguerre_eval(17, 0.0), 1.0);
    }

    #[test]
    fn derivative_values() {
        assert_eq!(laguerre_deriv_eval(1, 0.0), -1.0);
        assert!(laguerre_deriv_eval(2, 2.0).abs() < 1e-15);
        assert!((laguerre_deriv_eval(3, 0.0) + 3.0).abs() < 1e-15);
        let h = 1e-6;
        let fd = (laguerre_eval(3, h) - laguerre_eval(3, -h)) / (2.0 * h);
        assert!((fd + 3.0).abs() < 1e-8);
    }

    #[test]
    fn two_point_gauss() {
        let r = gauss_laguerre_rule(2).unwrap();
        let s = 2f64.sqrt();
        assert!((r.nodes[0] - (2.0 - s)).abs() < 1e-14);
        assert!((r.nodes[1] - (2.0 + s)).abs() < 1e-14);
        assert!((r.weights[0] - (2.0 + s) / 4.0).abs() < 1e-14);
        assert!((r.weights[1] - (2.0 - s) / 4.0).abs() < 1e-14);
    }

    #[test]
    fn one_point_rules() {
        let g = gauss_laguerre_rule(1).unwrap();
        assert!((g.nodes[0] - 1.0).abs() < 1e-15 && (g.weights[0] - 1.0).abs() < 1e-15);
        let r = radau_laguerre_rule(1).unwrap();
        assert_eq!(r.nodes[0], 0.0);
        assert!((r.nodes[1] - 2.0).abs() < 1e-14);
        assert!((r.weights[0] - 0.5).abs() < 1e-15 && (r.weights[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn moments() {
        let g = gauss_laguerre_rule(20).unwrap();
        for k in 0..=30 {
            let m = g.integrate(|t| t.powi(k as i32));
            assert!((m / factorial(k) - 1.0).abs() < 1e-10, "gauss k={k}");
        }
        let r = radau_laguerre_rule(10).unwrap();
        for k in 0..=20 {
            let m = r.integrate(|t| t.powi(k as i32));
            assert!((m / factorial(k) - 1.0).abs() < 1e-9, "radau k={k}");
        }
    }

    #[test]
    fn largest_rules_build() {
        let g = gauss_laguerre_rule(MAX_NODES).unwrap();
        let r = radau_laguerre_rule(MAX_NODES).unwrap();
        assert!((g.scaled_weights.iter().zip(&g.nodes).map(|(s, t)| s * (-t).exp()).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(gauss_laguerre_rule(0).is_err());
        assert!(radau_laguerre_rule(MAX_NODES + 1).is_err());
    }
}
