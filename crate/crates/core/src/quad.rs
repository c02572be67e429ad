//! Adaptive Gauss–Legendre integration for smooth complex integrands on
//! finite intervals and half-lines.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GlTable {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GlTable {
    pub fn new(n: usize) -> Self {
        let rule = GaussLegendre::new(NonZeroUsize::new(n.max(1)).unwrap());
        let (nodes, weights) = rule.as_node_weight_pairs().iter().cloned().unzip();
        GlTable { nodes, weights }
    }

    pub fn integrate<F: FnMut(f64) -> Complex64>(&self, a: f64, b: f64, mut f: F) -> Complex64 {
        let h = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(m + h * x) * *w;
        }
        acc * h
    }
}

fn tables() -> &'static (GlTable, GlTable) {
    static T: OnceLock<(GlTable, GlTable)> = OnceLock::new();
    T.get_or_init(|| (GlTable::new(10), GlTable::new(20)))
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
    pub converged: bool,
}

/// Adaptive bisection with a 10/20-point Gauss–Legendre error estimate.
pub fn integrate<F: FnMut(f64) -> Complex64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Integral {
    let (lo, hi) = tables();
    let mut stack = vec![(a, b, 0usize)];
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut converged = true;
    let total = hi.integrate(a, b, &mut f).norm();
    while let Some((l, r, depth)) = stack.pop() {
        let coarse = lo.integrate(l, r, &mut f);
        let fine = hi.integrate(l, r, &mut f);
        let err = (fine - coarse).norm();
        let width = (r - l) / (b - a);
        let tol = (abs_tol.max(rel_tol * total)) * width;
        if err <= tol || depth >= 48 {
            if err > tol {
                converged = false;
            }
            value += fine;
            error += err;
        } else {
            let m = 0.5 * (l + r);
            stack.push((m, r, depth + 1));
            stack.push((l, m, depth + 1));
        }
    }
    Integral {
        value,
        error,
        converged,
    }
}

/// `∫_a^∞ f(s) ds` through the map `s = a + u/(1-u)`.
pub fn integrate_to_infinity<F: FnMut(f64) -> Complex64>(mut f: F, a: f64, abs_tol: f64, rel_tol: f64) -> Integral {
    integrate(
        |u| {
            if u >= 1.0 {
                return Complex64::new(0.0, 0.0);
            }
            let v = 1.0 - u;
            let val = f(a + u / v);
            if val == Complex64::new(0.0, 0.0) {
                val
            } else {
                val / (v * v)
            }
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
    )
}

/// Vector-valued `∫_a^∞ f(s) ds` with a shared adaptive panel set; every
/// component must meet its own tolerance.
pub fn integrate_vec<F: FnMut(f64, &mut [f64])>(mut f: F, dim: usize, a: f64, abs_tol: f64, rel_tol: f64) -> Vec<f64> {
    let (lo, hi) = tables();
    let mut buf = vec![0.0; dim];
    let panel = |l: f64, r: f64, t: &GlTable, f: &mut F, buf: &mut Vec<f64>| -> Vec<f64> {
        let h = 0.5 * (r - l);
        let m = 0.5 * (l + r);
        let mut acc = vec![0.0; dim];
        for (x, w) in t.nodes.iter().zip(&t.weights) {
            let u = m + h * x;
            let v = 1.0 - u;
            f(a + u / v, buf);
            let jac = w * h / (v * v);
            for k in 0..dim {
                if buf[k] != 0.0 {
                    acc[k] += buf[k] * jac;
                }
            }
        }
        acc
    };
    let total = panel(0.0, 1.0, hi, &mut f, &mut buf);
    let mut value = vec![0.0; dim];
    let mut stack = vec![(0.0, 1.0, 0usize)];
    while let Some((l, r, depth)) = stack.pop() {
        let coarse = panel(l, r, lo, &mut f, &mut buf);
        let fine = panel(l, r, hi, &mut f, &mut buf);
        let width = r - l;
        let ok = (0..dim).all(|k| (fine[k] - coarse[k]).abs() <= abs_tol.max(rel_tol * total[k].abs()) * width);
        if ok || depth >= 40 {
            for k in 0..dim {
                value[k] += fine[k];
            }
        } else {
            let m = 0.5 * (l + r);
            stack.push((m, r, depth + 1));
            stack.push((l, m, depth + 1));
        }
    }
    value
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_interval() {
        let r = integrate(|x| Complex64::new(x.sin(), x.cos()), 0.0, 3.0, 1e-14, 1e-13);
        assert!((r.value.re - (1.0 - 3f64.cos())).abs() < 1e-13);
        assert!((r.value.im - 3f64.sin()).abs() < 1e-13);
    }

    #[test]
    fn half_line() {
        let r = integrate_to_infinity(|s| Complex64::new((-2.0 * s).exp(), 0.0), 0.0, 1e-14, 1e-13);
        assert!((r.value.re - 0.5).abs() < 1e-13);
        // Γ(π) through s^{π-1} e^{-s}
        let r = integrate_to_infinity(|s| Complex64::new(s.powf(std::f64::consts::PI - 1.0) * (-s).exp(), 0.0), 0.0, 1e-14, 1e-13);
        assert!((r.value.re - statrs::function::gamma::gamma(std::f64::consts::PI)).abs() < 1e-12);
    }
}
