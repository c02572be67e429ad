//! Scaled collocation meshes on the negative half-line, barycentric
//! interpolation and differentiation matrices.
//!
//! Barycentric weights of Laguerre-type meshes span hundreds of orders of
//! magnitude, so they are kept as `(ln|β|, sign β)` and every ratio is formed
//! in log space.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::laguerre::{family_nodes, family_rule, NodeFamily, QuadratureRule};

/// Nodes `θ_j = -t_j / (2 rho1)`, `j = 1..N`, ordered so that `θ_1` is closest to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledMesh {
    pub family: NodeFamily,
    pub n: usize,
    pub rho1: f64,
    /// Underlying positive Laguerre points, ascending.
    pub t: Vec<f64>,
    pub nodes: Vec<f64>,
}

impl ScaledMesh {
    /// The mesh with `θ_0 = 0` prepended.
    pub fn extended(&self) -> ExtendedMesh {
        let mut nodes = Vec::with_capacity(self.n + 1);
        nodes.push(0.0);
        nodes.extend_from_slice(&self.nodes);
        ExtendedMesh {
            base: self.clone(),
            nodes,
        }
    }
}

/// `Θ_N ∪ {0}` with index 0 holding `θ_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedMesh {
    pub base: ScaledMesh,
    pub nodes: Vec<f64>,
}

/// Barycentric weights in log form.
#[derive(Debug, Clone, PartialEq)]
pub struct BaryWeights {
    pub log_abs: Vec<f64>,
    pub sign: Vec<f64>,
}

impl BaryWeights {
    /// Weights rescaled so the largest has modulus 1.
    pub fn normalized(&self) -> Vec<f64> {
        let m = self.log_abs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        self.log_abs
            .iter()
            .zip(&self.sign)
            .map(|(&l, &s)| s * (l - m).exp())
            .collect()
    }
}

/// `D[j][k] = ℓ_k'(x_j)` on the mesh the matrix was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferentiationMatrix {
    pub entries: DMatrix<f64>,
    pub mesh: ExtendedMesh,
}

/// Quadrature for `∫_0^∞ f(s) ds` on the mapped nodes `s_j = t_j / (2 rho1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfLineQuadrature {
    pub rule: QuadratureRule,
    pub rho1: f64,
    pub mapped_nodes: Vec<f64>,
    pub mapped_weights: Vec<f64>,
    /// `ln mapped_weights`, for combining with large exponentials.
    pub log_mapped_weights: Vec<f64>,
}

impl HalfLineQuadrature {
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.mapped_nodes
            .iter()
            .zip(&self.mapped_weights)
            .map(|(&s, &w)| w * f(s))
            .sum()
    }
}

pub fn build_scaled_mesh(family: NodeFamily, n: usize, rho1: f64) -> Result<ScaledMesh> {
    if !(rho1 > 0.0 && rho1.is_finite()) {
        return Err(Error::InvalidInput(format!("rho1 must be positive, got {rho1}")));
    }
    let t = family_nodes(family, n)?;
    let nodes = t.iter().map(|&x| -x / (2.0 * rho1)).collect();
    Ok(ScaledMesh {
        family,
        n,
        rho1,
        t,
        nodes,
    })
}

pub fn half_line_quadrature(family: NodeFamily, n: usize, rho1: f64) -> Result<HalfLineQuadrature> {
    if !(rho1 > 0.0 && rho1.is_finite()) {
        return Err(Error::InvalidInput(format!("rho1 must be positive, got {rho1}")));
    }
    let rule = family_rule(family, n)?;
    let mapped_nodes = rule.nodes.iter().map(|&t| t / (2.0 * rho1)).collect();
    let mapped_weights: Vec<f64> = rule.scaled_weights.iter().map(|&w| w / (2.0 * rho1)).collect();
    let log_mapped_weights = mapped_weights.iter().map(|w| w.ln()).collect();
    Ok(HalfLineQuadrature {
        rule,
        rho1,
        mapped_nodes,
        mapped_weights,
        log_mapped_weights,
    })
}

fn check_distinct(x: &[f64]) -> Result<()> {
    for j in 0..x.len() {
        for k in 0..j {
            let scale = x[j].abs().max(x[k].abs()).max(f64::MIN_POSITIVE);
            if (x[j] - x[k]).abs() <= 1e-14 * scale {
                return Err(Error::DegenerateMesh(k, j));
            }
        }
    }
    Ok(())
}

/// Log-form barycentric weights `β_k = 1 / Π_{i≠k} (x_k - x_i)` of arbitrary distinct points.
pub fn bary_weights_points(x: &[f64]) -> Result<BaryWeights> {
    check_distinct(x)?;
    let n = x.len();
    let mut log_abs = vec![0.0; n];
    let mut sign = vec![1.0; n];
    for k in 0..n {
        for i in 0..n {
            if i != k {
                let d = x[k] - x[i];
                log_abs[k] -= d.abs().ln();
                if d < 0.0 {
                    sign[k] = -sign[k];
                }
            }
        }
    }
    Ok(BaryWeights { log_abs, sign })
}

pub fn barycentric_weights(mesh: &ExtendedMesh) -> Result<BaryWeights> {
    bary_weights_points(&mesh.nodes)
}

/// Differentiation matrix of arbitrary distinct points, conjugated by `e^{ρx}`:
/// `D[j][k] e^{ρ(x_j - x_k)}`. The diagonal is the negative row sum of the
/// unconjugated matrix, so `ρ = 0` yields the plain matrix.
pub fn weighted_diff_matrix_points(x: &[f64], rho: f64) -> Result<DMatrix<f64>> {
    let bw = bary_weights_points(x)?;
    let n = x.len();
    let mut d = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut diag = 0.0;
        for k in 0..n {
            if k == j {
                continue;
            }
            let dx = x[j] - x[k];
            let s = bw.sign[k] * bw.sign[j] / dx;
            // direct sum avoids cancellation among off-diagonals of very different size
            diag += 1.0 / dx;
            d[(j, k)] = if rho == 0.0 {
                s * (bw.log_abs[k] - bw.log_abs[j]).exp()
            } else {
                s * (bw.log_abs[k] - bw.log_abs[j] + rho * dx).exp()
            };
        }
        d[(j, j)] = diag;
    }
    Ok(d)
}

pub fn diff_matrix_points(x: &[f64]) -> Result<DMatrix<f64>> {
    weighted_diff_matrix_points(x, 0.0)
}

pub fn diff_matrix(mesh: &ExtendedMesh) -> Result<DifferentiationMatrix> {
    Ok(DifferentiationMatrix {
        entries: diff_matrix_points(&mesh.nodes)?,
        mesh: mesh.clone(),
    })
}

/// Lagrange basis values `ℓ_k(x) e^{shift_k}` at an arbitrary point, formed in log space.
pub fn lagrange_row_scaled(nodes: &[f64], bw: &BaryWeights, x: f64, shift: &[f64]) -> Vec<f64> {
    if let Some(k) = nodes.iter().position(|&v| v == x) {
        let mut row = vec![0.0; nodes.len()];
        row[k] = shift[k].exp();
        return row;
    }
    let mut log_node = 0.0;
    let mut sign_node = 1.0;
    for &v in nodes {
        let d = x - v;
        log_node += d.abs().ln();
        if d < 0.0 {
            sign_node = -sign_node;
        }
    }
    nodes
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let d = x - v;
            let sgn = sign_node * bw.sign[k] * d.signum();
            sgn * (log_node - d.abs().ln() + bw.log_abs[k] + shift[k]).exp()
        })
        .collect()
}

/// Barycentric evaluation of the interpolant through `(nodes[k], values[k])`.
pub fn interp_eval_points(nodes: &[f64], bw: &BaryWeights, values: &[Complex64], x: f64) -> Complex64 {
    if let Some(k) = nodes.iter().position(|&v| v == x) {
        return values[k];
    }
    let m = bw.log_abs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for k in 0..nodes.len() {
        let c = bw.sign[k] * (bw.log_abs[k] - m).exp() / (x - nodes[k]);
        num += values[k] * c;
        den += c;
    }
    num / den
}

pub fn interp_eval(mesh: &ExtendedMesh, values: &[Complex64], point: f64) -> Result<Complex64> {
    if values.len() != mesh.nodes.len() {
        return Err(Error::InvalidInput(format!(
            "expected {} values, got {}",
            mesh.nodes.len(),
            values.len()
        )));
    }
    let bw = barycentric_weights(mesh)?;
    Ok(interp_eval_points(&mesh.nodes, &bw, values, point))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn scaled_nodes() {
        let m = build_scaled_mesh(NodeFamily::LaguerreZeros, 1, 1.0).unwrap();
        assert!((m.nodes[0] + 0.5).abs() < 1e-15);
        let m = build_scaled_mesh(NodeFamily::LaguerreExtrema, 1, 1.0).unwrap();
        assert!((m.nodes[0] + 1.0).abs() < 1e-14);
        let m = build_scaled_mesh(NodeFamily::LaguerreZeros, 2, 0.5).unwrap();
        let s = 2f64.sqrt();
        assert!((m.nodes[0] + 2.0 - s).abs() < 1e-14 && (m.nodes[1] + 2.0 + s).abs() < 1e-14);
        assert!(build_scaled_mesh(NodeFamily::LaguerreZeros, 2, 0.0).is_err());
    }

    #[test]
    fn small_barycentric_weights() {
        let w = bary_weights_points(&[0.0, -1.0]).unwrap().normalized();
        assert!((w[0] / w[1] + 1.0).abs() < 1e-15);
        let w = bary_weights_points(&[0.0, -1.0, -2.0]).unwrap().normalized();
        assert!((w[0] / w[1] + 0.5).abs() < 1e-15 && (w[2] / w[1] + 0.5).abs() < 1e-15);
        assert!(matches!(bary_weights_points(&[0.0, -1.0, -1.0]), Err(Error::DegenerateMesh(1, 2))));
    }

    #[test]
    fn two_point_diff_matrix() {
        let d = diff_matrix_points(&[0.0, -1.0]).unwrap();
        assert_eq!(d, DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 1.0, -1.0]));
    }

    #[test]
    fn differentiates_quadratics() {
        let x = [0.0, -0.3, -1.1, -2.5];
        let d = diff_matrix_points(&x).unwrap();
        for j in 0..4 {
            let row: f64 = (0..4).map(|k| d[(j, k)] * x[k] * x[k]).sum();
            assert!((row - 2.0 * x[j]).abs() < 1e-12 * (1.0 + x[j].abs()));
            let s: f64 = (0..4).map(|k| d[(j, k)]).sum();
            assert!(s.abs() < 1e-14);
        }
    }

    #[test]
    fn interpolation() {
        let mesh = build_scaled_mesh(NodeFamily::LaguerreZeros, 20, 0.5).unwrap().extended();
        let vals: Vec<Complex64> = mesh.nodes.iter().map(|&t| c(t.exp())).collect();
        let v = interp_eval(&mesh, &vals, -1.0).unwrap();
        assert!((v.re - (-1f64).exp()).abs() < 1e-6);
        let lin: Vec<Complex64> = mesh.nodes.iter().map(|&t| c(t)).collect();
        assert!((interp_eval(&mesh, &lin, -0.3).unwrap().re + 0.3).abs() < 1e-12);
        assert_eq!(interp_eval(&mesh, &lin, mesh.nodes[4]).unwrap(), lin[4]);
        let cst = vec![c(2.5); 21];
        assert!((interp_eval(&mesh, &cst, -7.7).unwrap().re - 2.5).abs() < 1e-13);
    }

    #[test]
    fn mapped_quadrature() {
        for n in [1, 3, 10] {
            for fam in [NodeFamily::LaguerreZeros, NodeFamily::LaguerreExtrema] {
                let q = half_line_quadrature(fam, n, 1.0).unwrap();
                assert!((q.integrate(|s| (-2.0 * s).exp()) - 0.5).abs() < 1e-12);
                assert!((q.integrate(|s| s * (-2.0 * s).exp()) - 0.25).abs() < 1e-12);
            }
        }
        let q = half_line_quadrature(NodeFamily::LaguerreZeros, 20, 1.0).unwrap();
        assert!((q.integrate(|s| (-4.0 * s).exp()) - 0.25).abs() < 1e-10);
    }

    #[test]
    fn weighted_matrix_is_a_similarity() {
        let x = [0.0, -0.4, -1.3, -3.0];
        let d = diff_matrix_points(&x).unwrap();
        let dw = weighted_diff_matrix_points(&x, 0.7).unwrap();
        for j in 0..4 {
            for k in 0..4 {
                let e = d[(j, k)] * (0.7 * (x[j] - x[k])).exp();
                assert!((dw[(j, k)] - e).abs() < 1e-13 * (1.0 + e.abs()));
            }
        }
    }
}
