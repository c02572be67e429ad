//! Pseudospectral operators for linear and nonlinear delay and renewal
//! equations with unbounded delay.
//!
//! States are stored weighted: entry `j` holds `X_j = e^{ρθ_j} ψ(θ_j)` and the
//! prolongation is `e^{ρθ}` times the polynomial through the unweighted
//! samples. Every factor `e^{ρ s}` that undoes the weight is combined with the
//! quadrature weight and the kernel value in log space before exponentiation.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::laguerre::NodeFamily;
use crate::mesh::{bary_weights_points, lagrange_row_scaled, weighted_diff_matrix_points, HalfLineQuadrature, ScaledMesh};
use crate::quad;

/// How the distributed term is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadMode {
    /// The Gauss or Gauss–Radau rule attached to the collocation nodes.
    Gauss,
    /// Adaptive integration of the kernel against the Lagrange basis.
    Adaptive,
}

impl QuadMode {
    pub fn as_str(self) -> &'static str {
        match self {
            QuadMode::Gauss => "gauss",
            QuadMode::Adaptive => "adaptive",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "gauss" => Some(QuadMode::Gauss),
            "adaptive" => Some(QuadMode::Adaptive),
            _ => None,
        }
    }
}

/// `y'(t) = a y(t) + ∫_0^∞ k(s) y(t-s) ds`.
#[derive(Debug, Clone)]
pub struct LinearDdeProblem {
    pub a: f64,
    pub kernel: KernelSpec,
    pub rho: f64,
}

/// `y(t) = ∫_0^∞ k(s) y(t-s) ds`.
#[derive(Debug, Clone)]
pub struct LinearReProblem {
    pub kernel: KernelSpec,
    pub rho: f64,
}

#[derive(Debug, Clone)]
pub enum LinearProblem {
    Dde(LinearDdeProblem),
    Re(LinearReProblem),
}

impl LinearProblem {
    pub fn kernel(&self) -> &KernelSpec {
        match self {
            LinearProblem::Dde(p) => &p.kernel,
            LinearProblem::Re(p) => &p.kernel,
        }
    }

    pub fn rho(&self) -> f64 {
        match self {
            LinearProblem::Dde(p) => p.rho,
            LinearProblem::Re(p) => p.rho,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemTag {
    Dde,
    Re,
}

/// Matrix of `A_{0,N} + L_N` with the data it was built from.
///
/// DDE layout: index 0 is the head value, indices `1..=N` the weighted
/// history samples. RE layout: the `N` weighted samples of the integrated
/// state, whose value at `θ_0 = 0` is identically zero.
#[derive(Debug, Clone)]
pub struct DiscretizedLinearOperator {
    pub matrix: DMatrix<f64>,
    pub mesh: ScaledMesh,
    pub quad: HalfLineQuadrature,
    pub rho: f64,
    pub tag: ProblemTag,
    pub mode: QuadMode,
}

/// Maps each quadrature node to its index on the extended mesh.
pub fn quad_to_mesh(mesh: &ScaledMesh, quad: &HalfLineQuadrature) -> Result<Vec<usize>> {
    if quad.rule.nodes.len() != mesh.n + usize::from(mesh.family == NodeFamily::LaguerreExtrema)
        || (quad.rho1 - mesh.rho1).abs() > 1e-12 * mesh.rho1
    {
        return Err(Error::MeshQuadMismatch);
    }
    let offset = match mesh.family {
        NodeFamily::LaguerreZeros => 1,
        NodeFamily::LaguerreExtrema => 0,
    };
    let ext = ext_nodes(mesh);
    let mut map = Vec::with_capacity(quad.mapped_nodes.len());
    for (i, &s) in quad.mapped_nodes.iter().enumerate() {
        let k = i + offset;
        if (ext[k] + s).abs() > 1e-12 * (1.0 + s.abs()) {
            return Err(Error::MeshQuadMismatch);
        }
        map.push(k);
    }
    Ok(map)
}

pub(crate) fn ext_nodes(mesh: &ScaledMesh) -> Vec<f64> {
    let mut x = Vec::with_capacity(mesh.n + 1);
    x.push(0.0);
    x.extend_from_slice(&mesh.nodes);
    x
}

fn check_rho(mesh: &ScaledMesh, rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter(format!("rho must be positive, got {rho}")));
    }
    if rho < mesh.rho1 * (1.0 - 1e-12) {
        return Err(Error::InvalidParameter(format!("rho = {rho} is below rho1 = {}", mesh.rho1)));
    }
    Ok(())
}

/// Coefficients `h_k` with `∫_0^∞ k(s) f(-s) ds ≈ Σ_k h_k X_k`, where `f` is
/// the polynomial through the unweighted samples (`derivative = false`) or
/// its derivative (`derivative = true`), and `X_k = e^{ρθ_k} f_k`.
pub fn functional_row(
    kernel: &KernelSpec,
    mesh: &ScaledMesh,
    quad: &HalfLineQuadrature,
    rho: f64,
    mode: QuadMode,
    derivative: bool,
) -> Result<Vec<f64>> {
    let x = ext_nodes(mesh);
    let n1 = x.len();
    let bw = bary_weights_points(&x)?;
    let mut h = vec![0.0; n1];
    if kernel.is_zero() {
        return Ok(h);
    }
    match mode {
        QuadMode::Gauss => {
            let map = quad_to_mesh(mesh, quad)?;
            let plain = if derivative {
                Some(weighted_diff_matrix_points(&x, 0.0)?)
            } else {
                None
            };
            for (i, &mi) in map.iter().enumerate() {
                let s = quad.mapped_nodes[i];
                let (lk, sk) = kernel.log_abs(s);
                if lk == f64::NEG_INFINITY {
                    continue;
                }
                if lk.is_infinite() {
                    return Err(Error::IntegrableSingularity);
                }
                let base = quad.log_mapped_weights[i] + lk;
                match &plain {
                    None => h[mi] += sk * (base + rho * s).exp(),
                    Some(d) => {
                        for k in 0..n1 {
                            let sx = -x[k];
                            if k == mi {
                                h[k] += sk * d[(k, k)] * (base + rho * sx).exp();
                            } else {
                                let dx = x[mi] - x[k];
                                let sg = sk * bw.sign[k] * bw.sign[mi] * dx.signum();
                                h[k] += sg * (base + bw.log_abs[k] - bw.log_abs[mi] - dx.abs().ln() + rho * sx).exp();
                            }
                        }
                    }
                }
            }
        }
        QuadMode::Adaptive => {
            let shift: Vec<f64> = x.iter().map(|&t| -rho * t).collect();
            let start = match kernel {
                KernelSpec::Shifted { shift, .. } => *shift,
                _ => 0.0,
            };
            let mut row = vec![0.0; n1];
            let r = quad::integrate_vec(
                |s, out: &mut [f64]| {
                    let (lk, sk) = kernel.log_abs(s);
                    if !(lk > f64::NEG_INFINITY) || lk.is_infinite() {
                        out.iter_mut().for_each(|v| *v = 0.0);
                        return;
                    }
                    let xs = -s;
                    let l = lagrange_row_scaled(&x, &bw, xs, &shift);
                    if derivative {
                        let sum: f64 = x.iter().map(|&t| 1.0 / (xs - t)).sum();
                        for k in 0..n1 {
                            row[k] = l[k] * (sum - 1.0 / (xs - x[k]));
                        }
                    } else {
                        row.copy_from_slice(&l);
                    }
                    let kv = sk * lk.exp();
                    for k in 0..n1 {
                        out[k] = kv * row[k];
                    }
                },
                n1,
                start,
                1e-15,
                1e-12,
            );
            h = r;
        }
    }
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteRhs);
    }
    Ok(h)
}

pub fn assemble_dde_linear(
    p: &LinearDdeProblem,
    mesh: &ScaledMesh,
    quad: &HalfLineQuadrature,
    mode: QuadMode,
) -> Result<DiscretizedLinearOperator> {
    check_rho(mesh, p.rho)?;
    p.kernel.validate()?;
    quad_to_mesh(mesh, quad)?;
    let x = ext_nodes(mesh);
    let n1 = x.len();
    let dw = weighted_diff_matrix_points(&x, p.rho)?;
    let h = functional_row(&p.kernel, mesh, quad, p.rho, mode, false)?;
    let mut m = DMatrix::zeros(n1, n1);
    for k in 0..n1 {
        m[(0, k)] = h[k];
    }
    m[(0, 0)] += p.a;
    for j in 1..n1 {
        for k in 0..n1 {
            m[(j, k)] = dw[(j, k)];
        }
    }
    Ok(DiscretizedLinearOperator {
        matrix: m,
        mesh: mesh.clone(),
        quad: quad.clone(),
        rho: p.rho,
        tag: ProblemTag::Dde,
        mode,
    })
}

pub fn assemble_re_linear(
    p: &LinearReProblem,
    mesh: &ScaledMesh,
    quad: &HalfLineQuadrature,
    mode: QuadMode,
) -> Result<DiscretizedLinearOperator> {
    check_rho(mesh, p.rho)?;
    p.kernel.validate()?;
    quad_to_mesh(mesh, quad)?;
    let x = ext_nodes(mesh);
    let n = mesh.n;
    let dw = weighted_diff_matrix_points(&x, p.rho)?;
    let h = functional_row(&p.kernel, mesh, quad, p.rho, mode, true)?;
    let mut m = DMatrix::zeros(n, n);
    for j in 1..=n {
        let wj = (p.rho * x[j]).exp();
        for k in 1..=n {
            m[(j - 1, k - 1)] = dw[(j, k)] - wj * h[k];
        }
    }
    Ok(DiscretizedLinearOperator {
        matrix: m,
        mesh: mesh.clone(),
        quad: quad.clone(),
        rho: p.rho,
        tag: ProblemTag::Re,
        mode,
    })
}

pub fn assemble_linear(
    p: &LinearProblem,
    mesh: &ScaledMesh,
    quad: &HalfLineQuadrature,
    mode: QuadMode,
) -> Result<DiscretizedLinearOperator> {
    match p {
        LinearProblem::Dde(d) => assemble_dde_linear(d, mesh, quad, mode),
        LinearProblem::Re(r) => assemble_re_linear(r, mesh, quad, mode),
    }
}

/// Autonomous ODE `dU/dt = G(U)` produced by a discretization.
pub trait DiscretizedOde: Send + Sync {
    fn dim(&self) -> usize;
    fn rhs(&self, u: &[f64]) -> Result<Vec<f64>>;
    /// Typical magnitude of each component, used to scale difference steps.
    fn scales(&self) -> Vec<f64> {
        vec![1.0; self.dim()]
    }
    /// Jacobian at `u`; by default a full central-difference approximation.
    fn jacobian(&self, u: &[f64]) -> Result<DMatrix<f64>> {
        fd_jacobian(self, u, FD_STEP)
    }
}

/// Relative step of the central-difference Jacobians.
pub const FD_STEP: f64 = 1e-6;

/// Fourth-order central difference of a scalar function.
fn scalar_derivative(f: &(dyn Fn(f64) -> f64 + Send + Sync), x: f64) -> f64 {
    let h = 1e-3 * x.abs().max(1.0);
    (8.0 * (f(x + h) - f(x - h)) - (f(x + 2.0 * h) - f(x - 2.0 * h))) / (12.0 * h)
}

/// `dU/dt = M U`.
#[derive(Debug, Clone)]
pub struct LinearOde {
    pub matrix: DMatrix<f64>,
}

impl DiscretizedOde for LinearOde {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn rhs(&self, u: &[f64]) -> Result<Vec<f64>> {
        let v = &self.matrix * nalgebra::DVector::from_column_slice(u);
        Ok(v.iter().cloned().collect())
    }
}

/// Central-difference Jacobian with per-component steps `h_k = step * scale_k`.
pub fn fd_jacobian<O: DiscretizedOde + ?Sized>(ode: &O, u: &[f64], step: f64) -> Result<DMatrix<f64>> {
    let n = ode.dim();
    let scales = ode.scales();
    let mut jac = DMatrix::zeros(n, n);
    let mut up = u.to_vec();
    for k in 0..n {
        let h = step * scales[k].max(u[k].abs()).max(f64::MIN_POSITIVE);
        up[k] = u[k] + h;
        let fp = ode.rhs(&up)?;
        up[k] = u[k] - h;
        let fm = ode.rhs(&up)?;
        up[k] = u[k];
        for j in 0..n {
            jac[(j, k)] = (fp[j] - fm[j]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Generic nonlinear DDE `y' = f(y(t)) + ∫_0^∞ k(s) g(y(t-s)) ds`.
pub struct NonlinearDde {
    pub head: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub g: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub mesh: ScaledMesh,
    pub rho: f64,
    /// `mapped_weight * k(s) * e^{ρ s}` per extended-mesh index.
    coeff: Vec<f64>,
    /// `e^{ρ s}` per extended-mesh index, for unweighting samples.
    unweight: Vec<f64>,
    dw: DMatrix<f64>,
    scale: Vec<f64>,
}

impl NonlinearDde {
    pub fn new(
        head: Box<dyn Fn(f64) -> f64 + Send + Sync>,
        kernel: &KernelSpec,
        g: Box<dyn Fn(f64) -> f64 + Send + Sync>,
        mesh: &ScaledMesh,
        quad: &HalfLineQuadrature,
        rho: f64,
    ) -> Result<Self> {
        check_rho(mesh, rho)?;
        let x = ext_nodes(mesh);
        let coeff = functional_row(kernel, mesh, quad, rho, QuadMode::Gauss, false)?;
        let unweight = x.iter().map(|&t| (-rho * t).exp()).collect();
        let dw = weighted_diff_matrix_points(&x, rho)?;
        let scale = x.iter().map(|&t| (rho * t).exp()).collect();
        Ok(NonlinearDde {
            head,
            g,
            mesh: mesh.clone(),
            rho,
            coeff,
            unweight,
            dw,
            scale,
        })
    }

    /// Weighted samples of the constant history `ȳ`.
    pub fn constant_state(&self, y: f64) -> Vec<f64> {
        self.scale.iter().map(|w| w * y).collect()
    }
}

impl DiscretizedOde for NonlinearDde {
    fn dim(&self) -> usize {
        self.mesh.n + 1
    }

    fn rhs(&self, u: &[f64]) -> Result<Vec<f64>> {
        let n1 = self.dim();
        let mut out = vec![0.0; n1];
        let mut acc = (self.head)(u[0]);
        for k in 0..n1 {
            if self.coeff[k] != 0.0 {
                // coeff carries e^{ρs}; pass g the unweighted sample
                let psi = u[k] * self.unweight[k];
                let gv = (self.g)(psi);
                acc += self.coeff[k] * gv / self.unweight[k];
            }
        }
        out[0] = acc;
        for j in 1..n1 {
            let mut s = 0.0;
            for k in 0..n1 {
                s += self.dw[(j, k)] * u[k];
            }
            out[j] = s;
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteRhs);
        }
        Ok(out)
    }

    fn scales(&self) -> Vec<f64> {
        self.scale.clone()
    }

    /// Exact linear rows; the scalar nonlinearities are differentiated by a
    /// high-order difference, which keeps the noise far below that of a
    /// full finite-difference Jacobian.
    fn jacobian(&self, u: &[f64]) -> Result<DMatrix<f64>> {
        let n1 = self.dim();
        let mut jac = self.dw.clone();
        for k in 0..n1 {
            jac[(0, k)] = 0.0;
        }
        jac[(0, 0)] = scalar_derivative(&*self.head, u[0]);
        for k in 0..n1 {
            if self.coeff[k] != 0.0 {
                jac[(0, k)] += self.coeff[k] * scalar_derivative(&*self.g, u[k] * self.unweight[k]);
            }
        }
        if jac.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteRhs);
        }
        Ok(jac)
    }
}

/// Nonlinear RE `y(t) = F(Λ y_t)` in integrated form, where `Λ` is a linear
/// functional of the history already expressed through the weighted samples
/// of the integrated state `Φ(θ) = ∫_0^θ y(t+σ) dσ`.
pub struct NonlinearRe {
    pub f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub mesh: ScaledMesh,
    pub rho: f64,
    /// Coefficients of `Λ` on `u_1..u_N`.
    pub functional: Vec<f64>,
    dw: DMatrix<f64>,
    weight: Vec<f64>,
}

impl NonlinearRe {
    /// `functional` acts on the weighted samples `u_k = e^{ρθ_k} Φ(θ_k)`.
    pub fn new(
        f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
        functional: Vec<f64>,
        mesh: &ScaledMesh,
        rho: f64,
    ) -> Result<Self> {
        check_rho(mesh, rho)?;
        if functional.len() != mesh.n {
            return Err(Error::InvalidInput(format!(
                "functional has {} entries for {} nodes",
                functional.len(),
                mesh.n
            )));
        }
        let x = ext_nodes(mesh);
        let dw = weighted_diff_matrix_points(&x, rho)?;
        let weight = x.iter().map(|&t| (rho * t).exp()).collect();
        Ok(NonlinearRe {
            f,
            mesh: mesh.clone(),
            rho,
            functional,
            dw,
            weight,
        })
    }

    /// Linear RE `y = ∫ k(s) y(t-s) ds` written in the same form, so that its
    /// Jacobian can be compared with [`assemble_re_linear`].
    pub fn linear(kernel: &KernelSpec, mesh: &ScaledMesh, quad: &HalfLineQuadrature, rho: f64, mode: QuadMode) -> Result<Self> {
        let h = functional_row(kernel, mesh, quad, rho, mode, true)?;
        NonlinearRe::new(Box::new(|v| v), h[1..].to_vec(), mesh, rho)
    }

    /// Functional `Φ ↦ Σ_i c_i Φ(x_i)` on the weighted samples, with each term
    /// given as `(x_i, ln|c_i|, sign c_i)` so that tiny coefficients can meet
    /// large unweighting factors in log space.
    pub fn point_functional(mesh: &ScaledMesh, rho: f64, terms: &[(f64, f64, f64)]) -> Result<Vec<f64>> {
        let x = ext_nodes(mesh);
        let bw = bary_weights_points(&x)?;
        let mut r = vec![0.0; mesh.n];
        for &(at, log_c, sign) in terms {
            let shift: Vec<f64> = x.iter().map(|&t| log_c - rho * t).collect();
            let row = lagrange_row_scaled(&x, &bw, at, &shift);
            for k in 1..x.len() {
                r[k - 1] += sign * row[k];
            }
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteRhs);
        }
        Ok(r)
    }

    /// Weighted samples of the integrated constant history `ȳ`, i.e. of `θ ȳ`.
    pub fn constant_state(&self, y: f64) -> Vec<f64> {
        self.mesh.nodes.iter().zip(&self.weight[1..]).map(|(t, w)| w * t * y).collect()
    }
}

impl DiscretizedOde for NonlinearRe {
    fn dim(&self) -> usize {
        self.mesh.n
    }

    fn rhs(&self, u: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        let lam: f64 = self.functional.iter().zip(u).map(|(c, v)| c * v).sum();
        let fv = (self.f)(lam);
        let mut out = vec![0.0; n];
        for j in 1..=n {
            let mut s = 0.0;
            for k in 1..=n {
                s += self.dw[(j, k)] * u[k - 1];
            }
            out[j - 1] = s - self.weight[j] * fv;
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteRhs);
        }
        Ok(out)
    }

    fn scales(&self) -> Vec<f64> {
        self.mesh.nodes.iter().zip(&self.weight[1..]).map(|(t, w)| w * t.abs().max(1.0)).collect()
    }

    fn jacobian(&self, u: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let lam: f64 = self.functional.iter().zip(u).map(|(c, v)| c * v).sum();
        let df = scalar_derivative(&*self.f, lam);
        let mut jac = DMatrix::zeros(n, n);
        for j in 1..=n {
            for k in 1..=n {
                jac[(j - 1, k - 1)] = self.dw[(j, k)] - self.weight[j] * df * self.functional[k - 1];
            }
        }
        if jac.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteRhs);
        }
        Ok(jac)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eig_dense;
    use crate::mesh::{build_scaled_mesh, half_line_quadrature};

    fn setup(fam: NodeFamily, n: usize, rho1: f64) -> (ScaledMesh, HalfLineQuadrature) {
        (build_scaled_mesh(fam, n, rho1).unwrap(), half_line_quadrature(fam, n, rho1).unwrap())
    }

    #[test]
    fn one_node_exponential_has_zero_root() {
        let (m, q) = setup(NodeFamily::LaguerreZeros, 1, 1.0);
        let p = LinearDdeProblem { a: 3.0, kernel: KernelSpec::Exponential { k0: -6.0, mu: 2.0 }, rho: 1.0 };
        let op = assemble_dde_linear(&p, &m, &q, QuadMode::Gauss).unwrap();
        let s = eig_dense(&op.matrix, false).unwrap();
        assert!(s.eigenvalues.iter().any(|z| z.norm() < 1e-12));
    }

    #[test]
    fn zero_kernel_head_row() {
        let (m, q) = setup(NodeFamily::LaguerreExtrema, 6, 0.5);
        let p = LinearDdeProblem { a: -0.7, kernel: KernelSpec::Zero, rho: 0.8 };
        let op = assemble_dde_linear(&p, &m, &q, QuadMode::Gauss).unwrap();
        assert_eq!(op.matrix[(0, 0)], -0.7);
        assert!((1..7).all(|k| op.matrix[(0, k)] == 0.0));
    }

    #[test]
    fn mismatch_detected() {
        let m = build_scaled_mesh(NodeFamily::LaguerreZeros, 5, 1.0).unwrap();
        let q = half_line_quadrature(NodeFamily::LaguerreZeros, 5, 0.5).unwrap();
        let p = LinearDdeProblem { a: 0.0, kernel: KernelSpec::Zero, rho: 1.0 };
        assert!(matches!(assemble_dde_linear(&p, &m, &q, QuadMode::Gauss), Err(Error::MeshQuadMismatch)));
    }

    #[test]
    fn gauss_and_adaptive_agree_on_exact_kernel() {
        for fam in [NodeFamily::LaguerreZeros, NodeFamily::LaguerreExtrema] {
            let (m, q) = setup(fam, 8, 1.0);
            let k = KernelSpec::Exponential { k0: -6.0, mu: 2.0 };
            let a = functional_row(&k, &m, &q, 1.0, QuadMode::Gauss, false).unwrap();
            let b = functional_row(&k, &m, &q, 1.0, QuadMode::Adaptive, false).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()), "{fam:?} {x} {y}");
            }
        }
    }

    #[test]
    fn re_unit_mass_kernel_has_zero_root() {
        for fam in [NodeFamily::LaguerreZeros, NodeFamily::LaguerreExtrema] {
            let (m, q) = setup(fam, 10, 1.0);
            let p = LinearReProblem { kernel: KernelSpec::Exponential { k0: 2.0, mu: 2.0 }, rho: 2.0 };
            let op = assemble_re_linear(&p, &m, &q, QuadMode::Gauss).unwrap();
            let s = eig_dense(&op.matrix, false).unwrap();
            let best = s.eigenvalues.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-10, "{fam:?} {best}");
        }
    }
}
