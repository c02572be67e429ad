//! Characteristic roots: exact values for the linear test problems, the
//! discrete characteristic function, root matching and convergence studies.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::laguerre::NodeFamily;
use crate::linalg::{eig_dense, solve_complex, Spectrum};
use crate::mesh::{build_scaled_mesh, half_line_quadrature, weighted_diff_matrix_points, HalfLineQuadrature, ScaledMesh};
use crate::psd::{assemble_linear, ext_nodes, functional_row, LinearDdeProblem, LinearProblem, LinearReProblem, QuadMode};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Closed-form roots of `λ = a + k0/(λ+μ)`, with a flag for the double root.
pub fn exact_roots_exponential(a: f64, mu: f64, k0: f64) -> (Complex64, Complex64, bool) {
    let disc = (mu + a) * (mu + a) + 4.0 * k0;
    let sq = c(disc).sqrt();
    let base = c(a - mu);
    let r1 = (base + sq) / 2.0;
    let r2 = (base - sq) / 2.0;
    (r1, r2, disc.abs() <= 1e-12 * (1.0 + (mu + a) * (mu + a)))
}

/// Newton's method on the characteristic function of a linear problem.
pub fn char_root_solve(problem: &LinearProblem, guess: Complex64) -> Result<Complex64> {
    let k = problem.kernel();
    let g = |l: Complex64| -> Result<(Complex64, Complex64)> {
        let kh = k.laplace(l).map_err(|_| Error::StrayedOutOfStrip)?;
        let dk = k.laplace_deriv(l).map_err(|_| Error::StrayedOutOfStrip)?;
        Ok(match problem {
            LinearProblem::Dde(p) => (l - p.a - kh, c(1.0) - dk),
            LinearProblem::Re(_) => (c(1.0) - kh, -dk),
        })
    };
    let mut l = guess;
    k.laplace(l)?;
    for _ in 0..100 {
        let (f, df) = g(l)?;
        if f.norm() <= 1e-14 {
            return Ok(l);
        }
        let step = f / df;
        l -= step;
        if !(l.re.is_finite() && l.im.is_finite()) {
            return Err(Error::NoConvergence("characteristic root".into()));
        }
        if step.norm() <= 1e-15 * (1.0 + l.norm()) {
            let (f, _) = g(l)?;
            if f.norm() <= 1e-12 {
                return Ok(l);
            }
        }
    }
    let (f, _) = g(l)?;
    if f.norm() <= 1e-12 {
        return Ok(l);
    }
    Err(Error::NoConvergence("characteristic root".into()))
}

/// Value of the discrete characteristic function with a magnitude reference
/// for judging how close to zero it is.
#[derive(Debug, Clone, Copy)]
pub struct CharValue {
    pub value: Complex64,
    pub scale: f64,
}

/// Discrete characteristic function: the collocation problem for `(β; γ)` is
/// solved by LU in variables weighted by `e^{ρ1 θ}` and the discretized
/// functional is applied to its solution. DDE: `λ - a - L̃(p_λ)` with
/// `p_λ' = λ p_λ` on the mesh and `p_λ(0) = 1`. RE: `1 - L̃(p')` with
/// `p' = λ p + 1` on the mesh and `p(0) = 0`.
pub fn discrete_char_fn(
    problem: &LinearProblem,
    mesh: &ScaledMesh,
    quad: &HalfLineQuadrature,
    mode: QuadMode,
    lambda: Complex64,
) -> Result<CharValue> {
    let x = ext_nodes(mesh);
    let n = mesh.n;
    let rho1 = mesh.rho1;
    let dw = weighted_diff_matrix_points(&x, rho1)?;
    let mut a = DMatrix::<Complex64>::zeros(n, n);
    for j in 1..=n {
        for k in 1..=n {
            a[(j - 1, k - 1)] = c(dw[(j, k)]);
        }
        a[(j - 1, j - 1)] -= lambda;
    }
    let (rhs, head, derivative) = match problem {
        LinearProblem::Dde(_) => (DVector::from_fn(n, |j, _| c(-dw[(j + 1, 0)])), c(1.0), false),
        LinearProblem::Re(_) => (DVector::from_fn(n, |j, _| c((rho1 * x[j + 1]).exp())), c(0.0), true),
    };
    let y = solve_complex(a, &rhs).map_err(|_| Error::SingularCollocation)?;
    let h = functional_row(problem.kernel(), mesh, quad, rho1, mode, derivative)?;
    let mut ell = h[0] * head;
    let mut scale = (h[0] * head).norm();
    for k in 1..=n {
        let t = y[k - 1] * h[k];
        ell += t;
        scale += t.norm();
    }
    Ok(match problem {
        LinearProblem::Dde(p) => CharValue {
            value: lambda - p.a - ell,
            scale: 1.0 + lambda.norm() + p.a.abs() + scale,
        },
        LinearProblem::Re(_) => CharValue {
            value: c(1.0) - ell,
            scale: 1.0 + scale,
        },
    })
}

/// `C(λ) = λ/(λ + 2ρ1)`, the rate `D_N` and the norm constant `K^p_ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoreticalBound {
    pub c_of_lambda: Complex64,
    pub d_n: f64,
    pub k_p_eps: f64,
}

/// Exponent of the norm in which errors are measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PNorm {
    Inf,
    Finite(f64),
}

pub fn theoretical_bound(lambda: Complex64, rho1: f64, n: usize, family: NodeFamily, p: PNorm, eps: f64) -> Result<TheoreticalBound> {
    if lambda.re <= -rho1 {
        return Err(Error::OutOfHalfPlane);
    }
    let cl = lambda / (lambda + 2.0 * rho1);
    let cn = cl.powu(n as u32);
    let d_n = match family {
        NodeFamily::LaguerreZeros => cn.norm(),
        NodeFamily::LaguerreExtrema => (cn / (c(1.0) - cn * cl)).norm(),
    };
    let k_p_eps = match p {
        PNorm::Inf => 1.0,
        PNorm::Finite(pp) => {
            if !(eps > 0.0) {
                return Err(Error::InvalidDelta);
            }
            (pp * eps / (2.0 * rho1)).powf(-1.0 / pp)
        }
    };
    Ok(TheoreticalBound {
        c_of_lambda: cl,
        d_n,
        k_p_eps,
    })
}

/// Pairing of an exact root with a computed eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootMatch {
    pub exact: Complex64,
    pub computed: Complex64,
    pub abs_error: f64,
    pub multiplicity: usize,
    /// Index into the spectrum.
    pub index: usize,
    pub eigfun_error: Option<f64>,
}

/// Nearest-neighbour pairing. Each exact root claims `multiplicity` distinct
/// eigenvalues within half the distance to the next exact root.
pub fn match_roots(exact: &[(Complex64, usize)], spectrum: &Spectrum) -> Vec<RootMatch> {
    let mut used = vec![false; spectrum.eigenvalues.len()];
    let mut out = Vec::new();
    for (i, &(z, m)) in exact.iter().enumerate() {
        let radius = exact
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, (w, _))| 0.5 * (w - z).norm())
            .fold(f64::INFINITY, f64::min);
        for _ in 0..m {
            let best = (0..spectrum.eigenvalues.len())
                .filter(|&k| !used[k])
                .min_by(|&a, &b| (spectrum.eigenvalues[a] - z).norm().total_cmp(&(spectrum.eigenvalues[b] - z).norm()));
            if let Some(k) = best {
                let e = (spectrum.eigenvalues[k] - z).norm();
                if e < radius {
                    used[k] = true;
                    out.push(RootMatch {
                        exact: z,
                        computed: spectrum.eigenvalues[k],
                        abs_error: e,
                        multiplicity: m,
                        index: k,
                        eigfun_error: None,
                    });
                }
            }
        }
    }
    out
}

/// Max-norm distance between a DDE eigenvector, scaled to head value one, and
/// the weighted exact eigenfunction `e^{(ρ+λ)θ}` on the mesh.
pub fn eigfun_error_dde(vector: &[Complex64], mesh: &ScaledMesh, rho: f64, lambda: Complex64) -> Result<f64> {
    let head = vector[0];
    if head.norm() < 1e-13 {
        return Err(Error::ZeroHeadComponent);
    }
    let mut err: f64 = 0.0;
    for (j, &th) in mesh.nodes.iter().enumerate() {
        let exact = ((lambda + rho) * th).exp();
        err = err.max((vector[j + 1] / head - exact).norm());
    }
    Ok(err)
}

/// `(e^{λθ} - 1)/λ`, with its series near `λ = 0`.
pub fn re_eigenfunction(lambda: Complex64, theta: f64) -> Complex64 {
    let z = lambda * theta;
    if z.norm() < 1e-5 {
        c(theta) * (c(1.0) + z / 2.0 + z * z / 6.0 + z * z * z / 24.0)
    } else {
        (z.exp() - 1.0) / lambda
    }
}

/// Quadrature-weighted 1-norm distance between the derivative of an RE
/// eigenvector, scaled to value one at `θ = 0`, and `e^{λθ}`, both weighted.
pub fn eigfun_error_re(vector: &[Complex64], mesh: &ScaledMesh, quad: &HalfLineQuadrature, rho: f64, lambda: Complex64) -> Result<f64> {
    let x = ext_nodes(mesh);
    let dw = weighted_diff_matrix_points(&x, rho)?;
    let n1 = x.len();
    let deriv: Vec<Complex64> = (0..n1)
        .map(|i| (1..n1).map(|k| vector[k - 1] * dw[(i, k)]).sum())
        .collect();
    let head = deriv[0];
    if head.norm() < 1e-13 {
        return Err(Error::ZeroHeadComponent);
    }
    let offset = match mesh.family {
        NodeFamily::LaguerreZeros => 1,
        NodeFamily::LaguerreExtrema => 0,
    };
    let mut err = 0.0;
    for (i, &w) in quad.mapped_weights.iter().enumerate() {
        let k = i + offset;
        let exact = ((lambda + rho) * x[k]).exp();
        err += w * (deriv[k] / head - exact).norm();
    }
    Ok(err)
}

/// The linear benchmark problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TestCase {
    A1,
    A2,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl TestCase {
    pub const ALL: [TestCase; 8] = [TestCase::A1, TestCase::A2, TestCase::B, TestCase::C, TestCase::D, TestCase::E, TestCase::F, TestCase::G];

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "a1" => TestCase::A1,
            "a2" => TestCase::A2,
            "b" => TestCase::B,
            "c" => TestCase::C,
            "d" => TestCase::D,
            "e" => TestCase::E,
            "f" => TestCase::F,
            "g" => TestCase::G,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TestCase::A1 => "a1",
            TestCase::A2 => "a2",
            TestCase::B => "b",
            TestCase::C => "c",
            TestCase::D => "d",
            TestCase::E => "e",
            TestCase::F => "f",
            TestCase::G => "g",
        }
    }

    pub fn kernel(self) -> KernelSpec {
        match self {
            TestCase::A1 | TestCase::A2 => KernelSpec::Exponential { k0: -6.0, mu: 2.0 },
            TestCase::B => KernelSpec::Exponential { k0: -8.0, mu: 2.0 },
            TestCase::C => KernelSpec::Exponential { k0: -16.0, mu: 2.0 },
            TestCase::D => KernelSpec::Gamma { mu: 4.0, sigma: 2.0 },
            TestCase::E => KernelSpec::Gamma { mu: 4.0, sigma: std::f64::consts::PI },
            TestCase::F => KernelSpec::SinModulated { k0: 1.0, mu: 1.0, a: 1.0 },
            TestCase::G => KernelSpec::SinModulated { k0: 3.0, mu: 1.5, a: 1.0 },
        }
    }

    /// Kernel rate `μ`.
    pub fn mu(self) -> f64 {
        match self {
            TestCase::D | TestCase::E => 4.0,
            TestCase::F => 1.0,
            TestCase::G => 1.5,
            _ => 2.0,
        }
    }

    pub fn is_re(self) -> bool {
        matches!(self, TestCase::F | TestCase::G)
    }

    /// Default scaling: `ρ1 = μ/2`; `ρ = ρ1` for DDEs and `ρ = μ` for REs.
    pub fn default_rates(self) -> (f64, f64) {
        let r1 = self.mu() / 2.0;
        (r1, if self.is_re() { self.mu() } else { r1 })
    }

    pub fn problem(self, rho: f64) -> LinearProblem {
        let kernel = self.kernel();
        match self {
            TestCase::F | TestCase::G => LinearProblem::Re(LinearReProblem { kernel, rho }),
            _ => {
                let a = match self {
                    TestCase::A1 | TestCase::A2 => 3.0,
                    TestCase::B => 2.0,
                    TestCase::C => 6.0,
                    _ => 0.0,
                };
                LinearProblem::Dde(LinearDdeProblem { a, kernel, rho })
            }
        }
    }

    /// Tracked characteristic roots with multiplicities.
    pub fn exact_roots(self) -> Result<Vec<(Complex64, usize)>> {
        Ok(match self {
            TestCase::A1 => vec![(exact_roots_exponential(3.0, 2.0, -6.0).1, 1)],
            TestCase::A2 => vec![(exact_roots_exponential(3.0, 2.0, -6.0).0, 1)],
            TestCase::B => {
                let (r1, r2, _) = exact_roots_exponential(2.0, 2.0, -8.0);
                vec![(r1, 1), (r2, 1)]
            }
            TestCase::C => vec![(exact_roots_exponential(6.0, 2.0, -16.0).0, 2)],
            _ => {
                let guess = match self {
                    TestCase::G => c(2.0),
                    _ => c(0.5),
                };
                vec![(char_root_solve(&self.problem(self.mu()), guess)?, 1)]
            }
        })
    }
}

/// One row of a convergence study.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRecord {
    pub case: String,
    pub family: NodeFamily,
    pub rho1: f64,
    pub rho: f64,
    pub quad_mode: QuadMode,
    pub n: usize,
    /// Largest error over the matched roots.
    pub abs_error: f64,
    pub eigfun_error: f64,
    pub matched_lambda: Complex64,
    pub matches: Vec<RootMatch>,
    /// Theoretical rate at the first tracked root.
    pub d_n: f64,
    pub error: Option<String>,
}

/// Everything needed to reproduce one discretization.
#[derive(Debug, Clone)]
pub struct StudySetup {
    pub case: TestCase,
    pub family: NodeFamily,
    pub rho1: f64,
    pub rho: f64,
    pub mode: QuadMode,
}

/// Assembles, solves and matches for a single `N`.
pub fn study_point(setup: &StudySetup, n: usize) -> Result<ConvergenceRecord> {
    let mesh = build_scaled_mesh(setup.family, n, setup.rho1)?;
    let quad = half_line_quadrature(setup.family, n, setup.rho1)?;
    let problem = setup.case.problem(setup.rho);
    let op = assemble_linear(&problem, &mesh, &quad, setup.mode)?;
    let spec = eig_dense(&op.matrix, true)?;
    let exact = setup.case.exact_roots()?;
    let mut matches = match_roots(&exact, &spec);
    if matches.is_empty() {
        return Err(Error::NoConvergence("no eigenvalue matched the exact roots".into()));
    }
    let vecs = spec.eigenvectors.as_ref().expect("requested");
    for m in matches.iter_mut() {
        let v: Vec<Complex64> = vecs.column(m.index).iter().cloned().collect();
        m.eigfun_error = match &problem {
            LinearProblem::Dde(_) => eigfun_error_dde(&v, &mesh, setup.rho, m.exact).ok(),
            LinearProblem::Re(_) => eigfun_error_re(&v, &mesh, &quad, setup.rho, m.exact).ok(),
        };
    }
    let abs_error = matches.iter().map(|m| m.abs_error).fold(0.0, f64::max);
    let eigfun_error = matches.iter().filter_map(|m| m.eigfun_error).fold(0.0, f64::max);
    let d_n = theoretical_bound(exact[0].0, setup.rho1, n, setup.family, PNorm::Inf, 0.0)
        .map(|b| b.d_n)
        .unwrap_or(f64::NAN);
    Ok(ConvergenceRecord {
        case: setup.case.as_str().to_string(),
        family: setup.family,
        rho1: setup.rho1,
        rho: setup.rho,
        quad_mode: setup.mode,
        n,
        abs_error,
        eigfun_error,
        matched_lambda: matches[0].computed,
        matches,
        d_n,
        error: None,
    })
}

/// Runs [`study_point`] for each `N` in parallel; failures become rows with
/// the `error` field set.
pub fn convergence_study(setup: &StudySetup, n_list: &[usize]) -> Vec<ConvergenceRecord> {
    n_list
        .par_iter()
        .map(|&n| {
            study_point(setup, n).unwrap_or_else(|e| ConvergenceRecord {
                case: setup.case.as_str().to_string(),
                family: setup.family,
                rho1: setup.rho1,
                rho: setup.rho,
                quad_mode: setup.mode,
                n,
                abs_error: f64::NAN,
                eigfun_error: f64::NAN,
                matched_lambda: c(f64::NAN),
                matches: vec![],
                d_n: f64::NAN,
                error: Some(e.to_string()),
            })
        })
        .collect()
}

/// Least-squares slope of `ln y` against `x`.
pub fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
