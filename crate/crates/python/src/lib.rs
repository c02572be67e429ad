use idepsd::appendix;
use idepsd::error::Error;
use idepsd::laguerre::{family_rule, NodeFamily};
use idepsd::linalg::eig_dense;
use idepsd::mesh::{build_scaled_mesh, half_line_quadrature};
use idepsd::models::{self, BifurcationKind, ContinuationSettings, ModelSpec};
use idepsd::psd::{assemble_linear, QuadMode};
use idepsd::spectra::{convergence_study, StudySetup, TestCase};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidInput(m) | Error::InvalidParameter(m) => PyValueError::new_err(m),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn family(name: &str) -> PyResult<NodeFamily> {
    match name {
        "zeros" => Ok(NodeFamily::LaguerreZeros),
        "extrema" => Ok(NodeFamily::LaguerreExtrema),
        other => Err(PyValueError::new_err(format!("unknown node family '{other}'"))),
    }
}

fn quad_mode(name: &str) -> PyResult<QuadMode> {
    QuadMode::parse(name).ok_or_else(|| PyValueError::new_err(format!("unknown quadrature mode '{name}'")))
}

fn test_case(name: &str) -> PyResult<TestCase> {
    TestCase::parse(name).ok_or_else(|| PyValueError::new_err(format!("unknown test case '{name}'")))
}

/// Scaled collocation nodes and half-line quadrature for one family.
#[pyclass(frozen, get_all)]
struct Nodes {
    family: String,
    n: usize,
    rho1: f64,
    t: Vec<f64>,
    weights: Vec<f64>,
    theta: Vec<f64>,
    mapped_weights: Vec<f64>,
}

#[pyfunction]
fn nodes(family_name: &str, n: usize, rho1: f64) -> PyResult<Nodes> {
    let fam = family(family_name)?;
    let rule = family_rule(fam, n).map_err(to_py)?;
    let q = half_line_quadrature(fam, n, rho1).map_err(to_py)?;
    Ok(Nodes {
        family: family_name.to_string(),
        n,
        rho1,
        theta: q.mapped_nodes.iter().map(|s| -s).collect(),
        t: rule.nodes,
        weights: rule.weights,
        mapped_weights: q.mapped_weights,
    })
}

/// Eigenvalues of the discretized generator for a linear test case, sorted
/// by decreasing real part.
#[pyfunction]
#[pyo3(signature = (case, family_name, n, rho1=None, rho=None, quad="gauss"))]
fn spectrum(case: &str, family_name: &str, n: usize, rho1: Option<f64>, rho: Option<f64>, quad: &str) -> PyResult<Vec<Complex64>> {
    let case = test_case(case)?;
    let fam = family(family_name)?;
    let rho1 = rho1.unwrap_or(case.default_rates().0);
    let rho = rho.unwrap_or(if case.is_re() { case.mu() } else { rho1 });
    let mesh = build_scaled_mesh(fam, n, rho1).map_err(to_py)?;
    let q = half_line_quadrature(fam, n, rho1).map_err(to_py)?;
    let op = assemble_linear(&case.problem(rho), &mesh, &q, quad_mode(quad)?).map_err(to_py)?;
    Ok(eig_dense(&op.matrix, false).map_err(to_py)?.eigenvalues)
}

#[pyclass(frozen, get_all)]
struct ConvergenceRow {
    n: usize,
    abs_error: f64,
    eigfun_error: f64,
    matched_lambda: Complex64,
    d_n: f64,
    error: Option<String>,
}

#[pymethods]
impl ConvergenceRow {
    fn __repr__(&self) -> String {
        format!("ConvergenceRow(n={}, abs_error={:e}, matched_lambda={})", self.n, self.abs_error, self.matched_lambda)
    }
}

/// Convergence of the tracked roots of a linear test case over `ns`.
#[pyfunction]
#[pyo3(signature = (case, family_name, ns, rho1=None, rho=None, quad="gauss"))]
fn convergence(case: &str, family_name: &str, ns: Vec<usize>, rho1: Option<f64>, rho: Option<f64>, quad: &str) -> PyResult<Vec<ConvergenceRow>> {
    let case = test_case(case)?;
    let (d1, _) = case.default_rates();
    let rho1 = rho1.unwrap_or(d1);
    let setup = StudySetup {
        case,
        family: family(family_name)?,
        rho1,
        rho: rho.unwrap_or(if case.is_re() { case.mu() } else { rho1 }),
        mode: quad_mode(quad)?,
    };
    Ok(convergence_study(&setup, &ns)
        .into_iter()
        .map(|r| ConvergenceRow {
            n: r.n,
            abs_error: r.abs_error,
            eigfun_error: r.eigfun_error,
            matched_lambda: r.matched_lambda,
            d_n: r.d_n,
            error: r.error,
        })
        .collect())
}

/// Eigenvalues of the reduced differentiation matrix and their closed form.
#[pyfunction]
fn reduced_spectrum(n: usize, family_name: &str) -> PyResult<(Vec<Complex64>, Vec<Complex64>)> {
    let r = appendix::reduced_diffmat_spectrum(n, family(family_name)?).map_err(to_py)?;
    Ok((r.computed.eigenvalues, r.predicted))
}

/// Weighted and plain node discrepancy between the recurrence and the
/// direct collocation solve of the scalar test problem.
#[pyfunction]
fn equivalence(mu: Complex64, beta: Complex64, c: Complex64, n: usize, family_name: &str) -> PyResult<(f64, f64)> {
    let r = appendix::equivalence_check(mu, beta, c, n, family(family_name)?).map_err(to_py)?;
    Ok((r.weighted_residual, r.plain_residual))
}

#[pyclass(frozen, get_all)]
struct Branch {
    param: Vec<f64>,
    state_head: Vec<f64>,
    rightmost: Vec<Complex64>,
    stable: Vec<bool>,
    /// `(kind, parameter, critical eigenvalue)` with kind `"BP"` or `"H"`.
    points: Vec<(String, f64, Complex64)>,
}

#[pymethods]
impl Branch {
    fn __repr__(&self) -> String {
        format!("Branch({} records, {} special points)", self.param.len(), self.points.len())
    }
}

/// One of the two nonlinear population models.
#[pyclass(frozen)]
struct Model {
    spec: ModelSpec,
}

#[pymethods]
impl Model {
    #[staticmethod]
    fn blowflies(beta0: f64, mu: f64) -> PyResult<Self> {
        Ok(Model {
            spec: models::model_blowflies(beta0, mu).map_err(to_py)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (m, tau, delta_a=0.5, delta_j=1.0, a=7.0, b=350.0))]
    fn beretta_breda(m: f64, tau: f64, delta_a: f64, delta_j: f64, a: f64, b: f64) -> PyResult<Self> {
        Ok(Model {
            spec: models::model_beretta_breda(delta_a, delta_j, a, b, m, tau).map_err(to_py)?,
        })
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.spec.name()
    }

    fn param(&self, name: &str) -> PyResult<f64> {
        self.spec.param(name).map_err(to_py)
    }

    fn with_param(&self, name: &str, value: f64) -> PyResult<Model> {
        Ok(Model {
            spec: self.spec.with_param(name, value).map_err(to_py)?,
        })
    }

    /// Closed-form nontrivial equilibrium, when it exists.
    fn equilibrium(&self) -> Option<f64> {
        self.spec.equilibrium()
    }

    /// Continues the nontrivial equilibrium in `param` over `[start, end]`.
    #[pyo3(signature = (param, start, end, steps=40, n=20, family_name="extrema", detect_tol=1e-10))]
    #[allow(clippy::too_many_arguments)]
    fn continuation(&self, py: Python<'_>, param: &str, start: f64, end: f64, steps: usize, n: usize, family_name: &str, detect_tol: f64) -> PyResult<Branch> {
        let mut s = ContinuationSettings::new(family(family_name)?, n, param, start, end, steps);
        s.detect_tol = detect_tol;
        let spec = self.spec;
        let br = py.detach(|| models::continue_equilibrium(&spec, &s)).map_err(to_py)?;
        Ok(Branch {
            param: br.records.iter().map(|r| r.param).collect(),
            state_head: br.records.iter().map(|r| r.state_head).collect(),
            rightmost: br.records.iter().map(|r| r.rightmost).collect(),
            stable: br.records.iter().map(|r| r.stable).collect(),
            points: br
                .points
                .iter()
                .map(|p| {
                    let kind = match p.kind {
                        BifurcationKind::BranchPoint => "BP",
                        BifurcationKind::Hopf => "H",
                    };
                    (kind.to_string(), p.param, p.lambda)
                })
                .collect(),
        })
    }

    /// Hopf values of `tau` for each `m`; rows without two points carry a message.
    #[pyo3(signature = (m_values, start=0.5, end=6.0, steps=40, n=20, family_name="extrema"))]
    #[allow(clippy::type_complexity, clippy::too_many_arguments)]
    fn hopf_curve(&self, py: Python<'_>, m_values: Vec<f64>, start: f64, end: f64, steps: usize, n: usize, family_name: &str) -> PyResult<Vec<(f64, Vec<f64>, Option<String>)>> {
        let s = ContinuationSettings::new(family(family_name)?, n, "tau", start, end, steps);
        let spec = self.spec;
        let rows = py.detach(|| models::hopf_curve_2param(&spec, &m_values, &s));
        Ok(rows.into_iter().map(|r| (r.m, r.taus, r.error)).collect())
    }

    fn __repr__(&self) -> String {
        let ps: Vec<String> = self
            .spec
            .param_names()
            .iter()
            .map(|k| format!("{k}={}", self.spec.param(k).unwrap_or(f64::NAN)))
            .collect();
        format!("Model.{}({})", self.spec.name().replace('-', "_"), ps.join(", "))
    }
}

/// Runs the command-line front end; returns `(exit code, stdout, stderr)`.
#[pyfunction]
fn run_cli(py: Python<'_>, args: Vec<String>) -> (i32, String, String) {
    py.detach(|| {
        let mut out = vec![];
        let mut err = vec![];
        let mut full = vec!["idepsd".to_string()];
        full.extend(args);
        let code = idepsd::cli::run(full, &mut out, &mut err);
        (code, String::from_utf8_lossy(&out).into_owned(), String::from_utf8_lossy(&err).into_owned())
    })
}

#[pymodule]
pub fn pyidepsd(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Nodes>()?;
    m.add_class::<ConvergenceRow>()?;
    m.add_class::<Branch>()?;
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(nodes, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(convergence, m)?)?;
    m.add_function(wrap_pyfunction!(reduced_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(equivalence, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
