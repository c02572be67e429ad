//! Benchmark nonlinear models: a stage-structured population DDE with gamma
//! distributed maturation and Nicholson's blowflies as a renewal equation.
//!
//! Both are reduced by the pseudospectral discretization, then studied through
//! equilibria, their linear stability and natural-parameter continuation. Two
//! independent references are included: the linear chain trick ODE for the
//! DDE at integer shape, and the transcendental characteristic equation of
//! the renewal equation.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::laguerre::NodeFamily;
use crate::linalg::eig_dense;
use crate::mesh::{build_scaled_mesh, half_line_quadrature, HalfLineQuadrature, ScaledMesh};
use crate::psd::{DiscretizedOde, NonlinearDde, NonlinearRe, ProblemTag};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    /// `y' = -δ_A y + b ∫ f_{m/τ}^{(m)}(s) e^{-δ_J s - a y(t-s)} y(t-s) ds`.
    BerettaBreda {
        delta_a: f64,
        delta_j: f64,
        a: f64,
        b: f64,
        m: f64,
        tau: f64,
    },
    /// `y(t) = β0 x e^{-x}` with `x = ∫_1^∞ y(t-s) e^{-μs} ds`.
    Blowflies { beta0: f64, mu: f64 },
}

pub fn model_beretta_breda(delta_a: f64, delta_j: f64, a: f64, b: f64, m: f64, tau: f64) -> Result<ModelSpec> {
    let spec = ModelSpec::BerettaBreda {
        delta_a,
        delta_j,
        a,
        b,
        m,
        tau,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn model_blowflies(beta0: f64, mu: f64) -> Result<ModelSpec> {
    let spec = ModelSpec::Blowflies { beta0, mu };
    spec.validate()?;
    Ok(spec)
}

impl ModelSpec {
    /// The stage-structured model with the parameters used throughout the tests.
    pub fn beretta_breda_default(m: f64, tau: f64) -> ModelSpec {
        ModelSpec::BerettaBreda {
            delta_a: 0.5,
            delta_j: 1.0,
            a: 7.0,
            b: 350.0,
            m,
            tau,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::BerettaBreda { .. } => "beretta-breda",
            ModelSpec::Blowflies { .. } => "blowflies",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ModelSpec::BerettaBreda {
                delta_a,
                delta_j,
                a,
                b,
                m,
                tau,
            } => [delta_a, delta_j, a, b, m, tau].iter().all(|v| *v > 0.0 && v.is_finite()),
            // μ = 0 leaves no decay for the weighted state space
            ModelSpec::Blowflies { beta0, mu } => beta0 >= 0.0 && beta0.is_finite() && mu > 0.0 && mu.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("{self:?}")))
        }
    }

    pub fn tag(&self) -> ProblemTag {
        match self {
            ModelSpec::BerettaBreda { .. } => ProblemTag::Dde,
            ModelSpec::Blowflies { .. } => ProblemTag::Re,
        }
    }

    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            ModelSpec::BerettaBreda { .. } => &["delta_a", "delta_j", "a", "b", "m", "tau"],
            ModelSpec::Blowflies { .. } => &["beta0", "mu"],
        }
    }

    pub fn param(&self, name: &str) -> Result<f64> {
        let v = match (*self, name) {
            (ModelSpec::BerettaBreda { delta_a, .. }, "delta_a") => delta_a,
            (ModelSpec::BerettaBreda { delta_j, .. }, "delta_j") => delta_j,
            (ModelSpec::BerettaBreda { a, .. }, "a") => a,
            (ModelSpec::BerettaBreda { b, .. }, "b") => b,
            (ModelSpec::BerettaBreda { m, .. }, "m") => m,
            (ModelSpec::BerettaBreda { tau, .. }, "tau") => tau,
            (ModelSpec::Blowflies { beta0, .. }, "beta0") => beta0,
            (ModelSpec::Blowflies { mu, .. }, "mu") => mu,
            _ => return Err(Error::InvalidInput(format!("{} has no parameter {name}", self.name()))),
        };
        Ok(v)
    }

    pub fn with_param(&self, name: &str, v: f64) -> Result<ModelSpec> {
        let mut out = *self;
        match (&mut out, name) {
            (ModelSpec::BerettaBreda { delta_a, .. }, "delta_a") => *delta_a = v,
            (ModelSpec::BerettaBreda { delta_j, .. }, "delta_j") => *delta_j = v,
            (ModelSpec::BerettaBreda { a, .. }, "a") => *a = v,
            (ModelSpec::BerettaBreda { b, .. }, "b") => *b = v,
            (ModelSpec::BerettaBreda { m, .. }, "m") => *m = v,
            (ModelSpec::BerettaBreda { tau, .. }, "tau") => *tau = v,
            (ModelSpec::Blowflies { beta0, .. }, "beta0") => *beta0 = v,
            (ModelSpec::Blowflies { mu, .. }, "mu") => *mu = v,
            _ => return Err(Error::InvalidInput(format!("{} has no parameter {name}", self.name()))),
        }
        out.validate()?;
        Ok(out)
    }

    /// `(ρ1, ρ)`; both models use `ρ = ρ1`.
    pub fn rates(&self) -> (f64, f64) {
        let r = match *self {
            ModelSpec::BerettaBreda { delta_j, m, tau, .. } => (delta_j + m / tau) / 4.0,
            ModelSpec::Blowflies { mu, .. } => mu / 2.0,
        };
        (r, r)
    }

    /// Distributed kernel of the model, including any constant factor.
    pub fn kernel(&self) -> KernelSpec {
        match *self {
            ModelSpec::BerettaBreda { delta_j, b, m, tau, .. } => KernelSpec::Damped {
                inner: Box::new(KernelSpec::Gamma { mu: m / tau, sigma: m }),
                factor: b,
                rate: delta_j,
            },
            ModelSpec::Blowflies { mu, .. } => KernelSpec::Shifted {
                inner: Box::new(KernelSpec::Exponential { k0: 1.0, mu }),
                shift: 1.0,
            },
        }
    }

    /// Nontrivial equilibrium value `ȳ`, when one exists.
    ///
    /// For the renewal equation the nontrivial branch is returned on both
    /// sides of the transcritical point, so `ȳ` may be negative.
    pub fn equilibrium(&self) -> Option<f64> {
        match *self {
            ModelSpec::BerettaBreda {
                delta_a,
                delta_j,
                a,
                b,
                m,
                tau,
            } => {
                let mu = m / tau;
                let mass = b * (m * (mu / (mu + delta_j)).ln()).exp();
                (mass > delta_a).then(|| (mass / delta_a).ln() / a)
            }
            ModelSpec::Blowflies { beta0, mu } => {
                if beta0 <= 0.0 {
                    return None;
                }
                Some(((beta0 / mu).ln() - mu) * mu * mu.exp())
            }
        }
    }
}

/// Discretized model together with the mesh it lives on.
pub enum ModelOde {
    Dde(NonlinearDde),
    Re(NonlinearRe),
}

impl ModelOde {
    pub fn mesh(&self) -> &ScaledMesh {
        match self {
            ModelOde::Dde(d) => &d.mesh,
            ModelOde::Re(r) => &r.mesh,
        }
    }

    pub fn rho(&self) -> f64 {
        match self {
            ModelOde::Dde(d) => d.rho,
            ModelOde::Re(r) => r.rho,
        }
    }

    /// Current value `y(t)`: the head for a DDE, the right-hand side of the
    /// renewal equation for an RE.
    pub fn head(&self, u: &[f64]) -> f64 {
        match self {
            ModelOde::Dde(_) => u[0],
            ModelOde::Re(r) => {
                let lam: f64 = r.functional.iter().zip(u).map(|(c, v)| c * v).sum();
                (r.f)(lam)
            }
        }
    }

    /// The discrete equilibrium profile carrying `y ≡ ȳ`.
    pub fn profile(&self, y: f64) -> Vec<f64> {
        match self {
            ModelOde::Dde(d) => d.constant_state(y),
            ModelOde::Re(r) => r.constant_state(y),
        }
    }
}

impl DiscretizedOde for ModelOde {
    fn dim(&self) -> usize {
        match self {
            ModelOde::Dde(d) => d.dim(),
            ModelOde::Re(r) => r.dim(),
        }
    }

    fn rhs(&self, u: &[f64]) -> Result<Vec<f64>> {
        match self {
            ModelOde::Dde(d) => d.rhs(u),
            ModelOde::Re(r) => r.rhs(u),
        }
    }

    fn scales(&self) -> Vec<f64> {
        match self {
            ModelOde::Dde(d) => d.scales(),
            ModelOde::Re(r) => r.scales(),
        }
    }

    fn jacobian(&self, u: &[f64]) -> Result<DMatrix<f64>> {
        match self {
            ModelOde::Dde(d) => d.jacobian(u),
            ModelOde::Re(r) => r.jacobian(u),
        }
    }
}

/// `U ↦ A_{0,N} U + F_N(U)` for `model` on the given mesh, with `ρ = ρ1`.
pub fn assemble_nonlinear_rhs(model: &ModelSpec, mesh: &ScaledMesh, quad: &HalfLineQuadrature) -> Result<ModelOde> {
    model.validate()?;
    let rho = mesh.rho1;
    match *model {
        ModelSpec::BerettaBreda { delta_a, a, .. } => {
            let ode = NonlinearDde::new(
                Box::new(move |y| -delta_a * y),
                &model.kernel(),
                // clamp only inside the exponent, so the state itself is untouched
                Box::new(move |y| y * (-a * y.max(0.0)).exp()),
                mesh,
                quad,
                rho,
            )?;
            Ok(ModelOde::Dde(ode))
        }
        ModelSpec::Blowflies { beta0, mu } => {
            // ∫_1^∞ e^{-μs} Φ'(-s) ds = e^{-μ}Φ(-1) - μ e^{-μ} ∫_0^∞ e^{-μσ} Φ(-1-σ) dσ
            crate::psd::quad_to_mesh(mesh, quad)?;
            let mut terms = vec![(-1.0, -mu, 1.0)];
            for (&s, &lw) in quad.mapped_nodes.iter().zip(&quad.log_mapped_weights) {
                terms.push((-1.0 - s, mu.ln() - mu + lw - mu * s, -1.0));
            }
            let functional = NonlinearRe::point_functional(mesh, rho, &terms)?;
            let ode = NonlinearRe::new(Box::new(move |x| beta0 * x * (-x).exp()), functional, mesh, rho)?;
            Ok(ModelOde::Re(ode))
        }
    }
}

/// Builds the mesh and quadrature from the model's rate rule and assembles.
pub fn discretize(model: &ModelSpec, family: NodeFamily, n: usize) -> Result<ModelOde> {
    let (rho1, _) = model.rates();
    let mesh = build_scaled_mesh(family, n, rho1)?;
    let quad = half_line_quadrature(family, n, rho1)?;
    assemble_nonlinear_rhs(model, &mesh, &quad)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumResult {
    pub state: Vec<f64>,
    pub residual_norm: f64,
    pub converged: bool,
    pub newton_iters: usize,
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

const MAX_NEWTON: usize = 50;

/// Damped Newton iteration on `G(U) = 0` with a central-difference Jacobian.
///
/// A failure to converge is reported through `converged = false` together with
/// the best iterate; only evaluation failures are returned as errors.
pub fn equilibrium_newton(ode: &dyn DiscretizedOde, guess: &[f64], tol: f64) -> Result<EquilibriumResult> {
    if guess.len() != ode.dim() || guess.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("guess must be finite and match the dimension".into()));
    }
    let mut u = guess.to_vec();
    let mut g = ode.rhs(&u)?;
    let mut res = sup_norm(&g);
    let mut iters = 0;
    let mut polish = 0;
    // once within tolerance, up to two more full steps are taken while they
    // still reduce the residual: near a branch point the Jacobian is almost
    // singular and the extra digits matter for the eigenvalues
    while iters < MAX_NEWTON && (res > tol || polish < 2) {
        let polishing = res <= tol;
        let jac = ode.jacobian(&u)?;
        let rhs = nalgebra::DVector::from_iterator(g.len(), g.iter().map(|v| -v));
        let Some(step) = jac.lu().solve(&rhs) else {
            break;
        };
        if polishing {
            polish += 1;
        } else {
            iters += 1;
        }
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-4 {
            let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(a, d)| a + t * d).collect();
            if let Ok(gt) = ode.rhs(&trial) {
                let rt = sup_norm(&gt);
                if rt < res || (!polishing && rt <= tol) {
                    u = trial;
                    g = gt;
                    res = rt;
                    accepted = true;
                    break;
                }
            }
            if polishing {
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok(EquilibriumResult {
        state: u,
        residual_norm: res,
        converged: res <= tol,
        newton_iters: iters,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    /// Eigenvalues right of `-ρ + margin`, sorted by descending real part.
    pub eigenvalues: Vec<Complex64>,
    pub rightmost: Complex64,
    pub stable: bool,
}

/// Eigenvalues closer than this to the boundary `Re λ = -ρ` are ignored.
pub const STRIP_MARGIN: f64 = 0.05;
/// Real parts within this distance of zero count as neither side.
pub const STABILITY_TOL: f64 = 1e-9;

/// Spectrum of the Jacobian at an equilibrium.
pub fn stability_at(ode: &dyn DiscretizedOde, state: &[f64], rho: f64) -> Result<StabilityReport> {
    let jac = ode.jacobian(state)?;
    stability_of_matrix(&jac, rho)
}

pub fn stability_of_matrix(jac: &DMatrix<f64>, rho: f64) -> Result<StabilityReport> {
    let spec = eig_dense(jac, false)?;
    let rightmost = spec.rightmost().ok_or(Error::InvalidInput("empty system".into()))?;
    let eigenvalues: Vec<Complex64> = spec.eigenvalues.into_iter().filter(|z| z.re > -rho + STRIP_MARGIN).collect();
    let stable = eigenvalues.iter().all(|z| z.re < -STABILITY_TOL);
    Ok(StabilityReport {
        eigenvalues,
        rightmost,
        stable,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BifurcationKind {
    BranchPoint,
    Hopf,
}

impl BifurcationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BifurcationKind::BranchPoint => "BP",
            BifurcationKind::Hopf => "H",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BifurcationPoint {
    pub kind: BifurcationKind,
    pub param: f64,
    pub lambda: Complex64,
    /// `|Re λ|` at the refined parameter.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchRecord {
    pub param: f64,
    pub state_head: f64,
    pub rightmost: Complex64,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Branch {
    pub records: Vec<BranchRecord>,
    pub points: Vec<BifurcationPoint>,
    /// Steps in which both test functions changed sign.
    pub ambiguous: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationSettings {
    pub family: NodeFamily,
    pub n: usize,
    pub param: String,
    pub start: f64,
    pub end: f64,
    pub steps: usize,
    /// Newton tolerance on the sup norm of the residual.
    pub newton_tol: f64,
    /// Bisection stops once `|Re λ_c|` is below this.
    pub detect_tol: f64,
}

impl ContinuationSettings {
    pub fn new(family: NodeFamily, n: usize, param: &str, start: f64, end: f64, steps: usize) -> Self {
        ContinuationSettings {
            family,
            n,
            param: param.to_string(),
            start,
            end,
            steps,
            newton_tol: 1e-10,
            detect_tol: 1e-8,
        }
    }
}

/// Both test functions and the eigenvalues realizing them.
#[derive(Debug, Clone, Copy)]
struct TestValues {
    /// Largest real eigenvalue, or `-ρ` when none lies in the strip.
    real: (f64, Complex64),
    /// Largest real part over eigenvalues with positive imaginary part.
    complex: (f64, Complex64),
}

fn test_values(report: &StabilityReport, rho: f64) -> TestValues {
    let im_tol = 1e-8;
    let mut real = (-rho, Complex64::new(-rho, 0.0));
    let mut complex = (-rho, Complex64::new(-rho, 0.0));
    for &z in &report.eigenvalues {
        let scale = 1.0 + z.norm();
        if z.im.abs() <= im_tol * scale {
            if z.re > real.0 {
                real = (z.re, Complex64::new(z.re, 0.0));
            }
        } else if z.im > 0.0 && z.re > complex.0 {
            complex = (z.re, z);
        }
    }
    TestValues { real, complex }
}

/// A solved point on the branch.
struct Solved {
    param: f64,
    head: f64,
    report: StabilityReport,
    tests: TestValues,
}

fn solve_at(model: &ModelSpec, s: &ContinuationSettings, p: f64, head_guess: f64) -> Result<Option<Solved>> {
    let spec = model.with_param(&s.param, p)?;
    let ode = discretize(&spec, s.family, s.n)?;
    let guess = ode.profile(head_guess);
    let eq = equilibrium_newton(&ode, &guess, s.newton_tol)?;
    if !eq.converged {
        return Ok(None);
    }
    let rho = ode.rho();
    let report = stability_at(&ode, &eq.state, rho)?;
    let tests = test_values(&report, rho);
    Ok(Some(Solved {
        param: p,
        head: ode.head(&eq.state),
        report,
        tests,
    }))
}

fn bisect(
    model: &ModelSpec,
    s: &ContinuationSettings,
    lo: &Solved,
    hi: &Solved,
    kind: BifurcationKind,
) -> Result<BifurcationPoint> {
    let pick = |t: &TestValues| match kind {
        BifurcationKind::BranchPoint => t.real,
        BifurcationKind::Hopf => t.complex,
    };
    let (mut pa, mut ha, mut fa) = (lo.param, lo.head, pick(&lo.tests).0);
    let (mut pb, mut hb) = (hi.param, hi.head);
    let mut best = if pick(&lo.tests).0.abs() < pick(&hi.tests).0.abs() {
        (lo.param, pick(&lo.tests).1)
    } else {
        (hi.param, pick(&hi.tests).1)
    };
    let width0 = (pb - pa).abs();
    for _ in 0..200 {
        if best.1.re.abs() <= s.detect_tol || (pb - pa).abs() <= 1e-15 * width0.max(pa.abs()) {
            break;
        }
        let pm = 0.5 * (pa + pb);
        let hm = 0.5 * (ha + hb);
        let Some(m) = solve_at(model, s, pm, hm)? else {
            return Err(Error::StepFailure(pm));
        };
        let (fm, lm) = pick(&m.tests);
        if lm.re.abs() < best.1.re.abs() || fm.abs() < best.1.re.abs() {
            best = (pm, lm);
        }
        if (fm > 0.0) == (fa > 0.0) {
            pa = pm;
            ha = m.head;
            fa = fm;
        } else {
            pb = pm;
            hb = m.head;
        }
    }
    Ok(BifurcationPoint {
        kind,
        param: best.0,
        lambda: best.1,
        residual: best.1.re.abs(),
    })
}

/// Lagrange extrapolation of the head value through the last three points.
fn extrapolate(hist: &[(f64, f64)], p: f64) -> f64 {
    let pts = &hist[hist.len().saturating_sub(3)..];
    let mut out = 0.0;
    for (i, &(pi, yi)) in pts.iter().enumerate() {
        let mut l = 1.0;
        for (j, &(pj, _)) in pts.iter().enumerate() {
            if i != j {
                l *= (p - pj) / (pi - pj);
            }
        }
        out += l * yi;
    }
    out
}

/// Natural-parameter continuation of the nontrivial equilibrium.
///
/// The branch starts from the closed-form equilibrium at `settings.start`,
/// predicts each new head value by extrapolating the last points and corrects with
/// Newton. Sign changes of the largest real eigenvalue mark branch points and
/// sign changes of the largest real part over complex pairs mark Hopf points;
/// both are refined by bisection on the parameter.
pub fn continue_equilibrium(model: &ModelSpec, settings: &ContinuationSettings) -> Result<Branch> {
    let s = settings;
    if s.steps < 2 || !(s.start.is_finite() && s.end.is_finite()) || s.start == s.end {
        return Err(Error::InvalidInput("continuation needs a nonempty range and at least 2 steps".into()));
    }
    let start_model = model.with_param(&s.param, s.start)?;
    let y0 = start_model
        .equilibrium()
        .ok_or_else(|| Error::InvalidInput(format!("no nontrivial equilibrium at {} = {}", s.param, s.start)))?;
    let Some(first) = solve_at(model, s, s.start, y0)? else {
        return Err(Error::StepFailure(s.start));
    };
    let range = s.end - s.start;
    let nominal = range / s.steps as f64;
    let min_step = 1e-6 * range.abs();
    // two small probe steps supply the initial tangent and curvature
    let probe_h = 1e-2 * nominal;
    let mut hist: Vec<(f64, f64)> = vec![(first.param, first.head)];
    for k in 1..=2 {
        let pp = s.start + k as f64 * probe_h;
        let Some(probe) = solve_at(model, s, pp, first.head)? else {
            return Err(Error::StepFailure(pp));
        };
        hist.push((probe.param, probe.head));
    }
    let mut probing = true;
    let mut pts: Vec<Solved> = vec![first];
    let mut branch = Branch {
        records: vec![],
        points: vec![],
        ambiguous: vec![],
    };
    let mut h = nominal;
    loop {
        let last = pts.last().expect("branch is nonempty");
        let remaining = s.end - last.param;
        if remaining.abs() <= 1e-12 * range.abs() {
            break;
        }
        let step = if h.abs() > remaining.abs() { remaining } else { h };
        let p = last.param + step;
        let pred = extrapolate(&hist, p);
        // the gap to the linear prediction estimates the predictor error; a
        // poor prediction can converge onto the trivial branch unnoticed
        let lin = extrapolate(&hist[hist.len() - 2..], p);
        if (pred - lin).abs() > 0.05 * (pred - last.head).abs() + 1e-8 * (1.0 + pred.abs()) {
            h *= 0.5;
            if h.abs() < min_step {
                return Err(Error::StepFailure(p));
            }
            continue;
        }
        let trial = solve_at(model, s, p, pred)?;
        let accepted = match trial {
            // a corrector that travels far from the prediction may have
            // jumped to a neighbouring branch
            Some(next) if (next.head - pred).abs() <= 0.05 * (next.head - last.head).abs() + 1e-8 * (1.0 + next.head.abs()) => {
                Some(next)
            }
            _ => None,
        };
        match accepted {
            Some(next) => {
                if probing {
                    hist.truncate(1);
                    probing = false;
                }
                hist.push((next.param, next.head));
                pts.push(next);
                // recover toward the nominal step after a successful halving
                h = if (2.0 * h).abs() > nominal.abs() { nominal } else { 2.0 * h };
            }
            None => {
                h *= 0.5;
                if h.abs() < min_step {
                    return Err(Error::StepFailure(p));
                }
            }
        }
    }
    for w in pts.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let bp = (a.tests.real.0 > 0.0) != (b.tests.real.0 > 0.0);
        let hopf = (a.tests.complex.0 > 0.0) != (b.tests.complex.0 > 0.0);
        if bp && hopf {
            branch.ambiguous.push((a.param, b.param));
        }
        if bp {
            branch.points.push(bisect(model, s, a, b, BifurcationKind::BranchPoint)?);
        }
        if hopf {
            branch.points.push(bisect(model, s, a, b, BifurcationKind::Hopf)?);
        }
    }
    branch.records = pts
        .iter()
        .map(|p| BranchRecord {
            param: p.param,
            state_head: p.head,
            rightmost: p.report.rightmost,
            stable: p.report.stable,
        })
        .collect();
    Ok(branch)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HopfCurveRow {
    pub m: f64,
    /// Hopf values of `τ` found along the sweep, ascending.
    pub taus: Vec<f64>,
    pub error: Option<String>,
}

/// Hopf points in `τ` for each `m`, computed independently in parallel.
///
/// A row whose sweep finds fewer than two Hopf points carries a
/// `MissingHopf` message.
pub fn hopf_curve_2param(base: &ModelSpec, m_values: &[f64], settings: &ContinuationSettings) -> Vec<HopfCurveRow> {
    m_values
        .par_iter()
        .map(|&m| {
            let run = || -> Result<Vec<f64>> {
                let model = base.with_param("m", m)?;
                let mut s = settings.clone();
                s.param = "tau".into();
                let br = continue_equilibrium(&model, &s)?;
                let mut taus: Vec<f64> = br.points.iter().filter(|p| p.kind == BifurcationKind::Hopf).map(|p| p.param).collect();
                taus.sort_by(f64::total_cmp);
                Ok(taus)
            };
            match run() {
                Ok(taus) if taus.len() >= 2 => HopfCurveRow { m, taus, error: None },
                Ok(taus) => HopfCurveRow {
                    m,
                    taus,
                    error: Some(Error::MissingHopf(m).to_string()),
                },
                Err(e) => HopfCurveRow {
                    m,
                    taus: vec![],
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

/// Jacobian of the linear chain ODE at its positive equilibrium, with the
/// equilibrium head value.
pub fn lct_jacobian(model: &ModelSpec) -> Result<(DMatrix<f64>, f64)> {
    let ModelSpec::BerettaBreda {
        delta_a,
        delta_j,
        a,
        b,
        m,
        tau,
    } = *model
    else {
        return Err(Error::InvalidInput("the chain representation needs the stage-structured model".into()));
    };
    if m.fract() != 0.0 || !(1.0..=12.0).contains(&m) {
        return Err(Error::InvalidParameter(format!("chain length must be an integer in 1..=12, got {m}")));
    }
    let k = m as usize;
    let mu = m / tau;
    let r = mu + delta_j;
    let gain = b * (mu / r).powi(k as i32);
    // δ_A y = gain g(y), g(y) = y e^{-ay}, solved by Newton on h(y) = ln(gain/δ_A) - a y
    if gain <= delta_a {
        return Err(Error::InvalidParameter("no positive equilibrium".into()));
    }
    let mut y: f64 = 0.0;
    for _ in 0..50 {
        let f = (gain / delta_a).ln() - a * y;
        y += f / a;
        if f.abs() < 1e-15 {
            break;
        }
    }
    let dg = (-a * y).exp() * (1.0 - a * y);
    let mut jac = DMatrix::zeros(k + 1, k + 1);
    jac[(0, 0)] = -delta_a;
    jac[(0, k)] = gain;
    jac[(1, 0)] = r * dg;
    jac[(1, 1)] = -r;
    for i in 2..=k {
        jac[(i, i - 1)] = r;
        jac[(i, i)] = -r;
    }
    Ok((jac, y))
}

/// Largest real part over complex eigenvalues of the chain Jacobian.
fn lct_hopf_test(model: &ModelSpec) -> Result<f64> {
    let (jac, _) = lct_jacobian(model)?;
    let spec = eig_dense(&jac, false)?;
    Ok(spec
        .eigenvalues
        .iter()
        .filter(|z| z.im > 1e-10)
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Hopf values of `τ` for the chain ODE, located by a grid scan over
/// `[tau_lo, tau_hi]` followed by bisection.
pub fn lct_oracle_beretta_breda(model: &ModelSpec, tau_lo: f64, tau_hi: f64, grid: usize) -> Result<Vec<f64>> {
    let at = |t: f64| -> Result<f64> { lct_hopf_test(&model.with_param("tau", t)?) };
    let mut out = vec![];
    let mut prev = (tau_lo, at(tau_lo)?);
    for i in 1..=grid {
        let t = tau_lo + (tau_hi - tau_lo) * i as f64 / grid as f64;
        let f = at(t)?;
        if (f > 0.0) != (prev.1 > 0.0) {
            let (mut a, mut fa, mut b) = (prev.0, prev.1, t);
            while (b - a).abs() > 1e-14 * b.abs() {
                let c = 0.5 * (a + b);
                let fc = at(c)?;
                if (fc > 0.0) == (fa > 0.0) {
                    a = c;
                    fa = fc;
                } else {
                    b = c;
                }
            }
            out.push(0.5 * (a + b));
        }
        prev = (t, f);
    }
    Ok(out)
}

/// Root of the linearized characteristic equation of the stage-structured
/// model, `λ + δ_A = δ_A (1 - a ȳ) (r / (λ + r))^m` with `r = m/τ + δ_J`.
pub fn beretta_breda_char_root(model: &ModelSpec, guess: Complex64) -> Result<Complex64> {
    let ModelSpec::BerettaBreda { delta_a, delta_j, a, m, tau, .. } = *model else {
        return Err(Error::InvalidInput("expected the stage-structured model".into()));
    };
    let y = model.equilibrium().ok_or(Error::InvalidParameter("no positive equilibrium".into()))?;
    let r = m / tau + delta_j;
    let c = delta_a * (1.0 - a * y);
    let h = |l: Complex64| l + delta_a - c * (Complex64::new(r, 0.0) / (l + r)).powf(m);
    let dh = |l: Complex64| 1.0 + c * m / (l + r) * (Complex64::new(r, 0.0) / (l + r)).powf(m);
    newton_complex(h, dh, guess, 1.0 + c.abs())
}

fn newton_complex<F, G>(h: F, dh: G, guess: Complex64, scale: f64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64,
    G: Fn(Complex64) -> Complex64,
{
    let mut l = guess;
    for _ in 0..100 {
        let v = h(l);
        if v.norm() <= 1e-13 * scale {
            return Ok(l);
        }
        let step = v / dh(l);
        l -= step;
        if !l.re.is_finite() || !l.im.is_finite() {
            break;
        }
        if step.norm() <= 1e-15 * (1.0 + l.norm()) && h(l).norm() <= 1e-12 * scale {
            return Ok(l);
        }
    }
    Err(Error::NoConvergence("characteristic root".into()))
}

/// Interior equilibrium level `x̄ = ln(β0/μ) - μ` of the renewal model.
fn blowflies_level(beta0: f64, mu: f64) -> f64 {
    (beta0 / mu).ln() - mu
}

/// Root of `λ + μ = μ (1 - x̄) e^{-λ}`, the characteristic equation of the
/// renewal model at its nontrivial equilibrium.
pub fn blowflies_char_oracle(beta0: f64, mu: f64, guess: Complex64) -> Result<Complex64> {
    if !(mu > 0.0 && beta0 > 0.0) {
        return Err(Error::InvalidParameter("beta0 and mu must be positive".into()));
    }
    let c = mu * (1.0 - blowflies_level(beta0, mu));
    let h = |l: Complex64| l + mu - c * (-l).exp();
    let dh = |l: Complex64| 1.0 + c * (-l).exp();
    newton_complex(h, dh, guess, mu + c.abs())
}

/// Hopf point `(β0, ω)` of the renewal model: `ω + atan(ω/μ) = π` fixes the
/// crossing frequency and the modulus condition fixes `β0`.
pub fn blowflies_hopf_oracle(mu: f64) -> Result<(f64, f64)> {
    if !(mu > 0.0) {
        return Err(Error::InvalidParameter("mu must be positive".into()));
    }
    let phase = |w: f64| w + (w / mu).atan() - std::f64::consts::PI;
    let (mut a, mut b) = (0.0, std::f64::consts::PI);
    for _ in 0..200 {
        let c = 0.5 * (a + b);
        if phase(c) > 0.0 {
            b = c;
        } else {
            a = c;
        }
        if b - a <= 1e-16 * b {
            break;
        }
    }
    let w = 0.5 * (a + b);
    let level = 1.0 + (w * w + mu * mu).sqrt() / mu;
    Ok((mu * (mu + level).exp(), w))
}
