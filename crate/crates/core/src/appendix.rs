//! The scalar collocation problem `y' = μy + c`, `y(0) = β` on the positive
//! half-line with Laguerre nodes: monomial recurrence, direct solve, closed
//! forms, error bounds and measured errors, and the exact spectra of reduced
//! differentiation matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::dd::{Cdd, Dd};
use crate::error::{Error, Result};
use crate::laguerre::{family_nodes, scaled_gen_laguerre_eval, laguerre_eval, laguerre_deriv_eval, NodeFamily};
use crate::linalg::{det_complex, eig_dense, solve_complex, Spectrum};
use crate::mesh::{diff_matrix_points, weighted_diff_matrix_points};
use crate::quad::GlTable;
use crate::spectra::PNorm;

/// Largest `N` accepted by the monomial recurrence.
pub const MAX_RECURRENCE_N: usize = 30;

fn factorial_dd(n: usize) -> Dd {
    (1..=n).fold(Dd::new(1.0), |acc, k| acc * k as f64)
}

fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64).round()
}

/// `b_j` such that `q_N(t) = Σ b_j t^j / j!` is the monic node polynomial.
fn node_poly_coeffs(n: usize, family: NodeFamily) -> Vec<Dd> {
    let nf = factorial_dd(n);
    (0..=n)
        .map(|j| {
            let sign = if (n + j).is_multiple_of(2) { 1.0 } else { -1.0 };
            let b = match family {
                NodeFamily::LaguerreZeros => binom(n, j),
                NodeFamily::LaguerreExtrema => binom(n + 1, j + 1),
            };
            nf * (sign * b)
        })
        .collect()
}

fn check_half_plane(mu: Complex64) -> Result<()> {
    if !(mu.re < 0.5) {
        return Err(Error::HalfPlaneViolation);
    }
    Ok(())
}

/// Collocation polynomial built by the monomial recurrence.
#[derive(Debug, Clone)]
pub struct CollocationSolution {
    pub mu: Complex64,
    pub beta: Complex64,
    pub c: Complex64,
    pub n: usize,
    pub family: NodeFamily,
    /// `a_0..a_{N-1}`, monomial coefficients of `p_N'`.
    pub coeffs: Vec<Complex64>,
    pub k_n: Complex64,
    pub d_n: Complex64,
    /// Positive collocation points.
    pub nodes: Vec<f64>,
    /// `j! a_j` for `j = 0..=N`, the last one being the closure residual.
    scaled: Vec<Cdd>,
    k_n_dd: Cdd,
}

impl CollocationSolution {
    /// `p_N(t)`, evaluated by Horner's rule in double-double arithmetic.
    pub fn eval(&self, t: f64) -> Complex64 {
        let tt = Dd::new(t);
        let mut acc = Cdd::default();
        for j in (1..=self.n).rev() {
            let coef = self.scaled[j - 1].scale(factorial_dd(j).recip());
            acc = (acc + coef).scale(tt);
        }
        (acc + Cdd::from(self.beta)).to_c64()
    }

    /// `p_N'(t)`.
    pub fn eval_deriv(&self, t: f64) -> Complex64 {
        let tt = Dd::new(t);
        let mut acc = Cdd::default();
        for j in (0..self.n).rev() {
            acc = acc.scale(tt) + self.scaled[j].scale(factorial_dd(j).recip());
        }
        acc.to_c64()
    }

    /// `p_N` at `{0} ∪ nodes`.
    pub fn values(&self) -> Vec<Complex64> {
        std::iter::once(0.0).chain(self.nodes.iter().cloned()).map(|t| self.eval(t)).collect()
    }

    /// `|a_N|`, which the closure condition sets to zero.
    pub fn closure_residual(&self) -> f64 {
        self.scaled[self.n].scale(factorial_dd(self.n).recip()).to_c64().norm()
    }

    /// Largest `|p_N' - μ p_N - c|` over the collocation points.
    pub fn collocation_residual(&self) -> f64 {
        self.nodes
            .iter()
            .map(|&t| (self.eval_deriv(t) - self.mu * self.eval(t) - self.c).norm())
            .fold(0.0, f64::max)
    }

    /// `k_N q_N(t)` from the recurrence constant and the monic node polynomial.
    pub fn kq(&self, t: f64) -> Complex64 {
        let b = node_poly_coeffs(self.n, self.family);
        let tt = Dd::new(t);
        let mut acc = Dd::new(0.0);
        for j in (0..=self.n).rev() {
            acc = acc * tt + b[j] / factorial_dd(j);
        }
        (self.k_n_dd.scale(acc)).to_c64()
    }
}

/// Recurrence solution: `A_j = j! a_j` satisfies `A_0 = μβ + c + k_N b_0`,
/// `A_j = μ A_{j-1} + k_N b_j`, and `k_N` is fixed by `A_N = 0`.
pub fn colloc_recurrence(mu: Complex64, beta: Complex64, c: Complex64, n: usize, family: NodeFamily) -> Result<CollocationSolution> {
    check_half_plane(mu)?;
    if n == 0 || n > MAX_RECURRENCE_N {
        return Err(Error::InvalidParameter(format!("recurrence needs 1 <= N <= {MAX_RECURRENCE_N}")));
    }
    let nodes = family_nodes(family, n)?;
    let b = node_poly_coeffs(n, family);
    let m = Cdd::from(mu);
    let f0 = m * Cdd::from(beta) + Cdd::from(c);
    // S_j = d_j j!
    let mut s = Cdd::default();
    let mut mu_pow = Cdd::real(Dd::new(1.0));
    for bj in &b {
        s = m * s + Cdd::real(*bj);
    }
    for _ in 0..n {
        mu_pow = mu_pow * m;
    }
    let k_n = -(mu_pow * f0) / s;
    let mut scaled = Vec::with_capacity(n + 1);
    let mut a = f0 + k_n.scale(b[0]);
    scaled.push(a);
    for bj in b.iter().skip(1) {
        a = m * a + k_n.scale(*bj);
        scaled.push(a);
    }
    let nf = factorial_dd(n);
    let coeffs = (0..n).map(|j| scaled[j].scale(factorial_dd(j).recip()).to_c64()).collect();
    Ok(CollocationSolution {
        mu,
        beta,
        c,
        n,
        family,
        coeffs,
        k_n: k_n.to_c64(),
        d_n: s.scale(nf.recip()).to_c64(),
        nodes,
        scaled,
        k_n_dd: k_n,
    })
}

/// Direct dense solve on `{0} ∪ nodes`.
#[derive(Debug, Clone)]
pub struct DirectSolution {
    /// `0` followed by the collocation points.
    pub points: Vec<f64>,
    pub values: Vec<Complex64>,
    /// 1-norm condition number of the system matrix.
    pub condition: f64,
}

/// Solves the collocation system with the differentiation matrix, in the
/// variables `e^{-t/2} p_N(t)` to keep it well scaled.
pub fn colloc_direct(mu: Complex64, beta: Complex64, c: Complex64, n: usize, family: NodeFamily) -> Result<DirectSolution> {
    let mut points = vec![0.0];
    points.extend(family_nodes(family, n)?);
    let d = weighted_diff_matrix_points(&points, -0.5)?;
    let m = n + 1;
    let mut a = DMatrix::<Complex64>::zeros(m, m);
    let mut rhs = DVector::<Complex64>::zeros(m);
    a[(0, 0)] = Complex64::new(1.0, 0.0);
    rhs[0] = beta;
    for j in 1..m {
        for k in 0..m {
            a[(j, k)] = Complex64::new(d[(j, k)], 0.0);
        }
        a[(j, j)] -= mu;
        rhs[j] = c * (-0.5 * points[j]).exp();
    }
    let norm1 = |x: &DMatrix<Complex64>| (0..x.ncols()).map(|k| x.column(k).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let inv = a.clone().try_inverse().ok_or(Error::SingularSystem)?;
    let condition = norm1(&a) * norm1(&inv);
    let x = solve_complex(a, &rhs)?;
    let values = x.iter().zip(&points).map(|(v, t)| v * (0.5 * t).exp()).collect();
    Ok(DirectSolution {
        points,
        values,
        condition,
    })
}

/// `C(μ) = μ/(μ - 1)`.
pub fn c_of_mu(mu: Complex64) -> Complex64 {
    mu / (mu - 1.0)
}

/// Extrema-family rate `C^N / (1 - C^{N+1})`.
pub fn extrema_rate(mu: Complex64, n: usize) -> Complex64 {
    let cm = c_of_mu(mu);
    let cn = cm.powu(n as u32);
    cn / (Complex64::new(1.0, 0.0) - cn * cm)
}

/// `d_N(μ)`: `(1-μ)^N` for zeros, `(-1)^{N+1}((μ-1)^{N+1} - μ^{N+1})` for extrema.
pub fn closed_form_dn(mu: Complex64, n: usize, family: NodeFamily) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    match family {
        NodeFamily::LaguerreZeros => (one - mu).powu(n as u32),
        NodeFamily::LaguerreExtrema => {
            let s = if (n + 1).is_multiple_of(2) { 1.0 } else { -1.0 };
            ((mu - one).powu(n as u32 + 1) - mu.powu(n as u32 + 1)) * s
        }
    }
}

/// Closed form of `k_N q_N(t)`: `-C^N L_N(t)(μβ+c)` for zeros and
/// `-D_N L'_{N+1}(t)(μβ+c)/(μ-1)` for extrema, with `D_N` the extrema rate.
/// The extrema sign is the one implied by the closure condition `a_N = 0`.
pub fn closed_form_kq(mu: Complex64, beta: Complex64, c: Complex64, n: usize, family: NodeFamily, t: f64) -> Complex64 {
    let f0 = mu * beta + c;
    match family {
        NodeFamily::LaguerreZeros => -c_of_mu(mu).powu(n as u32) * laguerre_eval(n, t) * f0,
        NodeFamily::LaguerreExtrema => -extrema_rate(mu, n) * laguerre_deriv_eval(n + 1, t) * f0 / (mu - 1.0),
    }
}

/// `K^p_δ`: one for the sup norm, `(pδ)^{-1/p}` otherwise.
pub fn k_p_delta(p: PNorm, delta: f64) -> Result<f64> {
    match p {
        PNorm::Inf if delta >= 0.0 => Ok(1.0),
        PNorm::Finite(pp) if pp >= 1.0 && delta > 0.0 => Ok((pp * delta).powf(-1.0 / pp)),
        _ => Err(Error::InvalidDelta),
    }
}

/// A priori bound on `‖w_δ (p_N - y)‖_p`, with `w_δ(t) = e^{-(1/2+δ)t}`.
pub fn error_bound(mu: Complex64, beta: Complex64, c: Complex64, n: usize, family: NodeFamily, p: PNorm, delta: f64) -> Result<f64> {
    check_half_plane(mu)?;
    let k = k_p_delta(p, delta)?;
    let data = mu.norm() * beta.norm() + c.norm();
    let gap = 0.5 - mu.re;
    Ok(match family {
        NodeFamily::LaguerreZeros => c_of_mu(mu).norm().powi(n as i32) * data * k / gap,
        NodeFamily::LaguerreExtrema => extrema_rate(mu, n).norm() * data * k / (mu - 1.0).norm() * (2.0 + mu.norm() / gap),
    })
}

/// Measured weighted error with a certified truncation of the half-line.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeasuredError {
    pub value: f64,
    /// Upper bound on what the truncated tail could add.
    pub tail: f64,
    /// Truncation point.
    pub horizon: f64,
}

/// `‖ê_N‖_p` with `ê_N(t) = k_N w_δ(t) ∫_0^t e^{μ(t-s)} q_N(s) ds`. The
/// convolution is propagated step by step as the solution of
/// `v' = (μ - 1/2) v + k_N e^{-t/2} q_N(t)`, with `q_N` from the stable
/// Laguerre recurrence.
pub fn measured_error(sol: &CollocationSolution, p: PNorm, delta: f64) -> Result<MeasuredError> {
    match p {
        PNorm::Finite(_) if delta <= 0.0 => return Err(Error::TailNotNegligible),
        PNorm::Inf if delta < 0.0 => return Err(Error::InvalidDelta),
        PNorm::Finite(pp) if pp < 1.0 => return Err(Error::InvalidDelta),
        _ => {}
    }
    let n = sol.n;
    let alpha = match sol.family {
        NodeFamily::LaguerreZeros => 0.0,
        NodeFamily::LaguerreExtrema => 1.0,
    };
    // q_N = (-1)^N N! L_N^{(α)}
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let kappa = sol.k_n_dd.scale(factorial_dd(n) * sign).to_c64();
    if kappa == Complex64::new(0.0, 0.0) {
        return Ok(MeasuredError { value: 0.0, tail: 0.0, horizon: 0.0 });
    }
    let bound = error_bound(sol.mu, sol.beta, sol.c, n, sol.family, p, delta)?;
    let rate = sol.mu - 0.5;
    let gap = -rate.re;
    let forcing = |s: f64| kappa * scaled_gen_laguerre_eval(n, alpha, s);
    // e^{-s/2} Σ_j C(N+α, N-j) s^j/j! majorizes |e^{-s/2} L_N^{(α)}(s)| and decreases for s >= 2N
    let envelope = |s: f64| {
        let mut term = 1.0;
        let mut sum = 0.0;
        for j in 0..=n {
            if j > 0 {
                term *= s / j as f64;
            }
            sum += binom(n + alpha as usize, n - j) * term;
        }
        sum * (-0.5 * s).exp()
    };
    let gl = GlTable::new(10);
    let h = 0.05;
    let mut t = 0.0;
    let mut v = Complex64::new(0.0, 0.0);
    let mut sup: f64 = 0.0;
    let mut acc_p = 0.0;
    let mut horizon = 2.0 * n as f64 + 40.0;
    // v(t0 + x) from v(t0)
    let advance = |v0: Complex64, t0: f64, x: f64| -> Complex64 {
        let conv = gl.integrate(t0, t0 + x, |s| (rate * (t0 + x - s)).exp() * forcing(s));
        (rate * x).exp() * v0 + conv
    };
    loop {
        while t < horizon - 1e-12 {
            let hm = 0.5 * h;
            let mid = t + hm;
            for (xi, wi) in gl.nodes.iter().zip(&gl.weights) {
                let s = mid + hm * xi;
                let e = (-delta * s).exp() * advance(v, t, s - t).norm();
                sup = sup.max(e);
                if let PNorm::Finite(pp) = p {
                    acc_p += wi * hm * e.powf(pp);
                }
            }
            v = advance(v, t, h);
            t += h;
            sup = sup.max((-delta * t).exp() * v.norm());
        }
        let envelope_sup = (-delta * t).exp() * (v.norm() + kappa.norm() * envelope(t) / gap);
        let (value, tail) = match p {
            PNorm::Inf => (sup, if envelope_sup <= sup { 0.0 } else { envelope_sup }),
            PNorm::Finite(pp) => {
                let mass = (v.norm() + kappa.norm() * envelope(t) / gap).powf(pp) * (-pp * delta * t).exp() / (pp * delta);
                (acc_p.powf(1.0 / pp), mass.powf(1.0 / pp))
            }
        };
        if tail <= 1e-3 * value.max(bound) || tail == 0.0 {
            return Ok(MeasuredError { value, tail, horizon: t });
        }
        if horizon > 1e5 {
            return Err(Error::TailNotNegligible);
        }
        horizon *= 2.0;
    }
}

/// Spectrum of the differentiation matrix on `{0} ∪ nodes` (unscaled
/// positive variable) with the boundary row and column removed.
#[derive(Debug, Clone)]
pub struct ReducedDiffSpectrum {
    pub family: NodeFamily,
    pub n: usize,
    /// Exact eigenvalues: `1` repeated for zeros, `1/(1 - e^{2πik/(N+1)})` for extrema.
    pub predicted: Vec<Complex64>,
    pub computed: Spectrum,
    /// `(μ, det(μI - D_red), monic closed form)` at fixed sample points.
    pub charpoly_samples: Vec<(Complex64, Complex64, Complex64)>,
    pub trace: f64,
    pub det: f64,
}

pub const CHARPOLY_SAMPLES: [(f64, f64); 5] = [(0.0, 0.0), (2.0, 0.0), (-1.0, 0.5), (0.5, 1.5), (3.0, -1.0)];

pub fn reduced_diff_matrix(n: usize, family: NodeFamily) -> Result<DMatrix<f64>> {
    let mut points = vec![0.0];
    points.extend(family_nodes(family, n)?);
    let d = diff_matrix_points(&points)?;
    Ok(d.view((1, 1), (n, n)).into_owned())
}

pub fn predicted_reduced_spectrum(n: usize, family: NodeFamily) -> Vec<Complex64> {
    match family {
        NodeFamily::LaguerreZeros => vec![Complex64::new(1.0, 0.0); n],
        NodeFamily::LaguerreExtrema => (1..=n)
            .map(|k| {
                let z = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / (n + 1) as f64);
                1.0 / (1.0 - z)
            })
            .collect(),
    }
}

/// Monic form of `d_N`: `(μ-1)^N` for zeros and `(μ^{N+1} - (μ-1)^{N+1})/(N+1)` for extrema.
pub fn monic_charpoly(mu: Complex64, n: usize, family: NodeFamily) -> Complex64 {
    match family {
        NodeFamily::LaguerreZeros => (mu - 1.0).powu(n as u32),
        NodeFamily::LaguerreExtrema => (mu.powu(n as u32 + 1) - (mu - 1.0).powu(n as u32 + 1)) / (n + 1) as f64,
    }
}

pub fn reduced_diffmat_spectrum(n: usize, family: NodeFamily) -> Result<ReducedDiffSpectrum> {
    let d = reduced_diff_matrix(n, family)?;
    let computed = eig_dense(&d, false)?;
    let dc = d.map(|x| Complex64::new(x, 0.0));
    let charpoly_samples = CHARPOLY_SAMPLES
        .iter()
        .map(|&(re, im)| {
            let mu = Complex64::new(re, im);
            let mut m = -dc.clone();
            for i in 0..n {
                m[(i, i)] += mu;
            }
            (mu, det_complex(m), monic_charpoly(mu, n, family))
        })
        .collect();
    Ok(ReducedDiffSpectrum {
        family,
        n,
        predicted: predicted_reduced_spectrum(n, family),
        computed,
        charpoly_samples,
        trace: d.trace(),
        det: d.clone().lu().determinant(),
    })
}

/// Largest distance from a computed eigenvalue set to a predicted one, after
/// greedy nearest pairing.
pub fn set_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for z in a {
        let best = (0..b.len())
            .filter(|&k| !used[k])
            .min_by(|&i, &j| (b[i] - z).norm().total_cmp(&(b[j] - z).norm()));
        match best {
            Some(k) => {
                used[k] = true;
                worst = worst.max((b[k] - z).norm());
            }
            None => return f64::INFINITY,
        }
    }
    worst
}

/// Recurrence against direct solve for one problem.
#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceRow {
    pub mu: Complex64,
    pub beta: Complex64,
    pub c: Complex64,
    pub n: usize,
    pub family: NodeFamily,
    /// `max e^{-t/2}|p_rec - p_dir| / max e^{-t/2}|p_dir|` over `{0} ∪ nodes`.
    pub weighted_residual: f64,
    /// Same without the weight; dominated by `e^{t/2}` times rounding at the
    /// far nodes.
    pub plain_residual: f64,
    pub condition: f64,
}

pub fn equivalence_check(mu: Complex64, beta: Complex64, c: Complex64, n: usize, family: NodeFamily) -> Result<EquivalenceRow> {
    let rec = colloc_recurrence(mu, beta, c, n, family)?;
    let dir = colloc_direct(mu, beta, c, n, family)?;
    let rv = rec.values();
    let mut num_w: f64 = 0.0;
    let mut den_w: f64 = 0.0;
    let mut num_p: f64 = 0.0;
    let mut den_p: f64 = 0.0;
    for ((a, b), &t) in rv.iter().zip(&dir.values).zip(&dir.points) {
        let w = (-0.5 * t).exp();
        num_w = num_w.max(w * (a - b).norm());
        den_w = den_w.max(w * b.norm());
        num_p = num_p.max((a - b).norm());
        den_p = den_p.max(b.norm());
    }
    let ratio = |n: f64, d: f64| if d > 0.0 { n / d } else { n };
    Ok(EquivalenceRow {
        mu,
        beta,
        c,
        n,
        family,
        weighted_residual: ratio(num_w, den_w),
        plain_residual: ratio(num_p, den_p),
        condition: dir.condition,
    })
}

/// Largest `N` drawn by [`equivalence_sweep`].
pub const SWEEP_MAX_N: usize = 15;

/// Seeded random problems with `Re μ ∈ [-1, 0.4]`, `Im μ ∈ [-1, 1]`, `β` and
/// `c` in the unit box, `1 ≤ N ≤ 15`, alternating families.
pub fn equivalence_sweep(seed: u64, count: usize) -> Vec<Result<EquivalenceRow>> {
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    let mut rng = StdRng::seed_from_u64(seed);
    let mut cases = Vec::with_capacity(count);
    for i in 0..count {
        let mu = Complex64::new(rng.random_range(-1.0..=0.4), rng.random_range(-1.0..=1.0));
        let beta = Complex64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
        let c = Complex64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
        let n = rng.random_range(1..=SWEEP_MAX_N);
        let family = if i % 2 == 0 { NodeFamily::LaguerreZeros } else { NodeFamily::LaguerreExtrema };
        cases.push((mu, beta, c, n, family));
    }
    cases.into_iter().map(|(mu, beta, c, n, f)| equivalence_check(mu, beta, c, n, f)).collect()
}

/// Measured error against the a priori bound for one `N`.
#[derive(Debug, Clone, Serialize)]
pub struct BoundRow {
    pub mu: Complex64,
    pub family: NodeFamily,
    pub n: usize,
    pub measured: f64,
    pub tail: f64,
    pub bound: f64,
    /// `ln |C(μ)|`, the predicted slope of `ln error` for the zeros family.
    pub log_rate: f64,
}

/// Error study for `β = 1`, `c = 0` in the sup norm with `δ = 0`.
pub fn bound_check(mu: Complex64, n: usize, family: NodeFamily) -> Result<BoundRow> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let sol = colloc_recurrence(mu, one, zero, n, family)?;
    let m = measured_error(&sol, PNorm::Inf, 0.0)?;
    let bound = error_bound(mu, one, zero, n, family, PNorm::Inf, 0.0)?;
    Ok(BoundRow {
        mu,
        family,
        n,
        measured: m.value + m.tail,
        tail: m.tail,
        bound,
        log_rate: c_of_mu(mu).norm().ln(),
    })
}
