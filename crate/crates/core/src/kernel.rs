//! Integral kernels on the half-line and their Laplace transforms.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quad::integrate_to_infinity;

/// Pointwise evaluator for [`KernelSpec::Custom`].
pub type KernelFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum KernelSpec {
    /// `k0 e^{-μs}`.
    Exponential { k0: f64, mu: f64 },
    /// Gamma density `μ^σ s^{σ-1} e^{-μs} / Γ(σ)`.
    Gamma { mu: f64, sigma: f64 },
    /// `k0 e^{-μs} (sin(as) + 1)`.
    SinModulated { k0: f64, mu: f64, a: f64 },
    /// `inner(s)` for `s ≥ shift`, zero before.
    Shifted { inner: Box<KernelSpec>, shift: f64 },
    /// `factor · inner(s) · e^{-rate s}`.
    Damped { inner: Box<KernelSpec>, factor: f64, rate: f64 },
    /// Arbitrary kernel with `|k(s)| e^{decay s}` bounded.
    Custom { f: KernelFn, decay: f64 },
    /// The zero kernel.
    Zero,
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Exponential { k0, mu } => write!(f, "Exponential(k0={k0}, mu={mu})"),
            KernelSpec::Gamma { mu, sigma } => write!(f, "Gamma(mu={mu}, sigma={sigma})"),
            KernelSpec::SinModulated { k0, mu, a } => write!(f, "SinModulated(k0={k0}, mu={mu}, a={a})"),
            KernelSpec::Shifted { inner, shift } => write!(f, "Shifted({inner:?}, shift={shift})"),
            KernelSpec::Damped { inner, factor, rate } => write!(f, "Damped({inner:?}, factor={factor}, rate={rate})"),
            KernelSpec::Custom { decay, .. } => write!(f, "Custom(decay={decay})"),
            KernelSpec::Zero => write!(f, "Zero"),
        }
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        match self {
            KernelSpec::Exponential { mu, .. } if !(*mu > 0.0) => bad("exponential rate must be positive"),
            KernelSpec::Gamma { mu, sigma } if !(*mu > 0.0 && *sigma > 0.0) => bad("gamma rate and shape must be positive"),
            KernelSpec::SinModulated { mu, .. } if !(*mu > 0.0) => bad("rate must be positive"),
            KernelSpec::Shifted { shift, .. } if !(*shift >= 0.0) => bad("shift must be nonnegative"),
            KernelSpec::Shifted { inner, .. } => inner.validate(),
            KernelSpec::Damped { rate, .. } if !(*rate >= 0.0) => bad("damping rate must be nonnegative"),
            KernelSpec::Damped { inner, .. } => inner.validate(),
            KernelSpec::Custom { decay, .. } if !(*decay > 0.0) => bad("custom decay must be positive"),
            _ => Ok(()),
        }
    }

    /// Decay rate `ρ*` with `|k(s)| e^{ρ* s}` bounded.
    pub fn decay(&self) -> f64 {
        match self {
            KernelSpec::Exponential { mu, .. } | KernelSpec::Gamma { mu, .. } | KernelSpec::SinModulated { mu, .. } => *mu,
            KernelSpec::Shifted { inner, .. } => inner.decay(),
            KernelSpec::Damped { inner, rate, .. } => inner.decay() + rate,
            KernelSpec::Custom { decay, .. } => *decay,
            KernelSpec::Zero => f64::INFINITY,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            KernelSpec::Zero => true,
            KernelSpec::Exponential { k0, .. } | KernelSpec::SinModulated { k0, .. } => *k0 == 0.0,
            KernelSpec::Shifted { inner, .. } => inner.is_zero(),
            KernelSpec::Damped { inner, factor, .. } => *factor == 0.0 || inner.is_zero(),
            _ => false,
        }
    }

    /// Pointwise value; `+∞` at the origin for gamma shapes below one.
    pub fn value(&self, s: f64) -> f64 {
        let (l, sg) = self.log_abs(s);
        sg * l.exp()
    }

    /// `(ln|k(s)|, sign k(s))`, with `ln 0 = -∞`.
    pub fn log_abs(&self, s: f64) -> (f64, f64) {
        match self {
            KernelSpec::Exponential { k0, mu } => (k0.abs().ln() - mu * s, k0.signum()),
            KernelSpec::Gamma { mu, sigma } => {
                if s == 0.0 {
                    return if *sigma < 1.0 {
                        (f64::INFINITY, 1.0)
                    } else if *sigma == 1.0 {
                        (mu.ln(), 1.0)
                    } else {
                        (f64::NEG_INFINITY, 1.0)
                    };
                }
                (sigma * mu.ln() + (sigma - 1.0) * s.ln() - mu * s - ln_gamma(*sigma), 1.0)
            }
            KernelSpec::SinModulated { k0, mu, a } => {
                (k0.abs().ln() - mu * s + ((a * s).sin() + 1.0).ln(), k0.signum())
            }
            KernelSpec::Shifted { inner, shift } => {
                if s < *shift {
                    (f64::NEG_INFINITY, 1.0)
                } else {
                    inner.log_abs(s)
                }
            }
            KernelSpec::Damped { inner, factor, rate } => {
                let (l, sg) = inner.log_abs(s);
                (l + factor.abs().ln() - rate * s, sg * factor.signum())
            }
            KernelSpec::Custom { f, .. } => {
                let v = f(s);
                (v.abs().ln(), if v < 0.0 { -1.0 } else { 1.0 })
            }
            KernelSpec::Zero => (f64::NEG_INFINITY, 1.0),
        }
    }

    fn check_strip(&self, lambda: Complex64) -> Result<()> {
        let bound = -self.decay();
        if lambda.re <= bound {
            return Err(Error::OutOfStrip { re: lambda.re, bound });
        }
        Ok(())
    }

    /// Laplace transform `k̂(λ) = ∫_0^∞ k(s) e^{-λs} ds`.
    pub fn laplace(&self, lambda: Complex64) -> Result<Complex64> {
        self.check_strip(lambda)?;
        Ok(match self {
            KernelSpec::Exponential { k0, mu } => c(*k0) / (lambda + mu),
            KernelSpec::Gamma { mu, sigma } => (c(*mu) / (lambda + mu)).powf(*sigma),
            KernelSpec::SinModulated { k0, mu, a } => {
                let n = lambda + mu;
                (c(*a) / (n * n + a * a) + n.inv()) * k0
            }
            KernelSpec::Shifted { inner, shift } => match inner.as_ref() {
                KernelSpec::Exponential { k0, mu } => {
                    let n = lambda + mu;
                    (-n * shift).exp() * k0 / n
                }
                KernelSpec::SinModulated { k0, mu, a } => {
                    let n = lambda + mu;
                    let (sn, cs) = (a * shift).sin_cos();
                    (-n * shift).exp() * ((n * sn + a * cs) / (n * n + a * a) + n.inv()) * k0
                }
                KernelSpec::Zero => c(0.0),
                _ => self.numeric_laplace(lambda, 0)?,
            },
            KernelSpec::Damped { inner, factor, rate } => inner.laplace(lambda + rate)? * factor,
            KernelSpec::Custom { .. } => self.numeric_laplace(lambda, 0)?,
            KernelSpec::Zero => c(0.0),
        })
    }

    /// `k̂'(λ) = -∫_0^∞ s k(s) e^{-λs} ds`.
    pub fn laplace_deriv(&self, lambda: Complex64) -> Result<Complex64> {
        self.check_strip(lambda)?;
        Ok(match self {
            KernelSpec::Exponential { k0, mu } => {
                let n = lambda + mu;
                -c(*k0) / (n * n)
            }
            KernelSpec::Gamma { mu, sigma } => {
                let n = lambda + mu;
                -(c(*mu) / n).powf(*sigma) * sigma / n
            }
            KernelSpec::SinModulated { k0, mu, a } => {
                let n = lambda + mu;
                let q = n * n + a * a;
                (-n * 2.0 * a / (q * q) - (n * n).inv()) * k0
            }
            KernelSpec::Shifted { inner, shift } => match inner.as_ref() {
                KernelSpec::Exponential { k0, mu } => {
                    let n = lambda + mu;
                    -(-n * shift).exp() * k0 * (n.inv() * shift + (n * n).inv())
                }
                KernelSpec::Zero => c(0.0),
                _ => self.numeric_laplace(lambda, 1)?,
            },
            KernelSpec::Damped { inner, factor, rate } => inner.laplace_deriv(lambda + rate)? * factor,
            KernelSpec::Custom { .. } => self.numeric_laplace(lambda, 1)?,
            KernelSpec::Zero => c(0.0),
        })
    }

    /// `∫_0^∞ (-s)^moment k(s) e^{-λs} ds` by adaptive quadrature.
    pub fn numeric_laplace(&self, lambda: Complex64, moment: i32) -> Result<Complex64> {
        let start = match self {
            KernelSpec::Shifted { shift, .. } => *shift,
            _ => 0.0,
        };
        let r = integrate_to_infinity(
            |s| {
                let v = self.value(s);
                if v == 0.0 || !v.is_finite() {
                    return c(0.0);
                }
                (-lambda * s).exp() * v * (-s).powi(moment)
            },
            start,
            1e-15,
            1e-13,
        );
        if !r.value.re.is_finite() || !r.value.im.is_finite() {
            return Err(Error::NoConvergence("numeric Laplace transform".into()));
        }
        Ok(r.value)
    }
}

/// Checked pointwise evaluation: a singular gamma density at the origin is reported, not returned.
pub fn kernel_eval(k: &KernelSpec, s: f64) -> Result<f64> {
    if s < 0.0 {
        return Err(Error::InvalidInput(format!("kernel argument must be nonnegative, got {s}")));
    }
    let v = k.value(s);
    if v.is_infinite() {
        return Err(Error::IntegrableSingularity);
    }
    Ok(v)
}

pub fn kernel_laplace(k: &KernelSpec, lambda: Complex64) -> Result<Complex64> {
    k.laplace(lambda)
}
