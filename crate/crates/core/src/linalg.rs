//! Dense eigenvalue problems and small complex linear solves.

use nalgebra::linalg::balancing::balance_parlett_reinsch;
use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Eigenvalues sorted by descending real part, then descending imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    /// Unit-norm eigenvectors, column `i` paired with `eigenvalues[i]`.
    pub eigenvectors: Option<DMatrix<Complex64>>,
}

impl Spectrum {
    pub fn rightmost(&self) -> Option<Complex64> {
        self.eigenvalues.first().copied()
    }

    /// Index of the eigenvalue nearest to `z`.
    pub fn nearest(&self, z: Complex64) -> Option<usize> {
        (0..self.eigenvalues.len()).min_by(|&a, &b| {
            (self.eigenvalues[a] - z)
                .norm()
                .total_cmp(&(self.eigenvalues[b] - z).norm())
        })
    }
}

pub fn sort_eigenvalues(v: &mut [Complex64]) {
    v.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
}

fn order(v: &[Complex64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[j].re.total_cmp(&v[i].re).then(v[j].im.total_cmp(&v[i].im)));
    idx
}

/// Balanced Hessenberg–QR eigenvalues of a real matrix, optionally with
/// eigenvectors from inverse iteration.
pub fn eig_dense(m: &DMatrix<f64>, vectors: bool) -> Result<Spectrum> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::InvalidInput("matrix must be square".into()));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    if n == 0 {
        return Ok(Spectrum {
            eigenvalues: vec![],
            eigenvectors: vectors.then(|| DMatrix::zeros(0, 0)),
        });
    }
    let mut b = m.clone();
    let d = balance_parlett_reinsch(&mut b);
    let schur = Schur::try_new(b.clone(), f64::EPSILON, 1000 * n.max(10))
        .ok_or_else(|| Error::NoConvergence("Schur iteration".into()))?;
    let raw: Vec<Complex64> = schur.complex_eigenvalues().iter().cloned().collect();
    let idx = order(&raw);
    let mut eigenvalues: Vec<Complex64> = idx.iter().map(|&i| raw[i]).collect();
    // exact conjugate pairing for real input
    for i in 0..n {
        if eigenvalues[i].im > 0.0 && i + 1 < n {
            let j = i + 1;
            if (eigenvalues[j] - eigenvalues[i].conj()).norm() <= 1e-10 * (1.0 + eigenvalues[i].norm()) {
                let re = 0.5 * (eigenvalues[i].re + eigenvalues[j].re);
                let im = 0.5 * (eigenvalues[i].im - eigenvalues[j].im);
                eigenvalues[i] = Complex64::new(re, im);
                eigenvalues[j] = Complex64::new(re, -im);
            }
        }
    }
    let eigenvectors = if vectors {
        let bc: DMatrix<Complex64> = b.map(|x| Complex64::new(x, 0.0));
        let norm = b.iter().fold(0.0f64, |a, x| a.max(x.abs())) * n as f64;
        let mut v = DMatrix::zeros(n, n);
        for (col, &lam) in eigenvalues.iter().enumerate() {
            let x = inverse_iteration(&bc, lam, norm.max(f64::MIN_POSITIVE));
            let mut y: DVector<Complex64> = DVector::from_fn(n, |i, _| x[i] * d[i]);
            let nrm = y.norm();
            if nrm > 0.0 {
                y /= Complex64::new(nrm, 0.0);
            }
            v.set_column(col, &y);
        }
        Some(v)
    } else {
        None
    };
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

fn inverse_iteration(b: &DMatrix<Complex64>, lam: Complex64, scale: f64) -> DVector<Complex64> {
    let n = b.nrows();
    let shift = lam + Complex64::new(scale * 1e-14, scale * 1e-14);
    let mut a = b.clone();
    for i in 0..n {
        a[(i, i)] -= shift;
    }
    let lu = a.lu();
    let mut x = DVector::from_fn(n, |i, _| Complex64::new(1.0 + 0.1 * (i as f64).sin(), 0.05 * i as f64));
    for _ in 0..3 {
        match lu.solve(&x) {
            Some(y) if y.iter().all(|z| z.re.is_finite() && z.im.is_finite()) => {
                let nrm = y.norm();
                if nrm == 0.0 {
                    break;
                }
                x = y / Complex64::new(nrm, 0.0);
            }
            _ => break,
        }
    }
    x
}

/// Solves a complex square system by partial-pivot LU.
pub fn solve_complex(a: DMatrix<Complex64>, b: &DVector<Complex64>) -> Result<DVector<Complex64>> {
    let lu = a.lu();
    let x = lu.solve(b).ok_or(Error::SingularSystem)?;
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::SingularSystem);
    }
    Ok(x)
}

/// Determinant of a complex matrix.
pub fn det_complex(a: DMatrix<Complex64>) -> Complex64 {
    a.lu().determinant()
}
