//! Dense numerical kernels shared by the model, simulator, estimator and
//! modal analysis: complex Schur form, the principal matrix logarithm,
//! continuous Lyapunov solves and nonsymmetric eigendecomposition.

mod eig;
mod logm;
mod lyapunov;

pub use eig::{eigen_decompose, EigenDecomposition};
pub use logm::{gauss_legendre_unit, logm, MatrixLog, BRANCH_TOLERANCE};
pub use lyapunov::{solve_lyapunov, solve_sylvester_triangular};

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub fn to_complex(a: &DMatrix<f64>) -> CMatrix {
    a.map(|x| Complex64::new(x, 0.0))
}

/// Complex Schur form `a = q * t * q^H` with `t` upper triangular.
pub fn complex_schur(a: &DMatrix<f64>) -> Result<(CMatrix, CMatrix)> {
    complex_schur_c(to_complex(a))
}

pub fn complex_schur_c(a: CMatrix) -> Result<(CMatrix, CMatrix)> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "Schur form needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok((CMatrix::zeros(0, 0), CMatrix::zeros(0, 0)));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric("non-finite matrix entry".into()));
    }
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let schur = Schur::try_new(a, f64::EPSILON, 100 * n.max(10))
        .ok_or_else(|| Error::Numeric("Schur iteration did not converge".into()))?;
    let (q, mut t) = schur.unpack();
    for j in 0..n {
        for i in (j + 1)..n {
            if t[(i, j)].norm() > 1e-10 * scale {
                return Err(Error::Numeric(format!(
                    "Schur factor not triangular at ({i}, {j})"
                )));
            }
            t[(i, j)] = Complex64::new(0.0, 0.0);
        }
    }
    Ok((q, t))
}

/// Largest real part over the spectrum of `a`.
pub fn spectral_abscissa(a: &DMatrix<f64>) -> Result<f64> {
    if a.nrows() == 0 {
        return Ok(f64::NEG_INFINITY);
    }
    let (_, t) = complex_schur(a)?;
    Ok((0..t.nrows()).map(|i| t[(i, i)].re).fold(f64::NEG_INFINITY, f64::max))
}

pub fn ensure_hurwitz(a: &DMatrix<f64>) -> Result<()> {
    let max_real = spectral_abscissa(a)?;
    if max_real < 0.0 {
        Ok(())
    } else {
        Err(Error::NotHurwitz { max_real })
    }
}

/// Matrix exponential `e^{a * t}`.
pub fn expm(a: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    if a.nrows() == 0 {
        return DMatrix::zeros(0, 0);
    }
    (a * t).exp()
}

/// Solve `u x = b` for upper-triangular complex `u` (matrix right-hand side).
pub(crate) fn solve_upper(u: &CMatrix, b: &CMatrix) -> CMatrix {
    let n = u.nrows();
    let mut x = b.clone();
    for col in 0..b.ncols() {
        for i in (0..n).rev() {
            let mut s = x[(i, col)];
            for k in (i + 1)..n {
                s -= u[(i, k)] * x[(k, col)];
            }
            x[(i, col)] = s / u[(i, i)];
        }
    }
    x
}

pub fn frobenius(a: &DMatrix<f64>) -> f64 {
    a.norm()
}

pub fn inf_norm(a: &DMatrix<f64>) -> f64 {
    a.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// 2-norm condition number from singular values.
pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return 1.0;
    }
    let sv = a.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}
