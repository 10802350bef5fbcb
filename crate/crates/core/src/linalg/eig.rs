use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{complex_schur, CMatrix};
use crate::error::{Error, Result};

/// Right eigenvectors (columns of `right`, unit 2-norm) and the matching
/// left eigenvectors (rows of `left`, scaled so that `left * right = I`).
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<Complex64>,
    pub right: CMatrix,
    pub left: CMatrix,
}

/// Full nonsymmetric eigendecomposition. Fails with `Degenerate` when the
/// eigenvector matrix is numerically singular (defective input).
pub fn eigen_decompose(a: &DMatrix<f64>) -> Result<EigenDecomposition> {
    let n = a.nrows();
    let (q, t) = complex_schur(a)?;
    let values: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let scale = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * scale;

    let mut y = CMatrix::zeros(n, n);
    for k in 0..n {
        y[(k, k)] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for j in (i + 1)..=k {
                s += t[(i, j)] * y[(j, k)];
            }
            let mut d = t[(i, i)] - t[(k, k)];
            if d.norm() < small {
                d = Complex64::new(small, 0.0);
            }
            y[(i, k)] = -s / d;
        }
    }
    let mut right = q * y;
    for mut col in right.column_iter_mut() {
        let norm = col.norm();
        col /= Complex64::new(norm, 0.0);
    }

    let lu = right.clone().lu();
    let left = lu
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("eigenvector matrix is singular".into()))?;
    let cond = right.norm() * left.norm();
    if !cond.is_finite() || cond > 1e13 {
        return Err(Error::Degenerate(format!(
            "eigenvector matrix condition {cond:.3e}; matrix is defective within tolerance"
        )));
    }
    Ok(EigenDecomposition {
        values,
        right,
        left,
    })
}
