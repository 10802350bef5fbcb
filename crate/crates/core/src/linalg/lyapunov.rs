//! Continuous Lyapunov equation `A X + X Aᵀ + Q = 0` by Bartels-Stewart on
//! the complex Schur form.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{complex_schur, to_complex, CMatrix};
use crate::error::{Error, Result};

/// Solve `a x + x aᵀ = -q` for symmetric `q`. Requires `λ_i + conj(λ_j) ≠ 0`
/// for every eigenvalue pair, which a Hurwitz `a` guarantees.
pub fn solve_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if !a.is_square() || q.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "Lyapunov solve needs square A and matching Q, got {:?} and {:?}",
            a.shape(),
            q.shape()
        )));
    }
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let (u, t) = complex_schur(a)?;
    let f = -(u.adjoint() * to_complex(q) * &u);
    let y = solve_sylvester_triangular(&t, &f)?;
    let x = (&u * y * u.adjoint()).map(|z| z.re);
    Ok((&x + x.transpose()) * 0.5)
}

/// Solve `t y + y t^H = f` for upper-triangular `t`.
///
/// Column `j` satisfies `(t + conj(t_jj) I) y_j = f_j - Σ_{k>j} conj(t_jk) y_k`,
/// so columns are resolved right to left with one triangular solve each.
pub fn solve_sylvester_triangular(t: &CMatrix, f: &CMatrix) -> Result<CMatrix> {
    let n = t.nrows();
    let scale = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut y = CMatrix::zeros(n, n);
    for j in (0..n).rev() {
        let shift = t[(j, j)].conj();
        let mut rhs: Vec<Complex64> = (0..n).map(|i| f[(i, j)]).collect();
        for k in (j + 1)..n {
            let c = t[(j, k)].conj();
            for (i, r) in rhs.iter_mut().enumerate() {
                *r -= c * y[(i, k)];
            }
        }
        for i in (0..n).rev() {
            let mut s = rhs[i];
            for k in (i + 1)..n {
                s -= t[(i, k)] * y[(k, j)];
            }
            let d = t[(i, i)] + shift;
            if d.norm() <= 1e-14 * scale {
                return Err(Error::Numeric(
                    "Sylvester operator is singular (eigenvalues λ_i = -conj(λ_j))".into(),
                ));
            }
            y[(i, j)] = s / d;
        }
    }
    Ok(y)
}
