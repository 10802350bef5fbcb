use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{ensure_hurwitz, expm, solve_lyapunov};

/// Stationary covariance of `ẋ = A x + S ξ`: the solution of
/// `A C + C Aᵀ + S Sᵀ = 0`.
pub fn lyapunov_covariance(a: &DMatrix<f64>, s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if s.nrows() != a.nrows() {
        return Err(Error::Dimension(format!(
            "noise matrix has {} rows, state matrix {}",
            s.nrows(),
            a.nrows()
        )));
    }
    ensure_hurwitz(a)?;
    solve_lyapunov(a, &(s * s.transpose()))
}

/// Stationary lag correlation `R(τ) = e^{Aτ} C`.
pub fn analytic_lag_correlation(a: &DMatrix<f64>, c: &DMatrix<f64>, tau: f64) -> Result<DMatrix<f64>> {
    if !(tau >= 0.0) {
        return Err(Error::Config(format!("lag must be non-negative, got {tau}")));
    }
    if a.shape() != c.shape() {
        return Err(Error::Dimension("A and C must have the same shape".into()));
    }
    Ok(expm(a, tau) * c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_values() {
        let a = DMatrix::from_element(1, 1, -1.0);
        let s = DMatrix::from_element(1, 1, 1.0);
        let c = lyapunov_covariance(&a, &s).unwrap();
        assert!((c[(0, 0)] - 0.5).abs() < 1e-15);
        let r = analytic_lag_correlation(&a, &c, 1.0).unwrap();
        assert!((r[(0, 0)] - 0.5 * (-1.0f64).exp()).abs() < 1e-15);
        assert!((r[(0, 0)] - 0.18394).abs() < 1e-5);
        assert_eq!(analytic_lag_correlation(&a, &c, 0.0).unwrap(), c);
    }

    #[test]
    fn diagonal_values() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -2.0]));
        let c = lyapunov_covariance(&a, &DMatrix::identity(2, 2)).unwrap();
        assert!((c[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((c[(1, 1)] - 0.25).abs() < 1e-15);
        assert!(c[(0, 1)].abs() < 1e-15);
    }

    #[test]
    fn rejects_unstable_and_negative_lag() {
        let a = DMatrix::from_element(1, 1, 0.5);
        let s = DMatrix::from_element(1, 1, 1.0);
        assert!(matches!(lyapunov_covariance(&a, &s), Err(Error::NotHurwitz { .. })));
        assert!(analytic_lag_correlation(&a, &s, -1.0).is_err());
    }
}
