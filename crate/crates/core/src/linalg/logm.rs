//! Principal matrix logarithm by inverse scaling and squaring on the
//! triangular factor of a complex Schur form.
//!
//! After `s` triangular square roots bring `T^(1/2^s)` within a unit-ball
//! neighbourhood of the identity, `log(I + X)` is evaluated with the
//! `[m/m]` Padé approximant in partial-fraction form, which coincides with
//! `m`-point Gauss-Legendre quadrature of `∫₀¹ X (I + tX)⁻¹ dt`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{complex_schur, solve_upper, CMatrix};
use crate::error::{Error, Result};

/// Angular distance from the negative real axis below which the principal
/// logarithm is treated as undefined.
pub const BRANCH_TOLERANCE: f64 = 1e-8;

const PADE_DEGREE: usize = 8;
const MAX_SQRT: usize = 64;
// Padé degree 8 is accurate to roughly unit roundoff for ||X||_1 <= 0.34.
const THETA: f64 = 0.25;

#[derive(Debug, Clone)]
pub struct MatrixLog {
    /// The complex logarithm; its imaginary part vanishes for real input
    /// whose negative-real eigenvalues are absent.
    pub log: CMatrix,
    pub eigenvalues: Vec<Complex64>,
    pub square_roots: usize,
}

impl MatrixLog {
    pub fn real_part(&self) -> DMatrix<f64> {
        self.log.map(|z| z.re)
    }

    /// `||Im L||_F / ||L||_F`.
    pub fn imaginary_residual(&self) -> f64 {
        let total = self.log.norm();
        if total == 0.0 {
            return 0.0;
        }
        self.log.map(|z| z.im).norm() / total
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

pub fn logm(a: &DMatrix<f64>) -> Result<MatrixLog> {
    let n = a.nrows();
    let (q, t) = complex_schur(a)?;
    let eigenvalues: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    for &lambda in &eigenvalues {
        if lambda.norm() == 0.0 || std::f64::consts::PI - lambda.arg().abs() < BRANCH_TOLERANCE {
            return Err(Error::LogBranch { eigenvalue: lambda });
        }
    }
    let (log_t, square_roots) = log_upper_triangular(t)?;
    let log = &q * log_t * q.adjoint();
    Ok(MatrixLog {
        log,
        eigenvalues,
        square_roots,
    })
}

fn log_upper_triangular(mut t: CMatrix) -> Result<(CMatrix, usize)> {
    let n = t.nrows();
    let identity = CMatrix::identity(n, n);
    let mut s = 0;
    loop {
        let x = &t - &identity;
        if one_norm(&x) <= THETA {
            break;
        }
        if s == MAX_SQRT {
            return Err(Error::Numeric(
                "matrix logarithm: square-root phase did not reach the Padé region".into(),
            ));
        }
        t = sqrt_upper_triangular(&t);
        s += 1;
    }
    let x = &t - &identity;
    let (nodes, weights) = gauss_legendre_unit(PADE_DEGREE);
    let mut acc = CMatrix::zeros(n, n);
    for (node, weight) in nodes.iter().zip(&weights) {
        let lhs = &identity + &x * Complex64::new(*node, 0.0);
        acc += solve_upper(&lhs, &x) * Complex64::new(*weight, 0.0);
    }
    Ok((acc * Complex64::new(2f64.powi(s as i32), 0.0), s))
}

/// Principal square root of an upper-triangular matrix (Björck-Hammarling).
fn sqrt_upper_triangular(t: &CMatrix) -> CMatrix {
    let n = t.nrows();
    let mut r = CMatrix::zeros(n, n);
    for j in 0..n {
        r[(j, j)] = t[(j, j)].sqrt();
        for i in (0..j).rev() {
            let mut s = t[(i, j)];
            for k in (i + 1)..j {
                s -= r[(i, k)] * r[(k, j)];
            }
            r[(i, j)] = s / (r[(i, i)] + r[(j, j)]);
        }
    }
    r
}

fn one_norm(a: &CMatrix) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_unit(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for i in 0..m {
        // Chebyshev-like initial guess for the i-th root of P_m on [-1, 1].
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(m, x);
        if d != 0.0 {
            dp = d;
        }
        nodes.push(0.5 * (1.0 - x));
        weights.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

fn legendre(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}
