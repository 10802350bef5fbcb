use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use super::{Scheme, SimConfig, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::{ensure_hurwitz, expm};
use crate::netmodel::{Coords, StateSpace};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LinearSimOptions {
    /// Permit a non-Hurwitz matrix (e.g. full coordinates with the
    /// angle-shift zero mode).
    pub allow_non_hurwitz: bool,
}

/// Simulate `ẋ = A x + S ξ` from `x(0) = 0`; returns one row per recorded
/// sample after the burn-in.
pub fn simulate_ou(
    a: &DMatrix<f64>,
    s: &DMatrix<f64>,
    cfg: &SimConfig,
    opts: LinearSimOptions,
) -> Result<DMatrix<f64>> {
    cfg.validate()?;
    let n = a.nrows();
    if !a.is_square() || s.nrows() != n {
        return Err(Error::Dimension(format!(
            "A is {:?}, S is {:?}",
            a.shape(),
            s.shape()
        )));
    }
    if !opts.allow_non_hurwitz {
        ensure_hurwitz(a)?;
    }
    let burn = cfg.burn_in_samples();
    let samples = cfg.n_samples();
    let mut rng = cfg.rng();
    let mut draw = |m: usize| DVector::from_fn(m, |_, _| StandardNormal.sample(&mut rng));
    let mut out = DMatrix::zeros(samples, n);
    let mut x = DVector::zeros(n);
    let p = s.ncols();

    let (phi, chol) = if cfg.scheme == Scheme::Exact {
        let (phi, q) = van_loan(a, s, cfg.dt);
        (phi, psd_sqrt(&q))
    } else {
        (DMatrix::zeros(0, 0), DMatrix::zeros(0, 0))
    };
    let h = cfg.dt / cfg.substeps as f64;
    let sqrt_h = h.sqrt();

    for k in 0..(burn + samples) {
        if k >= burn {
            out.row_mut(k - burn).copy_from(&x.transpose());
        }
        if k + 1 == burn + samples {
            break;
        }
        match cfg.scheme {
            Scheme::Exact => x = &phi * &x + &chol * draw(n),
            Scheme::EulerMaruyama => {
                for _ in 0..cfg.substeps {
                    let dw = s * draw(p) * sqrt_h;
                    x = &x + a * &x * h + dw;
                }
            }
            Scheme::Heun => {
                for _ in 0..cfg.substeps {
                    let dw = s * draw(p) * sqrt_h;
                    let f0 = a * &x;
                    let pred = &x + &f0 * h + &dw;
                    x = &x + (f0 + a * pred) * (0.5 * h) + dw;
                }
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { step: k });
        }
    }
    Ok(out)
}

/// Transition `e^{A dt}` and the exact one-step noise covariance
/// `∫₀^dt e^{At} S Sᵀ e^{Aᵀt} dt` from one exponential of the block matrix
/// `[[-A, S Sᵀ], [0, Aᵀ]] dt`.
fn van_loan(a: &DMatrix<f64>, s: &DMatrix<f64>, dt: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&(-a));
    m.view_mut((0, n), (n, n)).copy_from(&(s * s.transpose()));
    m.view_mut((n, n), (n, n)).copy_from(&a.transpose());
    let e = expm(&m, dt);
    let f22 = e.view((n, n), (n, n)).into_owned();
    let f12 = e.view((0, n), (n, n)).into_owned();
    let phi = f22.transpose();
    let q = &phi * f12;
    let q = (&q + q.transpose()) * 0.5;
    (phi, q)
}

fn psd_sqrt(q: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = q.clone().symmetric_eigen();
    let d = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&d)
}

/// Linear OU simulation of a state space's closed-loop matrix, mapped back to
/// angle and speed channels (speeds reported as `1 + Δω`; the reference angle
/// of reduced coordinates is reported as zero).
pub fn simulate_linear_ou(ss: &StateSpace, cfg: &SimConfig, opts: LinearSimOptions) -> Result<Trajectory> {
    let x = simulate_ou(&ss.a_c, &ss.s, cfg, opts)?;
    let ng = ss.n_gen;
    let rows = x.nrows();
    let mut delta = DMatrix::zeros(rows, ng);
    let mut omega = DMatrix::zeros(rows, ng);
    let angle_cols: Vec<Option<usize>> = match ss.coords {
        Coords::Full => (0..ng).map(Some).collect(),
        Coords::ReferenceReduced(r) => {
            let mut col = 0;
            (0..ng)
                .map(|i| {
                    (i != r).then(|| {
                        col += 1;
                        col - 1
                    })
                })
                .collect()
        }
    };
    let w0 = angle_cols.iter().flatten().count();
    for k in 0..rows {
        for i in 0..ng {
            if let Some(c) = angle_cols[i] {
                delta[(k, i)] = x[(k, c)];
            }
            omega[(k, i)] = 1.0 + x[(k, w0 + i)];
        }
    }
    let labels = (1..=ng).map(|i| format!("G{i}")).collect();
    Trajectory::new(cfg.burn_in_samples() as f64 * cfg.dt, cfg.dt, delta, omega, labels)
}
