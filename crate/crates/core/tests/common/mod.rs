//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vsc_ambient::linalg::{spectral_abscissa, CMatrix};
use vsc_ambient::netmodel::{injections, JacobianBlocks, OperatingPoint, SystemModel};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

/// Random matrix shifted so that its spectral abscissa is `-margin`.
pub fn random_hurwitz(rng: &mut ChaCha8Rng, n: usize, margin: f64) -> DMatrix<f64> {
    let mut a = random_matrix(rng, n, n) * 2.0;
    let shift = spectral_abscissa(&a).unwrap() + margin;
    for i in 0..n {
        a[(i, i)] -= shift;
    }
    a
}

/// `||a - b||_F / ||b||_F`.
pub fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Max elementwise difference relative to the largest entry of `b`.
pub fn rel_max_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / b.amax().max(f64::MIN_POSITIVE)
}

/// Central-difference Jacobian of `(P_E, P_v, Q_v)` with respect to
/// `(δ, θ, V)` at `point`.
pub fn fd_jacobian(model: &SystemModel, point: &OperatingPoint, h: f64) -> JacobianBlocks {
    let ng = model.n_gen();
    let nv = model.n_vsc();
    let n = ng + 2 * nv;
    let base: Vec<f64> = point
        .delta0
        .iter()
        .chain(&point.theta0)
        .chain(&point.v0)
        .copied()
        .collect();
    let eval = |x: &[f64]| -> Vec<f64> {
        let inj = injections(model, &x[..ng], &x[ng..ng + nv], &x[ng + nv..]);
        inj.p_e.iter().chain(&inj.p_v).chain(&inj.q_v).copied().collect()
    };
    let mut j = DMatrix::zeros(n, n);
    for c in 0..n {
        let mut plus = base.clone();
        let mut minus = base.clone();
        plus[c] += h;
        minus[c] -= h;
        let (fp, fm) = (eval(&plus), eval(&minus));
        for r in 0..n {
            j[(r, c)] = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    let b = |r0, nr, c0, nc| j.view((r0, c0), (nr, nc)).into_owned();
    JacobianBlocks {
        a11: b(0, ng, 0, ng),
        a12: b(0, ng, ng, nv),
        a13: b(0, ng, ng + nv, nv),
        a21: b(ng, nv, 0, ng),
        a22: b(ng, nv, ng, nv),
        a23: b(ng, nv, ng + nv, nv),
        a31: b(ng + nv, nv, 0, ng),
        a32: b(ng + nv, nv, ng, nv),
        a33: b(ng + nv, nv, ng + nv, nv),
    }
}

/// The chained-inverse elimination of the VSC bus voltages with
/// `B1 = A23⁻¹A22 - A33⁻¹A32` and `B2 = A22⁻¹A23 - A32⁻¹A33`.
pub fn chained_inverse(b: &JacobianBlocks) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let inv = |m: &DMatrix<f64>| m.clone().try_inverse().expect("block must be invertible");
    let (i22, i23, i32, i33) = (inv(&b.a22), inv(&b.a23), inv(&b.a32), inv(&b.a33));
    let b1 = inv(&(&i23 * &b.a22 - &i33 * &b.a32));
    let b2 = inv(&(&i22 * &b.a23 - &i32 * &b.a33));
    let a1 = &b.a11
        + &b.a12 * &b1 * (-&i23 * &b.a21 + &i33 * &b.a31)
        + &b.a13 * &b2 * (-&i22 * &b.a21 + &i32 * &b.a31);
    let a2 = &b.a12 * &b1 * &i23 + &b.a13 * &b2 * &i22;
    let a3 = -(&b.a12 * &b1 * &i33) - &b.a13 * &b2 * &i32;
    (a1, a2, a3)
}

/// Reduced admittance from the full impedance matrix: `(Z_rr)⁻¹` with
/// `Z = Y⁻¹`.
pub fn kron_by_impedance(y: &CMatrix, retained: &[usize]) -> CMatrix {
    let z = y.clone().try_inverse().expect("full admittance must be invertible");
    let zrr = CMatrix::from_fn(retained.len(), retained.len(), |i, j| z[(retained[i], retained[j])]);
    zrr.try_inverse().expect("retained impedance block must be invertible")
}

/// Largest entry modulus of a complex matrix.
pub fn camax(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
