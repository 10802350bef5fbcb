//! Polar power injections on the reduced network and the Newton solvers for
//! the VSC bus voltages and the equilibrium.

use nalgebra::{DMatrix, DVector};

use super::{OperatingPoint, SystemModel};
use crate::error::{Error, Result};

pub const NEWTON_TOL: f64 = 1e-10;
pub const NEWTON_MAX_ITER: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct Injections {
    pub p_e: Vec<f64>,
    pub p_v: Vec<f64>,
    pub q_v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSolution {
    pub theta: Vec<f64>,
    pub v: Vec<f64>,
    pub iterations: usize,
    pub mismatch: f64,
}

/// Bus angles and magnitudes over the retained network: generators carry
/// `(δ_i, E_i)`, VSC buses `(θ_k, V_k)`.
pub(crate) fn bus_state(model: &SystemModel, delta: &[f64], theta: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut angle = Vec::with_capacity(delta.len() + theta.len());
    angle.extend_from_slice(delta);
    angle.extend_from_slice(theta);
    let mut mag = Vec::with_capacity(angle.len());
    mag.extend_from_slice(&model.machines.emf);
    mag.extend_from_slice(v);
    (angle, mag)
}

/// Active and reactive injections at every retained bus. `diag_scale`, when
/// given, multiplies the generator-bus diagonal admittances.
pub(crate) fn bus_powers(
    model: &SystemModel,
    angle: &[f64],
    mag: &[f64],
    diag_scale: Option<&[f64]>,
) -> (Vec<f64>, Vec<f64>) {
    let g = model.network.g();
    let b = model.network.b();
    let n = angle.len();
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    for i in 0..n {
        let (mut pi, mut qi) = (0.0, 0.0);
        for j in 0..n {
            let (mut gij, mut bij) = (g[(i, j)], b[(i, j)]);
            if i == j {
                if let Some(scale) = diag_scale.and_then(|s| s.get(i)) {
                    gij *= scale;
                    bij *= scale;
                }
            }
            if gij == 0.0 && bij == 0.0 {
                continue;
            }
            let (s, c) = (angle[i] - angle[j]).sin_cos();
            pi += mag[j] * (gij * c + bij * s);
            qi += mag[j] * (gij * s - bij * c);
        }
        p[i] = mag[i] * pi;
        q[i] = mag[i] * qi;
    }
    (p, q)
}

/// Partial derivatives of all bus injections with respect to all bus angles
/// and magnitudes: `(dP/dα, dP/dU, dQ/dα, dQ/dU)`.
pub(crate) fn bus_jacobian(
    model: &SystemModel,
    angle: &[f64],
    mag: &[f64],
) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let g = model.network.g();
    let b = model.network.b();
    let n = angle.len();
    let (p, q) = bus_powers(model, angle, mag, None);
    let mut dp_da = DMatrix::zeros(n, n);
    let mut dp_du = DMatrix::zeros(n, n);
    let mut dq_da = DMatrix::zeros(n, n);
    let mut dq_du = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                let u = mag[i];
                dp_da[(i, i)] = -q[i] - b[(i, i)] * u * u;
                dq_da[(i, i)] = p[i] - g[(i, i)] * u * u;
                dp_du[(i, i)] = p[i] / u + g[(i, i)] * u;
                dq_du[(i, i)] = q[i] / u - b[(i, i)] * u;
            } else {
                let (s, c) = (angle[i] - angle[j]).sin_cos();
                let (gij, bij) = (g[(i, j)], b[(i, j)]);
                let k1 = gij * s - bij * c;
                let k2 = gij * c + bij * s;
                dp_da[(i, j)] = mag[i] * mag[j] * k1;
                dq_da[(i, j)] = -mag[i] * mag[j] * k2;
                dp_du[(i, j)] = mag[i] * k2;
                dq_du[(i, j)] = mag[i] * k1;
            }
        }
    }
    (dp_da, dp_du, dq_da, dq_du)
}

/// Generator electrical outputs and VSC injections at `(δ, θ, V)`.
pub fn injections(model: &SystemModel, delta: &[f64], theta: &[f64], v: &[f64]) -> Injections {
    injections_with_diagonal_scale(model, delta, theta, v, None)
}

pub fn injections_with_diagonal_scale(
    model: &SystemModel,
    delta: &[f64],
    theta: &[f64],
    v: &[f64],
    diag_scale: Option<&[f64]>,
) -> Injections {
    let ng = model.n_gen();
    let (angle, mag) = bus_state(model, delta, theta, v);
    let (p, q) = bus_powers(model, &angle, &mag, diag_scale);
    Injections {
        p_e: p[..ng].to_vec(),
        p_v: p[ng..].to_vec(),
        q_v: q[ng..].to_vec(),
    }
}

/// Solve the VSC bus voltages for the model's steady-state references.
pub fn solve_network(
    model: &SystemModel,
    delta: &[f64],
    guess: Option<(&[f64], &[f64])>,
) -> Result<NetworkSolution> {
    solve_network_for_targets(model, delta, &model.vscs.p_ref, &model.vscs.q_ref, guess)
}

/// Newton solve of `P_v(δ, θ, V) = p_target`, `Q_v(δ, θ, V) = q_target`.
/// Without a guess the iteration starts flat (`θ = 0`, `V = 1`).
pub fn solve_network_for_targets(
    model: &SystemModel,
    delta: &[f64],
    p_target: &[f64],
    q_target: &[f64],
    guess: Option<(&[f64], &[f64])>,
) -> Result<NetworkSolution> {
    let ng = model.n_gen();
    let nv = model.n_vsc();
    if delta.len() != ng || p_target.len() != nv || q_target.len() != nv {
        return Err(Error::Dimension(format!(
            "network solve expects {ng} angles and {nv} targets"
        )));
    }
    if delta.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("non-finite rotor angle".into()));
    }
    if nv == 0 {
        return Ok(NetworkSolution {
            theta: Vec::new(),
            v: Vec::new(),
            iterations: 0,
            mismatch: 0.0,
        });
    }
    let (mut theta, mut v) = match guess {
        Some((t, m)) if t.len() == nv && m.len() == nv => (t.to_vec(), m.to_vec()),
        _ => (vec![0.0; nv], vec![1.0; nv]),
    };
    let mut mismatch = f64::INFINITY;
    for it in 0..=NEWTON_MAX_ITER {
        let (angle, mag) = bus_state(model, delta, &theta, &v);
        let (p, q) = bus_powers(model, &angle, &mag, None);
        let f = DVector::from_fn(2 * nv, |k, _| {
            if k < nv {
                p[ng + k] - p_target[k]
            } else {
                q[ng + k - nv] - q_target[k - nv]
            }
        });
        mismatch = f.amax();
        if !mismatch.is_finite() {
            break;
        }
        if mismatch < NEWTON_TOL {
            return Ok(NetworkSolution {
                theta,
                v,
                iterations: it,
                mismatch,
            });
        }
        if it == NEWTON_MAX_ITER {
            break;
        }
        let (dp_da, dp_du, dq_da, dq_du) = bus_jacobian(model, &angle, &mag);
        let j = DMatrix::from_fn(2 * nv, 2 * nv, |r, c| {
            let (rr, cc) = (ng + r % nv, ng + c % nv);
            match (r < nv, c < nv) {
                (true, true) => dp_da[(rr, cc)],
                (true, false) => dp_du[(rr, cc)],
                (false, true) => dq_da[(rr, cc)],
                (false, false) => dq_du[(rr, cc)],
            }
        });
        let dx = lu_solve(j, -f).ok_or(Error::SingularJacobian)?;
        for k in 0..nv {
            theta[k] += dx[k];
            v[k] += dx[nv + k];
        }
    }
    Err(Error::AlgebraicSolve {
        iterations: NEWTON_MAX_ITER,
        mismatch,
    })
}

/// LU solve that treats a numerically zero pivot as singular.
pub(crate) fn lu_solve(a: DMatrix<f64>, rhs: DVector<f64>) -> Option<DVector<f64>> {
    let scale = a.amax();
    let lu = a.lu();
    let u = lu.u();
    let n = u.nrows();
    if (0..n).any(|i| u[(i, i)].abs() <= 1e-14 * scale) {
        return None;
    }
    lu.solve(&rhs).filter(|x| x.iter().all(|v| v.is_finite()))
}

/// Equilibrium with machine 0 as the angle reference and slack: its angle is
/// held at zero and its electrical output absorbs the network losses. Every
/// other machine satisfies `P_E = P_M`, every VSC meets `(P_vs, Q_vs)`.
pub fn solve_equilibrium(model: &SystemModel) -> Result<OperatingPoint> {
    let ng = model.n_gen();
    let nv = model.n_vsc();
    let reference = 0;
    let unknowns = (ng - 1) + 2 * nv;
    let mut delta = vec![0.0; ng];
    let mut theta = vec![0.0; nv];
    let mut v = vec![1.0; nv];
    let p_m = &model.machines.p_mech;

    let mut mismatch = f64::INFINITY;
    let mut converged = unknowns == 0;
    for it in 0..=NEWTON_MAX_ITER {
        if converged {
            break;
        }
        let (angle, mag) = bus_state(model, &delta, &theta, &v);
        let (p, q) = bus_powers(model, &angle, &mag, None);
        let mut f = DVector::zeros(unknowns);
        for i in 1..ng {
            f[i - 1] = p[i] - p_m[i];
        }
        for k in 0..nv {
            f[ng - 1 + k] = p[ng + k] - model.vscs.p_ref[k];
            f[ng - 1 + nv + k] = q[ng + k] - model.vscs.q_ref[k];
        }
        mismatch = f.amax();
        if !mismatch.is_finite() {
            break;
        }
        if mismatch < NEWTON_TOL {
            converged = true;
            break;
        }
        if it == NEWTON_MAX_ITER {
            break;
        }
        let (dp_da, dp_du, dq_da, dq_du) = bus_jacobian(model, &angle, &mag);
        // Row/column maps: equations (P_E non-ref, P_v, Q_v) over
        // unknowns (δ non-ref, θ, V).
        let row_bus = |r: usize| -> (usize, bool) {
            if r < ng - 1 {
                (r + 1, true)
            } else if r < ng - 1 + nv {
                (ng + r - (ng - 1), true)
            } else {
                (ng + r - (ng - 1 + nv), false)
            }
        };
        let col_bus = |c: usize| -> (usize, bool) {
            if c < ng - 1 {
                (c + 1, true)
            } else if c < ng - 1 + nv {
                (ng + c - (ng - 1), true)
            } else {
                (ng + c - (ng - 1 + nv), false)
            }
        };
        let j = DMatrix::from_fn(unknowns, unknowns, |r, c| {
            let (rb, is_p) = row_bus(r);
            let (cb, is_angle) = col_bus(c);
            match (is_p, is_angle) {
                (true, true) => dp_da[(rb, cb)],
                (true, false) => dp_du[(rb, cb)],
                (false, true) => dq_da[(rb, cb)],
                (false, false) => dq_du[(rb, cb)],
            }
        });
        let dx = lu_solve(j, -f).ok_or(Error::InfeasibleDispatch { mismatch })?;
        for i in 1..ng {
            delta[i] += dx[i - 1];
        }
        for k in 0..nv {
            theta[k] += dx[ng - 1 + k];
            v[k] += dx[ng - 1 + nv + k];
        }
    }
    if !converged {
        return Err(Error::InfeasibleDispatch { mismatch });
    }
    let inj = injections(model, &delta, &theta, &v);
    Ok(OperatingPoint {
        delta0: delta,
        theta0: theta,
        v0: v,
        p_e0: inj.p_e,
        reference,
    })
}
