//! Linearization of the injections, elimination of the VSC bus voltages and
//! assembly of the open- and closed-loop state matrices.

use nalgebra::DMatrix;

use super::power::{bus_jacobian, bus_state};
use super::{solve_equilibrium, Coords, OperatingPoint, StateSpace, SystemModel, VscSet};
use crate::error::{Error, Result};

/// The nine partial-derivative blocks of `(P_E, P_v, Q_v)` with respect to
/// `(δ, θ, V)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianBlocks {
    pub a11: DMatrix<f64>,
    pub a12: DMatrix<f64>,
    pub a13: DMatrix<f64>,
    pub a21: DMatrix<f64>,
    pub a22: DMatrix<f64>,
    pub a23: DMatrix<f64>,
    pub a31: DMatrix<f64>,
    pub a32: DMatrix<f64>,
    pub a33: DMatrix<f64>,
}

/// `ΔP_E = A1 Δδ + A2 ΔP_v + A3 ΔQ_v`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraicReduction {
    pub a1: DMatrix<f64>,
    pub a2: DMatrix<f64>,
    pub a3: DMatrix<f64>,
}

pub fn jacobian_blocks(model: &SystemModel, point: &OperatingPoint) -> JacobianBlocks {
    let ng = model.n_gen();
    let nv = model.n_vsc();
    let (angle, mag) = bus_state(model, &point.delta0, &point.theta0, &point.v0);
    let (dp_da, dp_du, dq_da, dq_du) = bus_jacobian(model, &angle, &mag);
    let block = |m: &DMatrix<f64>, r0, nr, c0, nc| m.view((r0, c0), (nr, nc)).into_owned();
    JacobianBlocks {
        a11: block(&dp_da, 0, ng, 0, ng),
        a12: block(&dp_da, 0, ng, ng, nv),
        a13: block(&dp_du, 0, ng, ng, nv),
        a21: block(&dp_da, ng, nv, 0, ng),
        a22: block(&dp_da, ng, nv, ng, nv),
        a23: block(&dp_du, ng, nv, ng, nv),
        a31: block(&dq_da, ng, nv, 0, ng),
        a32: block(&dq_da, ng, nv, ng, nv),
        a33: block(&dq_du, ng, nv, ng, nv),
    }
}

/// Eliminate `(Δθ, ΔV)` by solving the stacked `2N_v x 2N_v` algebraic block
/// with one LU factorization.
pub fn reduce_algebraic(blocks: &JacobianBlocks) -> Result<AlgebraicReduction> {
    let ng = blocks.a11.nrows();
    let nv = blocks.a22.nrows();
    if nv == 0 {
        return Ok(AlgebraicReduction {
            a1: blocks.a11.clone(),
            a2: DMatrix::zeros(ng, 0),
            a3: DMatrix::zeros(ng, 0),
        });
    }
    let mut jvv = DMatrix::zeros(2 * nv, 2 * nv);
    jvv.view_mut((0, 0), (nv, nv)).copy_from(&blocks.a22);
    jvv.view_mut((0, nv), (nv, nv)).copy_from(&blocks.a23);
    jvv.view_mut((nv, 0), (nv, nv)).copy_from(&blocks.a32);
    jvv.view_mut((nv, nv), (nv, nv)).copy_from(&blocks.a33);

    let mut jvg = DMatrix::zeros(2 * nv, ng);
    jvg.rows_mut(0, nv).copy_from(&blocks.a21);
    jvg.rows_mut(nv, nv).copy_from(&blocks.a31);

    let mut jgv = DMatrix::zeros(ng, 2 * nv);
    jgv.columns_mut(0, nv).copy_from(&blocks.a12);
    jgv.columns_mut(nv, nv).copy_from(&blocks.a13);

    // [A2 A3] = J_gv J_vv⁻¹, computed as (J_vvᵀ⁻¹ J_gvᵀ)ᵀ.
    let scale = jvv.amax();
    let lu = jvv.transpose().lu();
    let u = lu.u();
    if scale == 0.0 || (0..2 * nv).any(|i| u[(i, i)].abs() <= 1e-13 * scale) {
        return Err(Error::SingularAlgebraicBlock);
    }
    let gains = lu
        .solve(&jgv.transpose())
        .ok_or(Error::SingularAlgebraicBlock)?
        .transpose();
    let a1 = &blocks.a11 - &gains * jvg;
    Ok(AlgebraicReduction {
        a1,
        a2: gains.columns(0, nv).into_owned(),
        a3: gains.columns(nv, nv).into_owned(),
    })
}

/// `A = [[0, ω0 I], [-M⁻¹A1, -M⁻¹D]]`, `B = [[0, 0], [-M⁻¹A2, -M⁻¹A3]]`,
/// `S = [0; -M⁻¹E²GΣ]`. `a_c` starts equal to `a` (no feedback).
pub fn open_loop_matrices(model: &SystemModel, red: &AlgebraicReduction) -> StateSpace {
    let ng = model.n_gen();
    let nv = model.n_vsc();
    let m = &model.machines;
    let mut a = DMatrix::zeros(2 * ng, 2 * ng);
    let mut b = DMatrix::zeros(2 * ng, 2 * nv);
    let mut s = DMatrix::zeros(2 * ng, ng);
    let noise = model.noise_gain();
    for i in 0..ng {
        a[(i, ng + i)] = m.omega0;
        for j in 0..ng {
            a[(ng + i, j)] = -red.a1[(i, j)] / m.inertia[i];
        }
        a[(ng + i, ng + i)] = -m.damping[i] / m.inertia[i];
        for k in 0..nv {
            b[(ng + i, k)] = -red.a2[(i, k)] / m.inertia[i];
            b[(ng + i, nv + k)] = -red.a3[(i, k)] / m.inertia[i];
        }
        s[(ng + i, i)] = noise[i];
    }
    StateSpace {
        a_c: a.clone(),
        a,
        b,
        s,
        coords: Coords::Full,
        n_gen: ng,
        omega0: m.omega0,
    }
}

/// Close the speed feedback: `A_c = A + B [K1; K2] Π_ω`.
pub fn closed_loop_matrix(ss: &StateSpace, vsc: &VscSet) -> Result<StateSpace> {
    if ss.coords != Coords::Full {
        return Err(Error::Config("closed-loop assembly needs full coordinates".into()));
    }
    let ng = ss.n_gen;
    let k = vsc.gain();
    if k.nrows() != ss.b.ncols() || k.ncols() != ng {
        return Err(Error::Dimension(format!(
            "feedback gain is {}x{}, expected {}x{ng}",
            k.nrows(),
            k.ncols(),
            ss.b.ncols()
        )));
    }
    let mut out = ss.clone();
    if k.nrows() > 0 {
        let bk = &ss.b * k;
        let mut delta = DMatrix::zeros(2 * ng, 2 * ng);
        delta.columns_mut(ng, ng).copy_from(&bk);
        out.a_c = &ss.a + delta;
    } else {
        out.a_c = ss.a.clone();
    }
    Ok(out)
}

/// `A_c = [[0, ω0 I], [-M⁻¹A1, -M⁻¹(A2 K1 + A3 K2 + D)]]` assembled directly.
pub fn closed_loop_direct(model: &SystemModel, red: &AlgebraicReduction) -> DMatrix<f64> {
    let ng = model.n_gen();
    let m = &model.machines;
    let mut lower_right = &red.a2 * &model.vscs.k1 + &red.a3 * &model.vscs.k2;
    for i in 0..ng {
        lower_right[(i, i)] += m.damping[i];
    }
    let mut a_c = DMatrix::zeros(2 * ng, 2 * ng);
    for i in 0..ng {
        a_c[(i, ng + i)] = m.omega0;
        for j in 0..ng {
            a_c[(ng + i, j)] = -red.a1[(i, j)] / m.inertia[i];
            a_c[(ng + i, ng + j)] = -lower_right[(i, j)] / m.inertia[i];
        }
    }
    a_c
}

/// Project a full-coordinate model onto `(δ_i - δ_ref, i ≠ ref; ω)`.
///
/// With `T` the difference map and `P` the lift that sets `δ_ref = 0`, the
/// reduced matrices are `T A P`, `T B` and `T S`. Because `A [1; 0] = 0`,
/// `A = A P T` and every nonzero eigenvalue of `A` survives in `T A P`.
pub fn reduce_reference(ss: &StateSpace, reference: usize) -> Result<StateSpace> {
    if ss.coords != Coords::Full {
        return Err(Error::Config("state space is already reference-reduced".into()));
    }
    let ng = ss.n_gen;
    if reference >= ng {
        return Err(Error::Dimension(format!(
            "reference machine {reference} out of range 0..{ng}"
        )));
    }
    let n = 2 * ng;
    let mut t = DMatrix::zeros(n - 1, n);
    let mut p = DMatrix::zeros(n, n - 1);
    let mut row = 0;
    for i in 0..ng {
        if i == reference {
            continue;
        }
        t[(row, i)] = 1.0;
        t[(row, reference)] = -1.0;
        p[(i, row)] = 1.0;
        row += 1;
    }
    for i in 0..ng {
        t[(ng - 1 + i, ng + i)] = 1.0;
        p[(ng + i, ng - 1 + i)] = 1.0;
    }
    Ok(StateSpace {
        a: &t * &ss.a * &p,
        b: &t * &ss.b,
        s: &t * &ss.s,
        a_c: &t * &ss.a_c * &p,
        coords: Coords::ReferenceReduced(reference),
        n_gen: ng,
        omega0: ss.omega0,
    })
}

/// Everything derived from a model at its equilibrium.
#[derive(Debug, Clone)]
pub struct Linearization {
    pub point: OperatingPoint,
    pub blocks: JacobianBlocks,
    pub reduction: AlgebraicReduction,
    /// Full coordinates, `a_c` closed with the model's feedback gains.
    pub full: StateSpace,
}

impl Linearization {
    pub fn new(model: &SystemModel) -> Result<Self> {
        let point = solve_equilibrium(model)?;
        let blocks = jacobian_blocks(model, &point);
        let reduction = reduce_algebraic(&blocks)?;
        let open = open_loop_matrices(model, &reduction);
        let full = closed_loop_matrix(&open, &model.vscs)?;
        Ok(Linearization {
            point,
            blocks,
            reduction,
            full,
        })
    }

    pub fn reduced(&self, reference: usize) -> Result<StateSpace> {
        reduce_reference(&self.full, reference)
    }

    pub fn in_coords(&self, coords: Coords) -> Result<StateSpace> {
        match coords {
            Coords::Full => Ok(self.full.clone()),
            Coords::ReferenceReduced(r) => self.reduced(r),
        }
    }
}
