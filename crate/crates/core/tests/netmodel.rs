mod common;

use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use vsc_ambient::fixtures::{build_fixture, truth_modes, FIXTURE_NAMES};
use vsc_ambient::linalg::{complex_schur, spectral_abscissa};
use vsc_ambient::netmodel::*;

fn fixture(name: &str) -> SystemModel {
    build_fixture(name).unwrap().model
}

#[test]
fn bundled_model_files_match_builders() {
    for name in FIXTURE_NAMES {
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("fixtures/{name}.json"));
        let loaded = SystemModel::load(&path).unwrap();
        assert_eq!(loaded.content_hash(), fixture(name).content_hash(), "{name}");
    }
}

#[test]
fn json_round_trip_keeps_model() {
    let model = fixture("tenmachine_3vsc");
    let back = SystemModel::from_json(&model.to_json().unwrap()).unwrap();
    assert_eq!(back.content_hash(), model.content_hash());
    assert!(camax(&(back.network.y.clone() - model.network.y.clone())) < 1e-15);
}

#[test]
fn jacobian_blocks_match_central_differences() {
    for name in FIXTURE_NAMES {
        let model = fixture(name);
        let lin = model.linearize().unwrap();
        let fd = fd_jacobian(&model, &lin.point, 1e-6);
        let b = &lin.blocks;
        for (an, num) in [
            (&b.a11, &fd.a11),
            (&b.a12, &fd.a12),
            (&b.a13, &fd.a13),
            (&b.a21, &fd.a21),
            (&b.a22, &fd.a22),
            (&b.a23, &fd.a23),
            (&b.a31, &fd.a31),
            (&b.a32, &fd.a32),
            (&b.a33, &fd.a33),
        ] {
            assert!(rel_err(an, num) < 1e-6, "{name}: {}", rel_err(an, num));
        }
    }
}

#[test]
fn block_elimination_matches_chained_inverse_on_random_blocks() {
    let mut r = rng(11);
    for trial in 0..25 {
        let ng = 2 + trial % 4;
        let nv = 1 + trial % 3;
        let blocks = JacobianBlocks {
            a11: random_matrix(&mut r, ng, ng),
            a12: random_matrix(&mut r, ng, nv),
            a13: random_matrix(&mut r, ng, nv),
            a21: random_matrix(&mut r, nv, ng),
            a22: random_matrix(&mut r, nv, nv) + DMatrix::identity(nv, nv) * 3.0,
            a23: random_matrix(&mut r, nv, nv) + DMatrix::identity(nv, nv) * 2.0,
            a31: random_matrix(&mut r, nv, ng),
            a32: random_matrix(&mut r, nv, nv) - DMatrix::identity(nv, nv) * 2.0,
            a33: random_matrix(&mut r, nv, nv) + DMatrix::identity(nv, nv) * 3.0,
        };
        let red = reduce_algebraic(&blocks).unwrap();
        let (a1, a2, a3) = chained_inverse(&blocks);
        assert!(rel_err(&red.a1, &a1) < 1e-10, "trial {trial}");
        assert!(rel_err(&red.a2, &a2) < 1e-10, "trial {trial}");
        assert!(rel_err(&red.a3, &a3) < 1e-10, "trial {trial}");
    }
}

#[test]
fn block_elimination_matches_chained_inverse_on_fixtures() {
    for name in FIXTURE_NAMES {
        let lin = fixture(name).linearize().unwrap();
        let (a1, a2, a3) = chained_inverse(&lin.blocks);
        assert!(rel_err(&lin.reduction.a1, &a1) < 1e-10, "{name}");
        assert!(rel_err(&lin.reduction.a2, &a2) < 1e-10, "{name}");
        assert!(rel_err(&lin.reduction.a3, &a3) < 1e-10, "{name}");
    }
}

#[test]
fn kron_reduction_matches_impedance_oracle() {
    for name in FIXTURE_NAMES {
        let model = fixture(name);
        let AdmittanceSource::Full { matrix, retained } = &model.source else {
            panic!("fixtures carry the full network");
        };
        let oracle = kron_by_impedance(matrix, retained);
        let reduced = kron_reduce(matrix, retained).unwrap();
        let err = camax(&(reduced.y.clone() - &oracle)) / camax(&oracle);
        assert!(err < 1e-12, "{name}: {err}");
        assert!(reduced.is_symmetric(1e-12));
    }
}

#[test]
fn angle_shift_symmetry() {
    for name in FIXTURE_NAMES {
        let lin = fixture(name).linearize().unwrap();
        let a1 = &lin.reduction.a1;
        let row_sums = a1 * DMatrix::from_element(a1.ncols(), 1, 1.0);
        assert!(row_sums.amax() < 1e-10 * a1.amax(), "{name}");

        let (_, t) = complex_schur(&lin.full.a_c).unwrap();
        let smallest = (0..t.nrows()).map(|i| t[(i, i)].norm()).fold(f64::INFINITY, f64::min);
        assert!(smallest < 1e-10, "{name}: {smallest}");
        assert!(spectral_abscissa(&lin.reduced(0).unwrap().a_c).unwrap() < 0.0);
    }
}

#[test]
fn closed_loop_forms_agree() {
    let mut r = rng(5);
    for name in FIXTURE_NAMES {
        let model = fixture(name);
        let (nv, ng) = (model.n_vsc(), model.n_gen());
        let k1 = random_matrix(&mut r, nv, ng) * 50.0;
        let k2 = random_matrix(&mut r, nv, ng) * 20.0;
        let fed = model.with_feedback(k1, k2).unwrap();
        let lin = fed.linearize().unwrap();
        let direct = closed_loop_direct(&fed, &lin.reduction);
        assert!(rel_max_err(&lin.full.a_c, &direct) < 1e-14, "{name}");
    }
}

#[test]
fn equilibrium_balances_dispatch() {
    for name in FIXTURE_NAMES {
        let model = fixture(name);
        let point = solve_equilibrium(&model).unwrap();
        let inj = injections(&model, &point.delta0, &point.theta0, &point.v0);
        assert_eq!(point.delta0[point.reference], 0.0);
        for i in 0..model.n_gen() {
            if i != point.reference {
                assert!((inj.p_e[i] - model.machines.p_mech[i]).abs() < 1e-9, "{name} G{}", i + 1);
            }
            assert!((inj.p_e[i] - point.p_e0[i]).abs() < 1e-12);
        }
        for v in 0..model.n_vsc() {
            assert!((inj.p_v[v] - model.vscs.p_ref[v]).abs() < 1e-9);
            assert!((inj.q_v[v] - model.vscs.q_ref[v]).abs() < 1e-9);
        }
    }
}

#[test]
fn network_solve_reaches_tolerance() {
    let model = fixture("ninebus_1vsc");
    let point = solve_equilibrium(&model).unwrap();
    let sol = solve_network(&model, &point.delta0, None).unwrap();
    assert!(sol.mismatch <= NEWTON_TOL);
    assert!(sol.iterations <= NEWTON_MAX_ITER);
    for (a, b) in sol.theta.iter().zip(&point.theta0) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn infeasible_dispatch_is_reported() {
    let mut model = fixture("twomachine_1vsc");
    model.vscs.p_ref = vec![40.0];
    assert!(matches!(
        solve_equilibrium(&model),
        Err(vsc_ambient::Error::InfeasibleDispatch { .. } | vsc_ambient::Error::AlgebraicSolve { .. } | vsc_ambient::Error::SingularJacobian)
    ));
}

#[test]
fn fixture_mode_structure() {
    let two = fixture("twomachine_1vsc");
    assert_eq!((two.n_gen(), two.n_vsc()), (2, 1));
    assert_eq!(Coords::ReferenceReduced(0).dim(2), 3);

    let nine = truth_modes(&fixture("ninebus_1vsc").linearize().unwrap().reduced(0).unwrap()).unwrap();
    assert_eq!(nine.modes.len(), 2);
    assert!(nine.modes.iter().all(|m| m.freq > 0.5 && m.freq < 3.0));

    let ten = truth_modes(&fixture("tenmachine_3vsc").linearize().unwrap().reduced(0).unwrap()).unwrap();
    assert!(ten.modes.iter().any(|m| m.damping < 0.05));

    for name in FIXTURE_NAMES {
        let set = truth_modes(&fixture(name).linearize().unwrap().reduced(0).unwrap()).unwrap();
        assert!(set.modes.iter().all(|m| m.damping > 0.0 && m.damping < 0.2), "{name}");
    }
}

#[test]
fn noise_gain_column() {
    let model = fixture("ninebus_1vsc");
    let ss = model.linearize().unwrap().reduced(0).unwrap();
    let g = model.generator_conductance();
    let ng = model.n_gen();
    for i in 0..ng {
        let m = &model.machines;
        let expected = -m.emf[i].powi(2) * g[i] * m.sigma[i] / m.inertia[i];
        assert!((ss.s[(ng - 1 + i, i)] - expected).abs() < 1e-15);
    }
    assert!(ss.s.rows(0, ng - 1).amax() == 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn angle_shift_holds_for_any_dispatch(p in -0.8f64..0.8, q in -0.3f64..0.3) {
        let mut model = fixture("ninebus_1vsc");
        model.vscs.p_ref = vec![p];
        model.vscs.q_ref = vec![q];
        let lin = model.linearize().unwrap();
        let a1 = &lin.reduction.a1;
        let sums = a1 * DMatrix::from_element(a1.ncols(), 1, 1.0);
        prop_assert!(sums.amax() < 1e-10 * a1.amax());
    }
}
