mod common;

use std::f64::consts::PI;

use common::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use vsc_ambient::fixtures::{build_fixture, design_case2, truth_modes, CaseOptions, FIXTURE_NAMES};
use vsc_ambient::linalg::eigen_decompose;
use vsc_ambient::modal::*;

fn fixture_matrix(name: &str) -> (DMatrix<f64>, Vec<String>) {
    let ss = build_fixture(name).unwrap().model.linearize().unwrap().reduced(0).unwrap();
    let labels = ss.labels();
    (ss.a_c, labels)
}

#[test]
fn participation_matches_eigenvalue_sensitivity() {
    for name in FIXTURE_NAMES {
        let (a, _) = fixture_matrix(name);
        let decomp = eigen_decompose(&a).unwrap();
        let raw = raw_participation(&decomp);
        let n = a.nrows();
        for k in 0..n {
            let h = 1e-4 * a[(k, k)].abs().max(1.0);
            let shifted = |step: f64| {
                let mut m = a.clone();
                m[(k, k)] += step;
                eigen_decompose(&m).unwrap().values
            };
            let (p1, m1, p2, m2) = (shifted(h), shifted(-h), shifted(2.0 * h), shifted(-2.0 * h));
            for (i, lambda) in decomp.values.iter().enumerate() {
                let nearest = |set: &[Complex64]| {
                    *set.iter().min_by(|x, y| (*x - lambda).norm().total_cmp(&(*y - lambda).norm())).unwrap()
                };
                // Fourth-order central difference.
                let fd = (8.0 * (nearest(&p1) - nearest(&m1)) - (nearest(&p2) - nearest(&m2))) / (12.0 * h);
                let scale: f64 = raw.column(i).iter().map(|z| z.norm()).sum();
                let err = (fd - raw[(k, i)]).norm() / scale;
                assert!(err < 1e-6, "{name} state {k} eigenvalue {i}: {err}");
            }
        }
    }
}

#[test]
fn participation_columns_sum_to_one_and_ignore_scaling() {
    let mut r = rng(12);
    for name in FIXTURE_NAMES {
        let (a, _) = fixture_matrix(name);
        let (values, p) = participation_factors(&a).unwrap();
        for col in p.column_iter() {
            assert!((col.sum() - 1.0).abs() < 1e-12);
        }
        let d: Vec<f64> = (0..a.nrows()).map(|_| 0.2 + 5.0 * (random_matrix(&mut r, 1, 1)[0].abs())).collect();
        let scaled = DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| d[i] * a[(i, j)] / d[j]);
        let (values2, p2) = participation_factors(&scaled).unwrap();
        for (i, lambda) in values.iter().enumerate() {
            let j = (0..values2.len())
                .min_by(|&x, &y| (values2[x] - lambda).norm().total_cmp(&(values2[y] - lambda).norm()))
                .unwrap();
            let diff = (p.column(i) - p2.column(j)).amax();
            assert!(diff < 1e-10, "{name}: {diff}");
        }
    }
}

#[test]
fn frequency_and_damping_reconstruct_eigenvalue() {
    for name in FIXTURE_NAMES {
        let (a, labels) = fixture_matrix(name);
        let set = eigen_modes(&a, &labels, ModeSource::Truth).unwrap();
        for m in &set.modes {
            let rebuilt = Complex64::new(-m.damping * m.lambda.norm(), 2.0 * PI * m.freq);
            assert!((rebuilt - m.lambda).norm() < 1e-12 * m.lambda.norm());
            assert!((m.participation.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let top = m.shape.iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!((top - 1.0).abs() < 1e-12);
        }
        assert!(set.modes.windows(2).all(|w| w[0].freq <= w[1].freq));
    }
}

#[test]
fn ninebus_has_one_mode_per_machine_pair() {
    let (a, labels) = fixture_matrix("ninebus_1vsc");
    let set = eigen_modes(&a, &labels, ModeSource::Truth).unwrap();
    assert_eq!(set.modes.len(), 2);
    assert_eq!(set.shape_labels(), vec!["omega_1", "omega_2", "omega_3"]);
    assert_eq!(set.real_eigenvalues.len(), 1);
}

fn conjugated(set: &ModeSet) -> ModeSet {
    let mut out = set.clone();
    for m in &mut out.modes {
        m.lambda = m.lambda.conj();
        m.shape = m.shape.iter().map(|z| z.conj()).collect();
    }
    out
}

#[test]
fn matching_is_independent_of_half_plane_representative() {
    let (a, labels) = fixture_matrix("tenmachine_3vsc");
    let truth = eigen_modes(&a, &labels, ModeSource::Truth).unwrap();
    let perturbed = &a + DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| 1e-3 * ((i * 7 + j * 3) % 5) as f64);
    let est = eigen_modes(&perturbed, &labels, ModeSource::Estimated).unwrap();
    let upper = match_modes(&truth, &est);
    let lower = match_modes(&conjugated(&truth), &conjugated(&est));
    assert_eq!(upper.pairs.len(), truth.modes.len());
    for (u, l) in upper.pairs.iter().zip(&lower.pairs) {
        assert_eq!(u.estimate_index, l.estimate_index);
        assert!((u.f_err_pct.abs() - l.f_err_pct.abs()).abs() < 1e-12);
        assert!((u.zeta_err_pct - l.zeta_err_pct).abs() < 1e-12);
        assert!((u.shape_alignment - l.shape_alignment).abs() < 1e-12);
    }
}

#[test]
fn identical_sets_pair_with_zero_error() {
    let (a, labels) = fixture_matrix("tenmachine_3vsc");
    let set = eigen_modes(&a, &labels, ModeSource::Truth).unwrap();
    let cmp = match_modes(&set, &set);
    assert_eq!(cmp.pairs.len(), set.modes.len());
    assert!(cmp.unmatched_truth.is_empty() && cmp.unmatched_estimate.is_empty());
    for p in &cmp.pairs {
        assert_eq!(p.truth_index, p.estimate_index);
        assert_eq!(p.f_err_pct, 0.0);
        assert_eq!(p.zeta_err_pct, 0.0);
        assert!((p.shape_alignment - 1.0).abs() < 1e-12);
    }
}

#[test]
fn missing_estimate_is_flagged() {
    let (a, labels) = fixture_matrix("ninebus_1vsc");
    let truth = eigen_modes(&a, &labels, ModeSource::Truth).unwrap();
    let mut est = truth.clone();
    est.modes.remove(0);
    let cmp = match_modes(&truth, &est);
    assert_eq!(cmp.unmatched_truth, vec![0]);
    assert_eq!(cmp.pairs.len(), 1);
}

#[test]
fn error_convention_is_signed_relative_percent() {
    // A 0.957 Hz mode estimated at 0.960 Hz is +0.31 %; published tables
    // built from unrounded values show +0.33 for the same rounded pair.
    let e = percent_error(0.957, 0.960);
    assert!(e > 0.0);
    assert!((e - 0.33).abs() < 0.1);
    assert!((e - 0.3135).abs() < 1e-4);
}

#[test]
fn mode_table_csv_layout() {
    let (a, labels) = fixture_matrix("ninebus_1vsc");
    let set = eigen_modes(&a, &labels, ModeSource::Truth).unwrap();
    let mut buf = Vec::new();
    match_modes(&set, &set).write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "mode,f_a,f_e,f_err_pct,zeta_a,zeta_e,zeta_err_pct");
    assert_eq!(lines.count(), 2);

    let mut buf = Vec::new();
    write_participation_csv(&set, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + labels.len());
}

#[test]
fn antisymmetric_feedback_raises_target_damping() {
    let model = build_fixture("ninebus_1vsc").unwrap().model;
    let truth = truth_modes(&model.linearize().unwrap().reduced(0).unwrap()).unwrap();
    let design = design_case2(&model, &truth, &truth, &CaseOptions::default()).unwrap();
    assert!(design.zeta_after > design.zeta_before);
    let (i, j) = design.machines;
    let k = &design.k1[design.vsc];
    assert_eq!(k[i], -k[j]);
    assert!(k[i] != 0.0);
}
