mod common;

use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand_distr::{Distribution, StandardNormal};
use vsc_ambient::estimator::*;
use vsc_ambient::netmodel::Coords;
use vsc_ambient::sim::{analytic_lag_correlation, lyapunov_covariance, simulate_ou, LinearSimOptions, Scheme, SimConfig, Trajectory};

fn analytic_stats(a: &DMatrix<f64>, tau_steps: usize, dt: f64) -> SampleStats {
    let n = a.nrows();
    let s = DMatrix::identity(n, n) * 0.3;
    let c = lyapunov_covariance(a, &s).unwrap();
    SampleStats {
        r_hat: analytic_lag_correlation(a, &c, tau_steps as f64 * dt).unwrap(),
        c_hat: c,
        tau_steps,
        dt,
        n_samples: 15000,
        labels: (1..=n).map(|i| format!("x{i}")).collect(),
        coords: Coords::ReferenceReduced(0),
    }
}

#[test]
fn exact_on_analytic_inputs() {
    let mut r = rng(3);
    for trial in 0..20 {
        let n = 2 + trial % 9;
        let a = random_hurwitz(&mut r, n, 0.2);
        let stats = analytic_stats(&a, 1, 0.02);
        let est = estimate_state_matrix(&stats, &EstimatorConfig::default()).unwrap();
        assert!(rel_err(&est.a_hat, &a) < 1e-8, "trial {trial}: {}", rel_err(&est.a_hat, &a));
        assert!(est.diagnostics.imag_residual < 1e-6);
        assert!(!est.diagnostics.nonstationary);
    }
}

#[test]
fn lag_choice_does_not_change_analytic_estimate() {
    let mut r = rng(4);
    for _ in 0..5 {
        let a = random_hurwitz(&mut r, 6, 0.3);
        let ests: Vec<_> = [1, 2, 5]
            .iter()
            .map(|&tau| {
                let cfg = EstimatorConfig { tau_steps: tau, ..Default::default() };
                estimate_state_matrix(&analytic_stats(&a, tau, 0.02), &cfg).unwrap().a_hat
            })
            .collect();
        assert!(rel_err(&ests[1], &ests[0]) < 1e-8);
        assert!(rel_err(&ests[2], &ests[0]) < 1e-8);
    }
}

#[test]
fn lag_correlation_derivative_follows_drift() {
    let mut r = rng(8);
    let a = random_hurwitz(&mut r, 5, 0.5);
    let c = lyapunov_covariance(&a, &DMatrix::identity(5, 5)).unwrap();
    let (tau, h) = (0.7, 1e-5);
    let plus = analytic_lag_correlation(&a, &c, tau + h).unwrap();
    let minus = analytic_lag_correlation(&a, &c, tau - h).unwrap();
    let deriv = (plus - minus) / (2.0 * h);
    let expected = &a * analytic_lag_correlation(&a, &c, tau).unwrap();
    assert!(rel_err(&deriv, &expected) < 1e-6);
}

#[test]
fn simulated_lag_correlation_near_analytic() {
    let a = DMatrix::from_row_slice(3, 3, &[-0.5, 2.0, 0.0, -2.0, -0.5, 0.3, 0.0, -0.4, -1.0]);
    let s = DMatrix::identity(3, 3) * 0.1;
    let cfg = SimConfig { scheme: Scheme::Exact, seed: 21, ..Default::default() };
    let x = simulate_ou(&a, &s, &cfg, LinearSimOptions::default()).unwrap();
    let c = lyapunov_covariance(&a, &s).unwrap();
    let r = analytic_lag_correlation(&a, &c, cfg.dt).unwrap();
    let r_hat = sample_lag_correlation(&x, 1, Normalization::Biased);
    assert!(rel_err(&r_hat, &r) < 0.15, "{}", rel_err(&r_hat, &r));
}

#[test]
fn white_noise_inflates_covariance_only() {
    let mut r = rng(9);
    let std = 1e-3;
    let x = DMatrix::from_fn(20000, 3, |_, _| {
        let z: f64 = StandardNormal.sample(&mut r);
        std * z
    });
    let c = sample_covariance(&x);
    let r1 = sample_lag_correlation(&x, 1, Normalization::Biased);
    for i in 0..3 {
        assert!((c[(i, i)] / (std * std) - 1.0).abs() < 0.05);
    }
    assert!(r1.amax() < 0.05 * std * std);
}

#[test]
fn normalization_ratio() {
    let mut r = rng(10);
    let x = random_matrix(&mut r, 500, 2);
    let biased = sample_lag_correlation(&x, 5, Normalization::Biased);
    let unbiased = sample_lag_correlation(&x, 5, Normalization::Unbiased);
    assert!(rel_err(&(unbiased * (495.0 / 500.0)), &biased) < 1e-14);
}

#[test]
fn reference_coordinates_from_trajectory() {
    let delta = DMatrix::from_row_slice(3, 2, &[0.1, 0.4, 0.2, 0.1, 0.3, 0.7]);
    let omega = DMatrix::from_row_slice(3, 2, &[1.0, 1.001, 0.999, 1.0, 1.0, 1.0]);
    let traj = Trajectory::new(0.0, 0.02, delta, omega, vec!["G1".into(), "G2".into()]).unwrap();
    let x = state_samples(&traj, Coords::ReferenceReduced(0)).unwrap();
    assert_eq!(x.ncols(), 3);
    assert!((x[(1, 0)] - (0.1 - 0.2)).abs() < 1e-15);
    assert_eq!(x[(1, 1)], 0.999);
    let full = state_samples(&traj, Coords::Full).unwrap();
    assert_eq!(full.ncols(), 4);
    assert!(state_samples(&traj, Coords::ReferenceReduced(5)).is_err());
}

#[test]
fn ridge_recovers_rank_deficient_full_coordinates() {
    let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.5, -0.5, -1.0]);
    let mut stats = analytic_stats(&a, 1, 0.02);
    stats.c_hat = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
    let cfg = EstimatorConfig { coords: Coords::Full, ridge: 1e-3, ..Default::default() };
    let est = estimate_state_matrix(&stats, &cfg).unwrap();
    assert!(est.diagnostics.cond_c < 1e4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn covariance_is_symmetric(seed in 0u64..1000, rows in 3usize..60, cols in 1usize..6) {
        let mut r = rng(seed);
        let x = random_matrix(&mut r, rows, cols);
        let c = sample_covariance(&x);
        prop_assert!((&c - c.transpose()).amax() <= 1e-12 * c.amax().max(1e-300));
        prop_assert!(c.diagonal().iter().all(|v| *v >= 0.0));
    }
}
