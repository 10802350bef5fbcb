//! Emulated ambient PMU records: stochastic integration of the swing
//! dynamics with VSC speed feedback, linear Ornstein-Uhlenbeck simulation,
//! measurement noise, and the analytic covariance / lag-correlation oracles.

mod io;
mod linear;
mod noise;
mod nonlinear;
mod oracle;

pub use io::{read_trajectory, sidecar_path, write_trajectory, TrajectoryMeta};
pub use linear::{simulate_linear_ou, simulate_ou, LinearSimOptions};
pub use noise::{add_measurement_noise, NoiseSpec};
pub use nonlinear::simulate_nonlinear;
pub use oracle::{analytic_lag_correlation, lyapunov_covariance};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Time-stepping scheme for the stochastic integrators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    EulerMaruyama,
    /// Predictor-corrector (stochastic Heun) with additive noise.
    Heun,
    /// Exact-in-distribution transition; linear systems only.
    Exact,
}

/// How load fluctuations enter the nonlinear drift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseChannel {
    /// Added to the speed equation through `S`.
    Additive,
    /// Generator-bus diagonal admittances rescaled by `1 + σ_i η_i` inside
    /// the injection evaluation.
    Multiplicative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Sampling period (s).
    pub dt: f64,
    /// Recorded window length (s).
    pub duration: f64,
    pub seed: u64,
    /// Discarded initial span (s).
    pub burn_in: f64,
    /// Integration steps per sample.
    pub substeps: usize,
    pub scheme: Scheme,
    pub channel: NoiseChannel,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 0.02,
            duration: 300.0,
            seed: 1,
            burn_in: 20.0,
            substeps: 4,
            scheme: Scheme::Heun,
            channel: NoiseChannel::Additive,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::Config(format!(
                "duration must be positive, got {}",
                self.duration
            )));
        }
        if !(self.burn_in >= 0.0 && self.burn_in.is_finite()) {
            return Err(Error::Config(format!(
                "burn_in must be non-negative, got {}",
                self.burn_in
            )));
        }
        if self.substeps == 0 {
            return Err(Error::Config("substeps must be at least 1".into()));
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        ((self.duration / self.dt).round() as usize).max(1)
    }

    pub fn burn_in_samples(&self) -> usize {
        (self.burn_in / self.dt).round() as usize
    }

    pub(crate) fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Uniformly sampled rotor angles (rad) and speeds (pu), one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t0: f64,
    pub dt: f64,
    pub delta: DMatrix<f64>,
    pub omega: DMatrix<f64>,
    pub labels: Vec<String>,
}

impl Trajectory {
    pub fn new(t0: f64, dt: f64, delta: DMatrix<f64>, omega: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        if delta.shape() != omega.shape() {
            return Err(Error::Dimension(format!(
                "delta is {:?} but omega is {:?}",
                delta.shape(),
                omega.shape()
            )));
        }
        if labels.len() != delta.ncols() {
            return Err(Error::Dimension(format!(
                "{} labels for {} machines",
                labels.len(),
                delta.ncols()
            )));
        }
        if !(dt > 0.0) {
            return Err(Error::Config("trajectory dt must be positive".into()));
        }
        Ok(Trajectory {
            t0,
            dt,
            delta,
            omega,
            labels,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.delta.nrows()
    }

    pub fn n_gen(&self) -> usize {
        self.delta.ncols()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }
}
