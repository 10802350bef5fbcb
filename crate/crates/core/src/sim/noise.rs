use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::error::{Error, Result};

/// i.i.d. Gaussian measurement noise on the recorded channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Angle noise standard deviation (rad).
    pub std_delta: f64,
    /// Speed noise standard deviation (pu).
    pub std_omega: f64,
    pub seed: u64,
}

impl NoiseSpec {
    /// PMU-grade noise: 1e-3 rad on angles, 1e-6 pu on speeds.
    pub fn pmu(seed: u64) -> Self {
        NoiseSpec {
            std_delta: 1e-3,
            std_omega: 1e-6,
            seed,
        }
    }
}

pub fn add_measurement_noise(traj: &Trajectory, spec: &NoiseSpec) -> Result<Trajectory> {
    if !(spec.std_delta >= 0.0 && spec.std_omega >= 0.0) {
        return Err(Error::Config("noise standard deviations must be non-negative".into()));
    }
    let mut out = traj.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = traj.n_gen();
    for k in 0..traj.n_samples() {
        for i in 0..n {
            let z: f64 = StandardNormal.sample(&mut rng);
            if spec.std_delta > 0.0 {
                out.delta[(k, i)] += spec.std_delta * z;
            }
        }
        for i in 0..n {
            let z: f64 = StandardNormal.sample(&mut rng);
            if spec.std_omega > 0.0 {
                out.omega[(k, i)] += spec.std_omega * z;
            }
        }
    }
    Ok(out)
}
