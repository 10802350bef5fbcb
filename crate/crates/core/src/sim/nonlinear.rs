use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};

use super::{NoiseChannel, Scheme, SimConfig, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::ensure_hurwitz;
use crate::netmodel::{
    injections_with_diagonal_scale, solve_network_for_targets, SystemModel,
};

struct Drift {
    d_delta: Vec<f64>,
    d_omega: Vec<f64>,
    theta: Vec<f64>,
    v: Vec<f64>,
}

struct Dynamics<'a> {
    model: &'a SystemModel,
    p_mech: Vec<f64>,
}

impl Dynamics<'_> {
    /// Swing-equation drift with the VSC references following the speed
    /// feedback `P_vs + K1 (ω - 1)`, `Q_vs + K2 (ω - 1)`.
    fn eval(
        &self,
        delta: &[f64],
        omega: &[f64],
        guess: (&[f64], &[f64]),
        diag_scale: Option<&[f64]>,
    ) -> Result<Drift> {
        let model = self.model;
        let m = &model.machines;
        let vsc = &model.vscs;
        let ng = model.n_gen();
        let nv = model.n_vsc();
        let mut p_target = vsc.p_ref.clone();
        let mut q_target = vsc.q_ref.clone();
        for k in 0..nv {
            for i in 0..ng {
                let dw = omega[i] - 1.0;
                p_target[k] += vsc.k1[(k, i)] * dw;
                q_target[k] += vsc.k2[(k, i)] * dw;
            }
        }
        let net = solve_network_for_targets(model, delta, &p_target, &q_target, Some(guess))?;
        let inj = injections_with_diagonal_scale(model, delta, &net.theta, &net.v, diag_scale);
        let d_delta = omega.iter().map(|w| m.omega0 * (w - 1.0)).collect();
        let d_omega = (0..ng)
            .map(|i| (self.p_mech[i] - inj.p_e[i] - m.damping[i] * (omega[i] - 1.0)) / m.inertia[i])
            .collect();
        Ok(Drift {
            d_delta,
            d_omega,
            theta: net.theta,
            v: net.v,
        })
    }
}

/// Integrate the stochastic swing dynamics from the equilibrium and record
/// `(δ, ω)` every `dt` after the burn-in.
///
/// The speed equation receives `-M⁻¹E²GΣ √h z` per step of length `h`,
/// the white-noise reading of the load fluctuations.
pub fn simulate_nonlinear(model: &SystemModel, cfg: &SimConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if cfg.scheme == Scheme::Exact {
        return Err(Error::Config(
            "exact stepping is only available for linear simulation".into(),
        ));
    }
    let lin = model.linearize()?;
    if let Err(e) = lin.reduced(lin.point.reference).and_then(|ss| ensure_hurwitz(&ss.a_c)) {
        log::warn!("closed-loop linearization is not Hurwitz ({e}); trajectory may not be stationary");
    }
    let point = lin.point;
    let ng = model.n_gen();
    let dyn_ = Dynamics {
        model,
        p_mech: point.p_e0.clone(),
    };
    let gain = model.noise_gain();
    let sigma = &model.machines.sigma;

    let h = cfg.dt / cfg.substeps as f64;
    let sqrt_h = h.sqrt();
    let burn = cfg.burn_in_samples();
    let n = cfg.n_samples();
    let mut rng = cfg.rng();

    let mut delta = point.delta0.clone();
    let mut omega = vec![1.0; ng];
    let mut theta = point.theta0.clone();
    let mut v = point.v0.clone();
    let mut out_delta = DMatrix::zeros(n, ng);
    let mut out_omega = DMatrix::zeros(n, ng);
    let mut z = vec![0.0; ng];
    let mut scale = vec![1.0; ng];
    let mut step = 0usize;

    for k in 0..(burn + n) {
        if k >= burn {
            let row = k - burn;
            for i in 0..ng {
                out_delta[(row, i)] = delta[i];
                out_omega[(row, i)] = omega[i];
            }
        }
        if k + 1 == burn + n {
            break;
        }
        for _ in 0..cfg.substeps {
            for zi in z.iter_mut() {
                *zi = StandardNormal.sample(&mut rng);
            }
            let (noise, diag): (Vec<f64>, Option<&[f64]>) = match cfg.channel {
                NoiseChannel::Additive => ((0..ng).map(|i| gain[i] * sqrt_h * z[i]).collect(), None),
                NoiseChannel::Multiplicative => {
                    for i in 0..ng {
                        scale[i] = 1.0 + sigma[i] * z[i] / sqrt_h;
                    }
                    (vec![0.0; ng], Some(&scale[..]))
                }
            };
            let abort = |e| Error::SimulationAborted {
                step,
                source: Box::new(e),
            };
            let f0 = dyn_.eval(&delta, &omega, (&theta, &v), diag).map_err(abort)?;
            let (next_delta, next_omega, sol) = match cfg.scheme {
                Scheme::EulerMaruyama => {
                    let nd: Vec<f64> = (0..ng).map(|i| delta[i] + h * f0.d_delta[i]).collect();
                    let nw: Vec<f64> =
                        (0..ng).map(|i| omega[i] + h * f0.d_omega[i] + noise[i]).collect();
                    (nd, nw, (f0.theta, f0.v))
                }
                _ => {
                    let pd: Vec<f64> = (0..ng).map(|i| delta[i] + h * f0.d_delta[i]).collect();
                    let pw: Vec<f64> =
                        (0..ng).map(|i| omega[i] + h * f0.d_omega[i] + noise[i]).collect();
                    let f1 = dyn_
                        .eval(&pd, &pw, (&f0.theta, &f0.v), diag)
                        .map_err(abort)?;
                    let nd: Vec<f64> = (0..ng)
                        .map(|i| delta[i] + 0.5 * h * (f0.d_delta[i] + f1.d_delta[i]))
                        .collect();
                    let nw: Vec<f64> = (0..ng)
                        .map(|i| omega[i] + 0.5 * h * (f0.d_omega[i] + f1.d_omega[i]) + noise[i])
                        .collect();
                    (nd, nw, (f0.theta, f0.v))
                }
            };
            if next_delta.iter().chain(&next_omega).any(|x| !x.is_finite()) {
                return Err(Error::Divergence { step });
            }
            delta = next_delta;
            omega = next_omega;
            theta = sol.0;
            v = sol.1;
            step += 1;
        }
    }
    Trajectory::new(
        burn as f64 * cfg.dt,
        cfg.dt,
        out_delta,
        out_omega,
        model.machines.names.clone(),
    )
}
