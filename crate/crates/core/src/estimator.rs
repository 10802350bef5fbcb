//! Closed-loop state matrix from an ambient record:
//! `Â_c = Log(R̂(τ) Ĉ⁻¹) / (τ Δt)` with the principal matrix logarithm.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{condition_number, logm};
use crate::netmodel::Coords;
use crate::sim::Trajectory;

/// Condition number of `Ĉ + ridge·I` above which the inverse is refused.
pub const CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Divide lag sums by the window length `N`.
    #[default]
    Biased,
    /// Divide lag sums by the number of products, `N - τ`.
    Unbiased,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub tau_steps: usize,
    pub ridge: f64,
    pub coords: Coords,
    #[serde(default)]
    pub normalization: Normalization,
    /// Remove a per-channel linear trend instead of the window mean.
    #[serde(default)]
    pub detrend: bool,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            tau_steps: 1,
            ridge: 0.0,
            coords: Coords::ReferenceReduced(0),
            normalization: Normalization::Biased,
            detrend: false,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tau_steps == 0 {
            return Err(Error::Config("tau_steps must be at least 1".into()));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(Error::Config("ridge must be non-negative".into()));
        }
        if self.coords == Coords::Full && self.ridge == 0.0 {
            return Err(Error::Config(
                "full-coordinate estimation is experimental and needs an explicit ridge > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Stack the record into state rows for the chosen coordinates:
/// `[δ, ω]` or `[δ_i - δ_ref (i ≠ ref), ω]`.
pub fn state_samples(traj: &Trajectory, coords: Coords) -> Result<DMatrix<f64>> {
    let ng = traj.n_gen();
    let rows = traj.n_samples();
    match coords {
        Coords::Full => Ok(DMatrix::from_fn(rows, 2 * ng, |k, j| {
            if j < ng {
                traj.delta[(k, j)]
            } else {
                traj.omega[(k, j - ng)]
            }
        })),
        Coords::ReferenceReduced(r) => {
            if r >= ng {
                return Err(Error::Dimension(format!(
                    "reference machine {r} out of range 0..{ng}"
                )));
            }
            let angle: Vec<usize> = (0..ng).filter(|&i| i != r).collect();
            Ok(DMatrix::from_fn(rows, 2 * ng - 1, |k, j| {
                if j < ng - 1 {
                    traj.delta[(k, angle[j])] - traj.delta[(k, r)]
                } else {
                    traj.omega[(k, j - (ng - 1))]
                }
            }))
        }
    }
}

fn centered(x: &DMatrix<f64>, detrend: bool) -> DMatrix<f64> {
    let n = x.nrows();
    let mut out = x.clone();
    if detrend && n > 1 {
        let tm = (n as f64 - 1.0) / 2.0;
        let stt: f64 = (0..n).map(|k| (k as f64 - tm).powi(2)).sum();
        for mut col in out.column_iter_mut() {
            let mean = col.mean();
            let slope = col.iter().enumerate().map(|(k, v)| (k as f64 - tm) * (v - mean)).sum::<f64>() / stt;
            for (k, v) in col.iter_mut().enumerate() {
                *v -= mean + slope * (k as f64 - tm);
            }
        }
    } else {
        for mut col in out.column_iter_mut() {
            let mean = col.mean();
            col.add_scalar_mut(-mean);
        }
    }
    out
}

/// `(1/N) Σ_k (x_k - x̄)(x_k - x̄)ᵀ`, symmetrized.
pub fn sample_covariance(x: &DMatrix<f64>) -> DMatrix<f64> {
    covariance_of_centered(&centered(x, false))
}

fn covariance_of_centered(xc: &DMatrix<f64>) -> DMatrix<f64> {
    let n = xc.nrows() as f64;
    let c = xc.transpose() * xc / n;
    (&c + c.transpose()) * 0.5
}

/// `(1/N) Σ_{k=1}^{N-τ} (x_{k+τ} - x̄)(x_k - x̄)ᵀ` (or `1/(N-τ)` when unbiased).
pub fn sample_lag_correlation(x: &DMatrix<f64>, tau_steps: usize, normalization: Normalization) -> DMatrix<f64> {
    lag_of_centered(&centered(x, false), tau_steps, normalization)
}

fn lag_of_centered(xc: &DMatrix<f64>, tau: usize, normalization: Normalization) -> DMatrix<f64> {
    let n = xc.nrows();
    let dim = xc.ncols();
    if tau >= n {
        return DMatrix::zeros(dim, dim);
    }
    let m = n - tau;
    let lead = xc.rows(tau, m);
    let base = xc.rows(0, m);
    let denom = match normalization {
        Normalization::Biased => n as f64,
        Normalization::Unbiased => m as f64,
    };
    lead.transpose() * base / denom
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleStats {
    pub c_hat: DMatrix<f64>,
    pub r_hat: DMatrix<f64>,
    pub tau_steps: usize,
    pub dt: f64,
    pub n_samples: usize,
    pub labels: Vec<String>,
    pub coords: Coords,
}

impl SampleStats {
    pub fn from_trajectory(traj: &Trajectory, cfg: &EstimatorConfig) -> Result<Self> {
        cfg.validate()?;
        let x = state_samples(traj, cfg.coords)?;
        let n = x.nrows();
        if n <= cfg.tau_steps {
            return Err(Error::Config(format!(
                "{n} samples is not more than the lag {}",
                cfg.tau_steps
            )));
        }
        let xc = centered(&x, cfg.detrend);
        Ok(SampleStats {
            c_hat: covariance_of_centered(&xc),
            r_hat: lag_of_centered(&xc, cfg.tau_steps, cfg.normalization),
            tau_steps: cfg.tau_steps,
            dt: traj.dt,
            n_samples: n,
            labels: cfg.coords.labels(traj.n_gen()),
            coords: cfg.coords,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// 2-norm condition number of `Ĉ + ridge·I`.
    pub cond_c: f64,
    /// Spectral radius of `R̂ Ĉ⁻¹`.
    pub spectral_radius: f64,
    /// `||Im Log||_F / ||Log||_F`.
    pub imag_residual: f64,
    pub nonstationary: bool,
    pub square_roots: usize,
    pub tau_steps: usize,
    pub dt: f64,
    pub ridge: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub a_hat: DMatrix<f64>,
    pub labels: Vec<String>,
    pub coords: Coords,
    pub diagnostics: Diagnostics,
}

pub fn estimate_state_matrix(stats: &SampleStats, cfg: &EstimatorConfig) -> Result<Estimate> {
    cfg.validate()?;
    let dim = stats.c_hat.nrows();
    if stats.r_hat.shape() != (dim, dim) || dim == 0 {
        return Err(Error::Dimension("R̂ and Ĉ must be square and equal in size".into()));
    }
    let mut c = stats.c_hat.clone();
    for i in 0..dim {
        c[(i, i)] += cfg.ridge;
    }
    let cond_c = condition_number(&c);
    if !cond_c.is_finite() || cond_c > CONDITION_LIMIT {
        return Err(Error::IllConditioned { cond: cond_c });
    }
    // Φ = R̂ Ĉ⁻¹ = (Ĉ⁻¹ R̂ᵀ)ᵀ for symmetric Ĉ.
    let phi = match c.clone().cholesky() {
        Some(ch) => ch.solve(&stats.r_hat.transpose()).transpose(),
        None => c
            .lu()
            .solve(&stats.r_hat.transpose())
            .ok_or(Error::IllConditioned { cond: cond_c })?
            .transpose(),
    };
    let log = logm(&phi)?;
    let spectral_radius = log.spectral_radius();
    let nonstationary = spectral_radius >= 1.0;
    if nonstationary {
        log::warn!("spectral radius of R̂Ĉ⁻¹ is {spectral_radius:.6}; record looks nonstationary");
    }
    let lag = stats.tau_steps as f64 * stats.dt;
    Ok(Estimate {
        a_hat: log.real_part() / lag,
        labels: stats.labels.clone(),
        coords: stats.coords,
        diagnostics: Diagnostics {
            cond_c,
            spectral_radius,
            imag_residual: log.imaginary_residual(),
            nonstationary,
            square_roots: log.square_roots,
            tau_steps: stats.tau_steps,
            dt: stats.dt,
            ridge: cfg.ridge,
            n_samples: stats.n_samples,
        },
    })
}

/// Sample statistics and state-matrix estimate in one call.
pub fn estimate_from_trajectory(traj: &Trajectory, cfg: &EstimatorConfig) -> Result<Estimate> {
    let stats = SampleStats::from_trajectory(traj, cfg)?;
    estimate_state_matrix(&stats, cfg)
}

/// Write a square matrix as CSV with the state labels as header row.
pub fn write_matrix_csv(path: &Path, a: &DMatrix<f64>, labels: &[String]) -> Result<()> {
    if labels.len() != a.ncols() {
        return Err(Error::Dimension(format!("{} labels for {} columns", labels.len(), a.ncols())));
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(labels)?;
    for row in a.row_iter() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Read a square matrix CSV. A first row that does not parse as numbers is
/// taken as the label header.
pub fn read_matrix_csv(path: &Path) -> Result<(DMatrix<f64>, Option<Vec<String>>)> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(crate::error::open_file(path)?);
    let mut labels: Option<Vec<String>> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(|s| s.trim().parse::<f64>()).collect();
        match parsed {
            Ok(v) => rows.push(v),
            Err(_) if line == 0 => labels = Some(rec.iter().map(|s| s.trim().to_string()).collect()),
            Err(e) => return Err(Error::Format(format!("{}: row {}: {e}", path.display(), line + 1))),
        }
    }
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Format(format!("{}: matrix must be square and non-empty", path.display())));
    }
    if let Some(l) = &labels {
        if l.len() != n {
            return Err(Error::Format(format!("{}: {} labels for {n} columns", path.display(), l.len())));
        }
    }
    Ok((DMatrix::from_fn(n, n, |i, j| rows[i][j]), labels))
}
