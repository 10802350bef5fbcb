//! Electromechanical modes, mode shapes, participation factors, and
//! truth-versus-estimate comparison tables.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigen_decompose, CMatrix, EigenDecomposition};

/// `|Im λ|` above which an eigenvalue counts as oscillatory (rad/s).
pub const OSCILLATORY_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSource {
    Truth,
    Estimated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    /// Representative eigenvalue with `Im λ > 0`.
    pub lambda: Complex64,
    /// Damped frequency `Im λ / 2π` in Hz.
    pub freq: f64,
    /// Damping ratio `-Re λ / |λ|` (fraction, not percent).
    pub damping: f64,
    /// Speed-state components of the right eigenvector, unit max magnitude,
    /// zero phase at the largest entry.
    pub shape: Vec<Complex64>,
    /// Participation over all states, summing to 1.
    pub participation: Vec<f64>,
}

impl Mode {
    pub fn damping_percent(&self) -> f64 {
        100.0 * self.damping
    }

    /// Index of the largest participation entry.
    pub fn dominant_state(&self) -> usize {
        argmax(&self.participation)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    /// Oscillatory modes sorted by ascending frequency.
    pub modes: Vec<Mode>,
    pub real_eigenvalues: Vec<f64>,
    pub source: ModeSource,
    pub state_labels: Vec<String>,
}

impl ModeSet {
    /// Mode with the smallest damping ratio.
    pub fn least_damped(&self) -> Option<(usize, &Mode)> {
        self.modes
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.damping.total_cmp(&b.1.damping))
    }

    /// Names of the speed states that make up each shape vector.
    pub fn shape_labels(&self) -> Vec<String> {
        speed_indices(&self.state_labels)
            .into_iter()
            .map(|i| self.state_labels[i].clone())
            .collect()
    }
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// Indices of the speed states: labels starting with `omega`, or every state
/// when no label does.
fn speed_indices(labels: &[String]) -> Vec<usize> {
    let speeds: Vec<usize> = labels
        .iter()
        .enumerate()
        .filter(|(_, l)| l.starts_with("omega"))
        .map(|(i, _)| i)
        .collect();
    if speeds.is_empty() {
        (0..labels.len()).collect()
    } else {
        speeds
    }
}

/// Scale to unit max magnitude with zero phase at the largest component.
pub fn normalize_shape(v: &[Complex64]) -> Vec<Complex64> {
    let Some((_, pivot)) = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
    else {
        return Vec::new();
    };
    if pivot.norm() == 0.0 {
        return v.to_vec();
    }
    let p = *pivot;
    v.iter().map(|z| z / p).collect()
}

/// Raw sensitivities `V_ki W_ik = ∂λ_i/∂a_kk` (states × eigenvalues).
pub fn raw_participation(decomp: &EigenDecomposition) -> CMatrix {
    let n = decomp.values.len();
    CMatrix::from_fn(n, n, |k, i| decomp.right[(k, i)] * decomp.left[(i, k)])
}

/// Participation factors `p_ki = |V_ki W_ik| / Σ_k |V_ki W_ik|`, columns
/// ordered as the eigenvalues of the decomposition.
pub fn participation_from(decomp: &EigenDecomposition) -> DMatrix<f64> {
    let raw = raw_participation(decomp);
    let mut p = raw.map(|z| z.norm());
    for mut col in p.column_iter_mut() {
        let s = col.sum();
        if s > 0.0 {
            col /= s;
        }
    }
    p
}

/// Participation factors for every eigenvalue of `a` (states × eigenvalues,
/// in the order of [`eigen_decompose`]).
pub fn participation_factors(a: &DMatrix<f64>) -> Result<(Vec<Complex64>, DMatrix<f64>)> {
    check_square(a)?;
    let decomp = eigen_decompose(a)?;
    let p = participation_from(&decomp);
    Ok((decomp.values, p))
}

fn check_square(a: &DMatrix<f64>) -> Result<()> {
    if !a.is_square() || a.nrows() == 0 {
        return Err(Error::Dimension(format!(
            "state matrix must be square and non-empty, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("state matrix has non-finite entries".into()));
    }
    Ok(())
}

pub fn eigen_modes(a: &DMatrix<f64>, labels: &[String], source: ModeSource) -> Result<ModeSet> {
    check_square(a)?;
    let n = a.nrows();
    if labels.len() != n {
        return Err(Error::Dimension(format!(
            "{} labels for a {n}-state matrix",
            labels.len()
        )));
    }
    let decomp = eigen_decompose(a)?;
    let p = participation_from(&decomp);
    let speeds = speed_indices(labels);

    let mut modes = Vec::new();
    let mut real_eigenvalues = Vec::new();
    for (i, &lambda) in decomp.values.iter().enumerate() {
        if lambda.im.abs() <= OSCILLATORY_THRESHOLD {
            real_eigenvalues.push(lambda.re);
            continue;
        }
        if lambda.im < 0.0 {
            continue;
        }
        let shape: Vec<Complex64> = speeds.iter().map(|&k| decomp.right[(k, i)]).collect();
        modes.push(Mode {
            lambda,
            freq: lambda.im / (2.0 * PI),
            damping: -lambda.re / lambda.norm(),
            shape: normalize_shape(&shape),
            participation: p.column(i).iter().copied().collect(),
        });
    }
    modes.sort_by(|a, b| a.freq.total_cmp(&b.freq));
    real_eigenvalues.sort_by(|a, b| b.total_cmp(a));
    Ok(ModeSet {
        modes,
        real_eigenvalues,
        source,
        state_labels: labels.to_vec(),
    })
}

/// Modulus of the normalized inner product; invariant to a global phase.
pub fn shape_compare(a: &[Complex64], b: &[Complex64]) -> f64 {
    let na: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if a.len() != b.len() || na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let dot: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    (dot.norm() / (na * nb)).min(1.0)
}

/// Signed relative error in percent, `(estimate - truth) / truth · 100`.
pub fn percent_error(truth: f64, estimate: f64) -> f64 {
    100.0 * (estimate - truth) / truth
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModePair {
    /// 1-based row number in ascending truth frequency.
    pub mode: usize,
    pub truth_index: usize,
    pub estimate_index: usize,
    pub f_truth: f64,
    pub f_est: f64,
    pub f_err_pct: f64,
    /// Damping ratios in percent.
    pub zeta_truth: f64,
    pub zeta_est: f64,
    pub zeta_err_pct: f64,
    pub shape_alignment: f64,
    /// Max absolute participation difference over states.
    pub participation_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ModeComparison {
    pub pairs: Vec<ModePair>,
    pub unmatched_truth: Vec<usize>,
    pub unmatched_estimate: Vec<usize>,
}

impl ModeComparison {
    pub fn pair_for_truth(&self, truth_index: usize) -> Option<&ModePair> {
        self.pairs.iter().find(|p| p.truth_index == truth_index)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["mode", "f_a", "f_e", "f_err_pct", "zeta_a", "zeta_e", "zeta_err_pct"])?;
        for p in &self.pairs {
            w.write_record([
                p.mode.to_string(),
                p.f_truth.to_string(),
                p.f_est.to_string(),
                p.f_err_pct.to_string(),
                p.zeta_truth.to_string(),
                p.zeta_est.to_string(),
                p.zeta_err_pct.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Greedy nearest-neighbour pairing in the complex plane, closest pairs
/// first, ties broken by truth frequency.
pub fn match_modes(truth: &ModeSet, est: &ModeSet) -> ModeComparison {
    let mut candidates = Vec::new();
    for (i, t) in truth.modes.iter().enumerate() {
        for (j, e) in est.modes.iter().enumerate() {
            candidates.push(((t.lambda - e.lambda).norm(), t.freq, i, j));
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut used_t = vec![false; truth.modes.len()];
    let mut used_e = vec![false; est.modes.len()];
    let mut pairs = Vec::new();
    for (_, _, i, j) in candidates {
        if used_t[i] || used_e[j] {
            continue;
        }
        used_t[i] = true;
        used_e[j] = true;
        let (t, e) = (&truth.modes[i], &est.modes[j]);
        let participation_error = if t.participation.len() == e.participation.len() {
            t.participation
                .iter()
                .zip(&e.participation)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        } else {
            f64::NAN
        };
        pairs.push(ModePair {
            mode: i + 1,
            truth_index: i,
            estimate_index: j,
            f_truth: t.freq,
            f_est: e.freq,
            f_err_pct: percent_error(t.freq, e.freq),
            zeta_truth: t.damping_percent(),
            zeta_est: e.damping_percent(),
            zeta_err_pct: percent_error(t.damping, e.damping),
            shape_alignment: shape_compare(&t.shape, &e.shape),
            participation_error,
        });
    }
    pairs.sort_by_key(|p| p.truth_index);
    ModeComparison {
        pairs,
        unmatched_truth: (0..used_t.len()).filter(|&i| !used_t[i]).collect(),
        unmatched_estimate: (0..used_e.len()).filter(|&j| !used_e[j]).collect(),
    }
}

/// Mode shapes as CSV: one row per (mode, speed state) with magnitude and
/// phase in degrees.
pub fn write_shapes_csv<W: Write>(set: &ModeSet, out: W) -> Result<()> {
    let labels = set.shape_labels();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["mode", "freq_hz", "state", "re", "im", "magnitude", "phase_deg"])?;
    for (m, mode) in set.modes.iter().enumerate() {
        for (z, label) in mode.shape.iter().zip(&labels) {
            w.write_record([
                (m + 1).to_string(),
                mode.freq.to_string(),
                label.clone(),
                z.re.to_string(),
                z.im.to_string(),
                z.norm().to_string(),
                z.arg().to_degrees().to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Participation factors as CSV: one row per state, one column per mode.
pub fn write_participation_csv<W: Write>(set: &ModeSet, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["state".to_string()];
    header.extend((1..=set.modes.len()).map(|m| format!("mode_{m}")));
    w.write_record(&header)?;
    for (k, label) in set.state_labels.iter().enumerate() {
        let mut row = vec![label.clone()];
        row.extend(set.modes.iter().map(|m| m.participation[k].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Mode list as CSV: mode, frequency, damping (percent), eigenvalue.
pub fn write_modes_csv<W: Write>(set: &ModeSet, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["mode", "freq_hz", "damping_pct", "re", "im"])?;
    for (m, mode) in set.modes.iter().enumerate() {
        w.write_record([
            (m + 1).to_string(),
            mode.freq.to_string(),
            mode.damping_percent().to_string(),
            mode.lambda.re.to_string(),
            mode.lambda.im.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
