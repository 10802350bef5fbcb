//! Trajectory CSV (`time,delta_1..delta_n,omega_1..omega_n`) with a JSON
//! sidecar of the same basename carrying dt, seed and the model hash.
//!
//! Values are written with Rust's shortest round-trip float formatting, so a
//! written-then-read trajectory is bit-identical.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{NoiseSpec, Trajectory};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub dt: f64,
    pub t0: f64,
    pub n_gen: usize,
    pub n_samples: usize,
    pub labels: Vec<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub model_hash: Option<String>,
    #[serde(default)]
    pub measurement_noise: Option<NoiseSpec>,
}

impl TrajectoryMeta {
    pub fn for_trajectory(traj: &Trajectory) -> Self {
        TrajectoryMeta {
            dt: traj.dt,
            t0: traj.t0,
            n_gen: traj.n_gen(),
            n_samples: traj.n_samples(),
            labels: traj.labels.clone(),
            seed: None,
            model_hash: None,
            measurement_noise: None,
        }
    }
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn write_trajectory(path: &Path, traj: &Trajectory, meta: &TrajectoryMeta) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let n = traj.n_gen();
    let mut header = vec!["time".to_string()];
    header.extend((1..=n).map(|i| format!("delta_{i}")));
    header.extend((1..=n).map(|i| format!("omega_{i}")));
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(2 * n + 1);
    for k in 0..traj.n_samples() {
        row.clear();
        row.push(traj.time(k).to_string());
        row.extend(traj.delta.row(k).iter().map(|x| x.to_string()));
        row.extend(traj.omega.row(k).iter().map(|x| x.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    let mut text = serde_json::to_string_pretty(meta)?;
    text.push('\n');
    std::fs::write(sidecar_path(path), text)?;
    Ok(())
}

/// Read a trajectory CSV; the sidecar, when present, supplies `dt`, `t0` and
/// the machine labels.
pub fn read_trajectory(path: &Path) -> Result<(Trajectory, Option<TrajectoryMeta>)> {
    let mut r = csv::Reader::from_reader(crate::error::open_file(path)?);
    let header: Vec<String> = r.headers()?.iter().map(|s| s.trim().to_string()).collect();
    if header.first().map(String::as_str) != Some("time") || header.len() < 3 || header.len().is_multiple_of(2) {
        return Err(Error::Format(format!(
            "{}: expected header time,delta_1..delta_n,omega_1..omega_n",
            path.display()
        )));
    }
    let n = (header.len() - 1) / 2;
    for i in 0..n {
        if header[1 + i] != format!("delta_{}", i + 1) || header[1 + n + i] != format!("omega_{}", i + 1) {
            return Err(Error::Format(format!("{}: unexpected column order", path.display())));
        }
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(Error::Format(format!("row {} has {} fields", line + 2, rec.len())));
        }
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(|s| s.trim().parse::<f64>()).collect();
        let parsed = parsed.map_err(|e| Error::Format(format!("row {}: {e}", line + 2)))?;
        times.push(parsed[0]);
        values.extend_from_slice(&parsed[1..]);
    }
    let rows = times.len();
    if rows < 2 {
        return Err(Error::Format("trajectory needs at least two samples".into()));
    }
    let width = 2 * n;
    let delta = DMatrix::from_fn(rows, n, |k, i| values[k * width + i]);
    let omega = DMatrix::from_fn(rows, n, |k, i| values[k * width + n + i]);

    let side = sidecar_path(path);
    let meta: Option<TrajectoryMeta> = if side.exists() {
        Some(serde_json::from_str(&std::fs::read_to_string(&side)?)?)
    } else {
        None
    };
    let (t0, dt, labels) = match &meta {
        Some(m) => (m.t0, m.dt, m.labels.clone()),
        None => (
            times[0],
            (times[rows - 1] - times[0]) / (rows - 1) as f64,
            (1..=n).map(|i| format!("G{i}")).collect(),
        ),
    };
    Ok((Trajectory::new(t0, dt, delta, omega, labels)?, meta))
}
