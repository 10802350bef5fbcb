//! JSON model document: `machines{}`, `vscs{}` and `admittance{}` sections,
//! admittances as `[re, im]` pairs.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{c, MachineSet, SystemModel, VscSet};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;

#[derive(Debug, Clone, PartialEq)]
pub enum AdmittanceSource {
    /// Full bus admittance plus the buses to keep, in retained order.
    Full { matrix: CMatrix, retained: Vec<usize> },
    Reduced(CMatrix),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub machines: MachinesSection,
    #[serde(default)]
    pub vscs: VscsSection,
    pub admittance: AdmittanceSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MachinesSection {
    #[serde(default)]
    pub names: Vec<String>,
    pub inertia: Vec<f64>,
    pub damping: Vec<f64>,
    pub emf: Vec<f64>,
    pub p_mech: Vec<f64>,
    pub sigma: Vec<f64>,
    pub omega0: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct VscsSection {
    #[serde(default)]
    pub names: Vec<String>,
    #[serde(default)]
    pub p_ref: Vec<f64>,
    #[serde(default)]
    pub q_ref: Vec<f64>,
    #[serde(default)]
    pub k1: Vec<Vec<f64>>,
    #[serde(default)]
    pub k2: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AdmittanceSection {
    Full {
        full: Vec<Vec<[f64; 2]>>,
        retained: Vec<usize>,
    },
    Reduced {
        reduced: Vec<Vec<[f64; 2]>>,
    },
}

fn complex_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    m.row_iter()
        .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

fn complex_matrix(rows: &[Vec<[f64; 2]>], what: &str) -> Result<CMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Format(format!("admittance.{what} must be a square matrix")));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

fn real_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn real_matrix(rows: &[Vec<f64>], nrows: usize, ncols: usize, what: &str) -> Result<DMatrix<f64>> {
    if rows.is_empty() && nrows > 0 {
        // Missing gain matrix means no feedback.
        return Ok(DMatrix::zeros(nrows, ncols));
    }
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Format(format!("vscs.{what} must be {nrows}x{ncols}")));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

fn default_names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

impl From<&SystemModel> for ModelFile {
    fn from(model: &SystemModel) -> Self {
        let m = &model.machines;
        let v = &model.vscs;
        ModelFile {
            name: model.name.clone(),
            machines: MachinesSection {
                names: m.names.clone(),
                inertia: m.inertia.clone(),
                damping: m.damping.clone(),
                emf: m.emf.clone(),
                p_mech: m.p_mech.clone(),
                sigma: m.sigma.clone(),
                omega0: m.omega0,
            },
            vscs: VscsSection {
                names: v.names.clone(),
                p_ref: v.p_ref.clone(),
                q_ref: v.q_ref.clone(),
                k1: real_rows(&v.k1),
                k2: real_rows(&v.k2),
            },
            admittance: match &model.source {
                AdmittanceSource::Full { matrix, retained } => AdmittanceSection::Full {
                    full: complex_rows(matrix),
                    retained: retained.clone(),
                },
                AdmittanceSource::Reduced(y) => AdmittanceSection::Reduced {
                    reduced: complex_rows(y),
                },
            },
        }
    }
}

impl TryFrom<ModelFile> for SystemModel {
    type Error = Error;

    fn try_from(file: ModelFile) -> Result<Self> {
        let ms = file.machines;
        let n_gen = ms.inertia.len();
        let names = if ms.names.is_empty() {
            default_names("G", n_gen)
        } else {
            ms.names
        };
        let machines = MachineSet {
            names,
            inertia: ms.inertia,
            damping: ms.damping,
            emf: ms.emf,
            p_mech: ms.p_mech,
            sigma: ms.sigma,
            omega0: ms.omega0,
        };
        let vs = file.vscs;
        let n_vsc = vs.p_ref.len();
        let vscs = VscSet {
            names: if vs.names.is_empty() {
                default_names("VSC", n_vsc)
            } else {
                vs.names
            },
            p_ref: vs.p_ref,
            q_ref: vs.q_ref,
            k1: real_matrix(&vs.k1, n_vsc, n_gen, "k1")?,
            k2: real_matrix(&vs.k2, n_vsc, n_gen, "k2")?,
        };
        let source = match file.admittance {
            AdmittanceSection::Full { full, retained } => AdmittanceSource::Full {
                matrix: complex_matrix(&full, "full")?,
                retained,
            },
            AdmittanceSection::Reduced { reduced } => {
                AdmittanceSource::Reduced(complex_matrix(&reduced, "reduced")?)
            }
        };
        SystemModel::new(file.name, machines, vscs, source)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SINGLE: &str = r#"{
        "machines": {"inertia": [10.0], "damping": [1.0], "emf": [1.0],
                     "p_mech": [0.0], "sigma": [0.05], "omega0": 376.99111843077515},
        "vscs": {"p_ref": [0.0], "q_ref": [0.0], "k1": [[2.0]]},
        "admittance": {"reduced": [[[0.0, -5.0], [0.0, 5.0]], [[0.0, 5.0], [0.0, -5.0]]]}
    }"#;

    #[test]
    fn parses_reduced_document_with_defaults() {
        let model = SystemModel::from_json(SINGLE).unwrap();
        assert_eq!(model.machines.names, vec!["G1"]);
        assert_eq!(model.vscs.names, vec!["VSC1"]);
        assert_eq!(model.vscs.k1[(0, 0)], 2.0);
        assert_eq!(model.vscs.k2[(0, 0)], 0.0);
        assert_eq!(model.network.b()[(0, 1)], 5.0);
        let again = SystemModel::from_json(&model.to_json().unwrap()).unwrap();
        assert_eq!(again, model);
        assert_eq!(again.content_hash(), model.content_hash());
    }

    #[test]
    fn rejects_wrong_dimension() {
        let text = SINGLE.replace(r#""p_ref": [0.0], "q_ref": [0.0], "k1": [[2.0]]"#, "");
        let err = SystemModel::from_json(&text).unwrap_err();
        assert!(matches!(err, Error::InvalidModel(_)), "{err}");
    }

    #[test]
    fn full_form_is_reduced_on_load() {
        let text = r#"{
            "machines": {"inertia": [10.0], "damping": [1.0], "emf": [1.0],
                         "p_mech": [0.0], "sigma": [0.0], "omega0": 1.0},
            "vscs": {"p_ref": [0.0], "q_ref": [0.0]},
            "admittance": {"full": [[[0,-5],[0,0],[0,5]], [[0,0],[0,-5],[0,5]], [[0,5],[0,5],[0,-10]]],
                           "retained": [0, 1]}
        }"#;
        let model = SystemModel::from_json(text).unwrap();
        assert!((model.network.b()[(0, 0)] + 2.5).abs() < 1e-14);
        assert!((model.network.b()[(0, 1)] - 2.5).abs() < 1e-14);
    }
}
