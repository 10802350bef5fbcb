//! Ground-truth small-signal model of a classical multi-machine system with
//! voltage-source converters modeled as controllable P/Q injections.
//!
//! All passive buses are Kron-reduced away; the retained network holds the
//! generator internal buses first, then the VSC buses. Injections are the
//! standard polar power-flow forms, positive into the network.

mod file;
mod kron;
mod linearize;
mod power;

pub use file::{AdmittanceSource, ModelFile};
pub use kron::kron_reduce;
pub use linearize::{
    closed_loop_direct, closed_loop_matrix, jacobian_blocks, open_loop_matrices, reduce_algebraic,
    reduce_reference, AlgebraicReduction, JacobianBlocks, Linearization,
};
pub use power::{
    injections, injections_with_diagonal_scale, solve_equilibrium, solve_network,
    solve_network_for_targets, Injections, NetworkSolution, NEWTON_MAX_ITER, NEWTON_TOL,
};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct MachineSet {
    pub names: Vec<String>,
    /// `M_i` in s·pu.
    pub inertia: Vec<f64>,
    pub damping: Vec<f64>,
    /// Internal EMF behind transient reactance.
    pub emf: Vec<f64>,
    pub p_mech: Vec<f64>,
    /// Load fluctuation intensities `σ_i`.
    pub sigma: Vec<f64>,
    /// Base angular speed (rad/s).
    pub omega0: f64,
}

impl MachineSet {
    pub fn n_gen(&self) -> usize {
        self.inertia.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.n_gen();
        if n == 0 {
            return Err(Error::InvalidModel("at least one machine is required".into()));
        }
        for (name, len) in [
            ("names", self.names.len()),
            ("damping", self.damping.len()),
            ("emf", self.emf.len()),
            ("p_mech", self.p_mech.len()),
            ("sigma", self.sigma.len()),
        ] {
            if len != n {
                return Err(Error::InvalidModel(format!(
                    "machines.{name} has length {len}, expected {n}"
                )));
            }
        }
        let check = |field: &str, values: &[f64], ok: fn(f64) -> bool| -> Result<()> {
            match values.iter().position(|&x| !x.is_finite() || !ok(x)) {
                Some(i) => Err(Error::InvalidModel(format!(
                    "machines.{field}[{i}] = {} violates its bound",
                    values[i]
                ))),
                None => Ok(()),
            }
        };
        check("inertia", &self.inertia, |x| x > 0.0)?;
        check("damping", &self.damping, |x| x >= 0.0)?;
        check("emf", &self.emf, |x| x > 0.0)?;
        check("p_mech", &self.p_mech, |_| true)?;
        check("sigma", &self.sigma, |x| x >= 0.0)?;
        if !(self.omega0 > 0.0 && self.omega0.is_finite()) {
            return Err(Error::InvalidModel("machines.omega0 must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VscSet {
    pub names: Vec<String>,
    pub p_ref: Vec<f64>,
    pub q_ref: Vec<f64>,
    /// Active-power speed feedback, `N_v x N_g`.
    pub k1: DMatrix<f64>,
    /// Reactive-power speed feedback, `N_v x N_g`.
    pub k2: DMatrix<f64>,
}

impl VscSet {
    pub fn empty(n_gen: usize) -> Self {
        VscSet {
            names: Vec::new(),
            p_ref: Vec::new(),
            q_ref: Vec::new(),
            k1: DMatrix::zeros(0, n_gen),
            k2: DMatrix::zeros(0, n_gen),
        }
    }

    pub fn n_vsc(&self) -> usize {
        self.p_ref.len()
    }

    /// Stacked feedback `[K1; K2]`, `2N_v x N_g`.
    pub fn gain(&self) -> DMatrix<f64> {
        let (nv, ng) = self.k1.shape();
        let mut k = DMatrix::zeros(2 * nv, ng);
        k.rows_mut(0, nv).copy_from(&self.k1);
        k.rows_mut(nv, nv).copy_from(&self.k2);
        k
    }

    fn validate(&self, n_gen: usize) -> Result<()> {
        let n = self.n_vsc();
        if self.q_ref.len() != n || self.names.len() != n {
            return Err(Error::InvalidModel(format!(
                "vscs vectors disagree in length (p_ref {n}, q_ref {}, names {})",
                self.q_ref.len(),
                self.names.len()
            )));
        }
        for (name, k) in [("k1", &self.k1), ("k2", &self.k2)] {
            if k.shape() != (n, n_gen) {
                return Err(Error::InvalidModel(format!(
                    "vscs.{name} is {}x{}, expected {n}x{n_gen}",
                    k.nrows(),
                    k.ncols()
                )));
            }
            if k.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidModel(format!("vscs.{name} has non-finite entries")));
            }
        }
        if self.p_ref.iter().chain(&self.q_ref).any(|x| !x.is_finite()) {
            return Err(Error::InvalidModel("vscs references must be finite".into()));
        }
        Ok(())
    }
}

/// Admittance over the retained buses (generator internal buses, then VSC
/// buses). Real and imaginary parts are cached for the injection kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedAdmittance {
    pub y: CMatrix,
    g: DMatrix<f64>,
    b: DMatrix<f64>,
}

impl ReducedAdmittance {
    pub fn new(y: CMatrix) -> Self {
        let g = y.map(|z| z.re);
        let b = y.map(|z| z.im);
        ReducedAdmittance { y, g, b }
    }

    pub fn dim(&self) -> usize {
        self.y.nrows()
    }

    pub fn g(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let scale = self.y.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        (&self.y - self.y.transpose()).iter().all(|z| z.norm() <= tol * scale)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    pub name: Option<String>,
    pub machines: MachineSet,
    pub vscs: VscSet,
    pub source: AdmittanceSource,
    pub network: ReducedAdmittance,
}

impl SystemModel {
    pub fn new(
        name: Option<String>,
        machines: MachineSet,
        vscs: VscSet,
        source: AdmittanceSource,
    ) -> Result<Self> {
        machines.validate()?;
        vscs.validate(machines.n_gen())?;
        let network = match &source {
            AdmittanceSource::Full { matrix, retained } => kron_reduce(matrix, retained)?,
            AdmittanceSource::Reduced(y) => ReducedAdmittance::new(y.clone()),
        };
        let dim = machines.n_gen() + vscs.n_vsc();
        if network.y.shape() != (dim, dim) {
            return Err(Error::InvalidModel(format!(
                "reduced admittance is {}x{}, expected {dim}x{dim} (generators then VSC buses)",
                network.y.nrows(),
                network.y.ncols()
            )));
        }
        if network.y.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidModel("admittance has non-finite entries".into()));
        }
        if !network.is_symmetric(1e-10) {
            return Err(Error::InvalidModel("reduced admittance must be symmetric".into()));
        }
        Ok(SystemModel {
            name,
            machines,
            vscs,
            source,
            network,
        })
    }

    pub fn n_gen(&self) -> usize {
        self.machines.n_gen()
    }

    pub fn n_vsc(&self) -> usize {
        self.vscs.n_vsc()
    }

    /// Diagonal conductances `G_ii` at the generator buses.
    pub fn generator_conductance(&self) -> Vec<f64> {
        (0..self.n_gen()).map(|i| self.network.g()[(i, i)]).collect()
    }

    /// Per-machine gain of the speed noise, `-E_i² G_ii σ_i / M_i`.
    pub fn noise_gain(&self) -> Vec<f64> {
        let m = &self.machines;
        self.generator_conductance()
            .iter()
            .enumerate()
            .map(|(i, g)| -m.emf[i] * m.emf[i] * g * m.sigma[i] / m.inertia[i])
            .collect()
    }

    pub fn with_sigma(&self, sigma: f64) -> Self {
        let mut out = self.clone();
        out.machines.sigma = vec![sigma; self.n_gen()];
        out
    }

    pub fn with_feedback(&self, k1: DMatrix<f64>, k2: DMatrix<f64>) -> Result<Self> {
        let mut out = self.clone();
        out.vscs.k1 = k1;
        out.vscs.k2 = k2;
        out.vscs.validate(self.n_gen())?;
        Ok(out)
    }

    /// Linearize around the solved equilibrium.
    pub fn linearize(&self) -> Result<Linearization> {
        Linearization::new(self)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        SystemModel::try_from(file)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        SystemModel::from_json(&crate::error::read_text(path)?)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    /// SHA-256 of the compact serialized model.
    pub fn content_hash(&self) -> String {
        let text = serde_json::to_string(&ModelFile::from(self)).unwrap_or_default();
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoint {
    pub delta0: Vec<f64>,
    pub theta0: Vec<f64>,
    pub v0: Vec<f64>,
    /// Electrical outputs at the point; the reference entry absorbs losses.
    pub p_e0: Vec<f64>,
    pub reference: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coords {
    Full,
    ReferenceReduced(usize),
}

impl Default for Coords {
    fn default() -> Self {
        Coords::ReferenceReduced(0)
    }
}

impl Coords {
    pub fn dim(&self, n_gen: usize) -> usize {
        match self {
            Coords::Full => 2 * n_gen,
            Coords::ReferenceReduced(_) => 2 * n_gen - 1,
        }
    }

    /// State labels: `delta_i` / `delta_i-delta_r` then `omega_i`, 1-based.
    pub fn labels(&self, n_gen: usize) -> Vec<String> {
        let mut out = Vec::with_capacity(self.dim(n_gen));
        match *self {
            Coords::Full => out.extend((1..=n_gen).map(|i| format!("delta_{i}"))),
            Coords::ReferenceReduced(r) => out.extend(
                (0..n_gen)
                    .filter(|&i| i != r)
                    .map(|i| format!("delta_{}-delta_{}", i + 1, r + 1)),
            ),
        }
        out.extend((1..=n_gen).map(|i| format!("omega_{i}")));
        out
    }

    /// Inverse of [`Coords::labels`]: recover coordinates from a label row.
    pub fn from_labels(labels: &[String]) -> Option<(Coords, usize)> {
        let n_gen = labels.iter().filter(|l| l.starts_with("omega_")).count();
        if n_gen == 0 {
            return None;
        }
        if labels.len() == 2 * n_gen {
            return Some((Coords::Full, n_gen));
        }
        if labels.len() + 1 != 2 * n_gen {
            return None;
        }
        let first = labels.first()?;
        let r = first.split("-delta_").nth(1)?.parse::<usize>().ok()?;
        (r >= 1).then(|| (Coords::ReferenceReduced(r - 1), n_gen))
    }
}

/// Linear stochastic model `ẋ = A x + B u + S ξ` with closed-loop `A_c`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub s: DMatrix<f64>,
    /// Equals `a` until a feedback is applied by [`closed_loop_matrix`].
    pub a_c: DMatrix<f64>,
    pub coords: Coords,
    pub n_gen: usize,
    pub omega0: f64,
}

impl StateSpace {
    pub fn labels(&self) -> Vec<String> {
        self.coords.labels(self.n_gen)
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }
}

pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
