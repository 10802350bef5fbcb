//! Desk-scale classical-model systems. Networks are described by branch and
//! load data, assembled into a full bus admittance matrix and shipped in the
//! full-matrix model form; the generator internal nodes (behind transient
//! reactance) and the VSC buses are the retained buses.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::netmodel::{c, AdmittanceSource, MachineSet, SystemModel, VscSet};

pub const OMEGA0: f64 = 2.0 * std::f64::consts::PI * 60.0;
pub const FIXTURE_NAMES: [&str; 3] = ["twomachine_1vsc", "ninebus_1vsc", "tenmachine_3vsc"];

#[derive(Debug, Clone)]
pub struct FixtureSystem {
    pub name: String,
    pub model: SystemModel,
    pub notes: String,
}

struct NetworkBuilder {
    y: CMatrix,
}

impl NetworkBuilder {
    fn new(n: usize) -> Self {
        NetworkBuilder {
            y: CMatrix::zeros(n, n),
        }
    }

    /// Pi-section branch with series `r + jx` and total charging `b`.
    fn branch(&mut self, i: usize, j: usize, r: f64, x: f64, b: f64) -> &mut Self {
        let z = c(r, x);
        let y = c(1.0, 0.0) / z;
        let half = c(0.0, 0.5 * b);
        self.y[(i, i)] += y + half;
        self.y[(j, j)] += y + half;
        self.y[(i, j)] -= y;
        self.y[(j, i)] -= y;
        self
    }

    /// Constant-impedance load `P + jQ` drawn at nominal voltage.
    fn load(&mut self, i: usize, p: f64, q: f64) -> &mut Self {
        self.y[(i, i)] += c(p, -q);
        self
    }
}

struct MachineData<'a> {
    h: &'a [f64],
    damping_per_inertia: &'a [f64],
    emf: &'a [f64],
    p_mech: &'a [f64],
}

fn machines(d: MachineData) -> MachineSet {
    let n = d.h.len();
    let inertia: Vec<f64> = d.h.iter().map(|h| 2.0 * h).collect();
    MachineSet {
        names: (1..=n).map(|i| format!("G{i}")).collect(),
        damping: inertia.iter().zip(d.damping_per_inertia).map(|(m, k)| m * k).collect(),
        inertia,
        emf: d.emf.to_vec(),
        p_mech: d.p_mech.to_vec(),
        sigma: vec![0.05; n],
        omega0: OMEGA0,
    }
}

fn vscs(n_gen: usize, p_ref: &[f64]) -> VscSet {
    let n = p_ref.len();
    VscSet {
        names: (1..=n).map(|i| format!("VSC{i}")).collect(),
        p_ref: p_ref.to_vec(),
        q_ref: vec![0.0; n],
        k1: DMatrix::zeros(n, n_gen),
        k2: DMatrix::zeros(n, n_gen),
    }
}

pub fn build_fixture(name: &str) -> Result<FixtureSystem> {
    match name {
        "twomachine_1vsc" => two_machine(),
        "ninebus_1vsc" => nine_bus(),
        "tenmachine_3vsc" => ten_machine(),
        other => Err(Error::UnknownFixture(other.to_string())),
    }
}

/// Two machines feeding a shared load bus that also hosts one VSC.
fn two_machine() -> Result<FixtureSystem> {
    // Buses: 0, 2 terminals; 1 middle (VSC); 3, 4 internal nodes.
    let mut net = NetworkBuilder::new(5);
    net.branch(0, 1, 0.01, 0.1, 0.02)
        .branch(1, 2, 0.01, 0.12, 0.02)
        .branch(3, 0, 0.0, 0.3, 0.0)
        .branch(4, 2, 0.0, 0.3, 0.0)
        .load(0, 0.5, 0.1)
        .load(1, 0.8, 0.2)
        .load(2, 0.5, 0.1);
    let machines = machines(MachineData {
        h: &[5.0, 4.0],
        damping_per_inertia: &[2.0, 2.0],
        emf: &[1.08, 1.06],
        p_mech: &[0.7, 0.6],
    });
    let model = SystemModel::new(
        Some("twomachine_1vsc".into()),
        machines,
        vscs(2, &[0.5]),
        AdmittanceSource::Full {
            matrix: net.y,
            retained: vec![3, 4, 1],
        },
    )?;
    Ok(FixtureSystem {
        name: "twomachine_1vsc".into(),
        model,
        notes: "two machines, one VSC at the shared load bus".into(),
    })
}

/// WSCC 3-machine 9-bus network with constant-impedance loads and one VSC
/// at load bus 8.
fn nine_bus() -> Result<FixtureSystem> {
    // Network buses 1..9 -> 0..8; internal nodes of G1..G3 -> 9..11.
    let mut net = NetworkBuilder::new(12);
    net.branch(0, 3, 0.0, 0.0576, 0.0)
        .branch(3, 4, 0.010, 0.085, 0.176)
        .branch(3, 5, 0.017, 0.092, 0.158)
        .branch(4, 6, 0.032, 0.161, 0.306)
        .branch(5, 8, 0.039, 0.170, 0.358)
        .branch(6, 7, 0.0085, 0.072, 0.149)
        .branch(7, 8, 0.0119, 0.1008, 0.209)
        .branch(1, 6, 0.0, 0.0625, 0.0)
        .branch(2, 8, 0.0, 0.0586, 0.0)
        .branch(9, 0, 0.0, 0.0608, 0.0)
        .branch(10, 1, 0.0, 0.1198, 0.0)
        .branch(11, 2, 0.0, 0.1813, 0.0)
        .load(4, 1.25, 0.5)
        .load(5, 0.9, 0.3)
        .load(7, 1.0, 0.35);
    let machines = machines(MachineData {
        h: &[23.64, 6.4, 3.01],
        damping_per_inertia: &[2.0, 2.0, 2.0],
        emf: &[1.0566, 1.0502, 1.0170],
        p_mech: &[0.22, 1.63, 0.85],
    });
    let model = SystemModel::new(
        Some("ninebus_1vsc".into()),
        machines,
        vscs(3, &[0.5]),
        AdmittanceSource::Full {
            matrix: net.y,
            retained: vec![9, 10, 11, 7],
        },
    )?;
    Ok(FixtureSystem {
        name: "ninebus_1vsc".into(),
        model,
        notes: "WSCC 9-bus, classical machines, VSC (P = 0.5, Q = 0) at bus 8".into(),
    })
}

/// Two five-machine areas joined by a weak tie, VSCs at an area-A hub, the
/// tie midpoint and an area-B hub.
fn ten_machine() -> Result<FixtureSystem> {
    // Terminals A1..A5 -> 0..4, hubs HA1, HA2 -> 5, 6; terminals B1..B5 ->
    // 7..11, hubs HB1, HB2 -> 12, 13; tie midpoint -> 14; internal -> 15..24.
    let mut net = NetworkBuilder::new(25);
    let line = |x: f64| (0.1 * x, x, 0.02 * x / 0.1);
    for (i, j, x) in [
        (0, 5, 0.05),
        (1, 5, 0.06),
        (2, 5, 0.07),
        (2, 6, 0.08),
        (3, 6, 0.05),
        (4, 6, 0.06),
        (5, 6, 0.04),
        (6, 14, 0.15),
        (14, 12, 0.15),
        (7, 12, 0.06),
        (8, 12, 0.05),
        (9, 12, 0.08),
        (9, 13, 0.07),
        (10, 13, 0.05),
        (11, 13, 0.06),
        (12, 13, 0.045),
    ] {
        let (r, x, b) = line(x);
        net.branch(i, j, r, x, b);
    }
    for (k, terminal) in (0..5).chain(7..12).enumerate() {
        net.branch(15 + k, terminal, 0.0, 0.2, 0.0);
    }
    net.load(5, 2.0, 0.5)
        .load(6, 2.5, 0.6)
        .load(12, 2.2, 0.5)
        .load(13, 2.6, 0.7)
        .load(14, 0.5, 0.1);
    let machines = machines(MachineData {
        h: &[6.5, 5.0, 4.5, 5.5, 4.0, 6.0, 5.0, 4.2, 5.8, 3.6],
        damping_per_inertia: &[1.0, 1.1, 0.9, 1.2, 1.0, 1.0, 0.95, 1.1, 1.05, 1.0],
        emf: &[1.08, 1.07, 1.06, 1.07, 1.05, 1.08, 1.07, 1.06, 1.07, 1.05],
        p_mech: &[0.8, 0.9, 0.85, 0.9, 0.8, 0.95, 0.9, 0.85, 0.9, 0.8],
    });
    let model = SystemModel::new(
        Some("tenmachine_3vsc".into()),
        machines,
        vscs(10, &[0.5, 0.5, 0.5]),
        AdmittanceSource::Full {
            matrix: net.y,
            retained: (15..25).chain([5, 14, 13]).collect(),
        },
    )?;
    Ok(FixtureSystem {
        name: "tenmachine_3vsc".into(),
        model,
        notes: "two five-machine areas over a weak tie; VSCs at hub A1, tie midpoint, hub B2".into(),
    })
}
