//! Scripted experiments: constant-power VSCs (Case I), an antisymmetric
//! speed-feedback pair on the least-damped mode (Case II), and Case II with
//! PMU measurement noise.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::FixtureSystem;
use crate::error::{Error, Result};
use crate::estimator::{estimate_from_trajectory, Diagnostics, EstimatorConfig};
use crate::linalg::frobenius;
use crate::modal::{eigen_modes, match_modes, ModeComparison, ModeSet, ModeSource};
use crate::netmodel::{closed_loop_matrix, open_loop_matrices, reduce_reference, Coords, StateSpace, SystemModel};
use crate::sim::{add_measurement_noise, simulate_nonlinear, NoiseSpec, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case {
    #[serde(rename = "I")]
    I,
    #[serde(rename = "II")]
    II,
    #[serde(rename = "noise")]
    Noise,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::I => "I",
            Case::II => "II",
            Case::Noise => "noise",
        })
    }
}

impl FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "i" | "1" => Ok(Case::I),
            "ii" | "2" => Ok(Case::II),
            "noise" | "iii" | "3" => Ok(Case::Noise),
            other => Err(Error::Config(format!("unknown case '{other}' (expected I, II, or noise)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseOptions {
    /// Simulation settings; the seed field is replaced per run.
    pub sim: SimConfig,
    pub estimator: EstimatorConfig,
    pub noise_std_delta: f64,
    pub noise_std_omega: f64,
    /// Candidate feedback magnitudes (pu power per pu speed) for Case II.
    pub case2_gains: Vec<f64>,
    /// Upper bound on every closed-loop damping ratio for an admissible
    /// Case II gain.
    pub case2_max_damping: f64,
}

impl Default for CaseOptions {
    fn default() -> Self {
        CaseOptions {
            sim: SimConfig::default(),
            estimator: EstimatorConfig::default(),
            noise_std_delta: 1e-3,
            noise_std_omega: 1e-6,
            case2_gains: (0..=14).map(|m| 2f64.powf(m as f64 / 2.0)).collect(),
            case2_max_damping: 0.25,
        }
    }
}

/// Seed of the measurement-noise stream paired with a simulation seed.
pub fn noise_seed(seed: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x5851_F42D)
}

/// Per-seed outcome of one simulate-estimate-compare pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: u64,
    pub comparison: ModeComparison,
    pub diagnostics: Diagnostics,
    /// `||Â_c - A_c||_F`.
    pub matrix_error: f64,
    #[serde(skip)]
    pub a_hat: DMatrix<f64>,
    #[serde(skip)]
    pub estimated_modes: Option<ModeSet>,
}

/// Per-mode aggregate over seeds; errors are absolute percentages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub mode: usize,
    pub f_truth: f64,
    pub zeta_truth: f64,
    pub matched_runs: usize,
    pub median_f_err_pct: f64,
    pub median_zeta_err_pct: f64,
    pub max_f_err_pct: f64,
    pub max_zeta_err_pct: f64,
    pub median_shape_alignment: f64,
    pub median_participation_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub label: String,
    pub summary: Vec<ModeSummary>,
    pub runs: Vec<SeedRun>,
}

/// Case II feedback pattern and its effect on the true target mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case2Design {
    /// 1-based index of the target in the open-loop truth mode list.
    pub target_mode: usize,
    pub target_freq: f64,
    /// Machine indices `(i, j)` receiving `+gain` and `-gain`.
    pub machines: (usize, usize),
    pub machine_names: (String, String),
    pub vsc: usize,
    pub gain: f64,
    /// True target damping (percent) without and with the feedback.
    pub zeta_before: f64,
    pub zeta_after: f64,
    /// 1-based index of the target in the closed-loop truth mode list.
    pub target_mode_after: usize,
    pub k1: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn below(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value,
            threshold,
            pass: value < threshold,
        }
    }

    fn above(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value,
            threshold,
            pass: value > threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub case: Case,
    pub fixture: String,
    pub model_hash: String,
    pub seeds: Vec<u64>,
    pub coords: Coords,
    pub summary: Vec<ModeSummary>,
    pub runs: Vec<SeedRun>,
    pub baseline: Option<Baseline>,
    pub design: Option<Case2Design>,
    /// Case II: median over seeds of the estimated target damping increase
    /// (percentage points).
    pub estimated_increase: Option<f64>,
    /// Case II: median over seeds of angle-row change norm over speed-block
    /// change norm in `Â_c(II) - Â_c(I)`.
    pub block_change_ratio: Option<f64>,
    pub checks: Vec<Check>,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Table with one row per truth mode holding the per-seed median
    /// estimate: mode, f_a, f_e, f_err_pct, zeta_a, zeta_e, zeta_err_pct.
    pub fn median_table(&self) -> ModeComparison {
        let pairs = self
            .summary
            .iter()
            .filter_map(|s| {
                let matched: Vec<_> = self
                    .runs
                    .iter()
                    .filter_map(|r| r.comparison.pair_for_truth(s.mode - 1))
                    .collect();
                if matched.is_empty() {
                    return None;
                }
                let f_est = median(matched.iter().map(|p| p.f_est).collect());
                let z_est = median(matched.iter().map(|p| p.zeta_est).collect());
                Some(crate::modal::ModePair {
                    mode: s.mode,
                    truth_index: s.mode - 1,
                    estimate_index: matched[0].estimate_index,
                    f_truth: s.f_truth,
                    f_est,
                    f_err_pct: crate::modal::percent_error(s.f_truth, f_est),
                    zeta_truth: s.zeta_truth,
                    zeta_est: z_est,
                    zeta_err_pct: crate::modal::percent_error(s.zeta_truth, z_est),
                    shape_alignment: s.median_shape_alignment,
                    participation_error: s.median_participation_error,
                })
            })
            .collect();
        ModeComparison {
            pairs,
            unmatched_truth: Vec::new(),
            unmatched_estimate: Vec::new(),
        }
    }
}

/// Median of a sample; NaN when empty.
pub fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// True closed-loop state matrix of `model` in the estimator coordinates.
pub fn truth_state_space(model: &SystemModel, coords: Coords) -> Result<StateSpace> {
    model.linearize()?.in_coords(coords)
}

pub fn truth_modes(ss: &StateSpace) -> Result<ModeSet> {
    eigen_modes(&ss.a_c, &ss.labels(), ModeSource::Truth)
}

/// Simulate one seed, optionally corrupt the record, estimate, and compare
/// against `truth`.
pub fn run_seed(
    model: &SystemModel,
    truth: &StateSpace,
    truth_set: &ModeSet,
    opts: &CaseOptions,
    seed: u64,
    noisy: bool,
) -> Result<SeedRun> {
    let cfg = SimConfig { seed, ..opts.sim };
    let traj = simulate_nonlinear(model, &cfg)?;
    evaluate_record(&traj, truth, truth_set, opts, seed, noisy)
}

/// Optionally corrupt a recorded trajectory with measurement noise (stream
/// [`noise_seed`] of `seed`), estimate, and compare against `truth`.
pub fn evaluate_record(
    traj: &crate::sim::Trajectory,
    truth: &StateSpace,
    truth_set: &ModeSet,
    opts: &CaseOptions,
    seed: u64,
    noisy: bool,
) -> Result<SeedRun> {
    let record = if noisy {
        let spec = NoiseSpec {
            std_delta: opts.noise_std_delta,
            std_omega: opts.noise_std_omega,
            seed: noise_seed(seed),
        };
        add_measurement_noise(traj, &spec)?
    } else {
        traj.clone()
    };
    let est = estimate_from_trajectory(&record, &opts.estimator)?;
    let est_set = eigen_modes(&est.a_hat, &est.labels, ModeSource::Estimated)?;
    let comparison = match_modes(truth_set, &est_set);
    Ok(SeedRun {
        seed,
        comparison,
        diagnostics: est.diagnostics,
        matrix_error: frobenius(&(&est.a_hat - &truth.a_c)),
        a_hat: est.a_hat,
        estimated_modes: Some(est_set),
    })
}

/// Run `seeds` in parallel; results keep the seed order.
fn run_seeds<F>(seeds: &[u64], f: F) -> Result<Vec<SeedRun>>
where
    F: Fn(u64) -> Result<SeedRun> + Sync + Send,
{
    seeds.par_iter().map(|&s| f(s)).collect()
}

pub fn summarize(truth_set: &ModeSet, runs: &[SeedRun]) -> Vec<ModeSummary> {
    truth_set
        .modes
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let pairs: Vec<_> = runs.iter().filter_map(|r| r.comparison.pair_for_truth(i)).collect();
            let abs_f: Vec<f64> = pairs.iter().map(|p| p.f_err_pct.abs()).collect();
            let abs_z: Vec<f64> = pairs.iter().map(|p| p.zeta_err_pct.abs()).collect();
            ModeSummary {
                mode: i + 1,
                f_truth: m.freq,
                zeta_truth: m.damping_percent(),
                matched_runs: pairs.len(),
                median_f_err_pct: median(abs_f.clone()),
                median_zeta_err_pct: median(abs_z.clone()),
                max_f_err_pct: abs_f.iter().copied().fold(f64::NAN, f64::max),
                max_zeta_err_pct: abs_z.iter().copied().fold(f64::NAN, f64::max),
                median_shape_alignment: median(pairs.iter().map(|p| p.shape_alignment).collect()),
                median_participation_error: median(pairs.iter().map(|p| p.participation_error).collect()),
            }
        })
        .collect()
}

fn accuracy_checks(summary: &[ModeSummary], n_runs: usize, checks: &mut Vec<Check>) {
    for s in summary {
        checks.push(Check::below(format!("mode {} median |f error| (%)", s.mode), s.median_f_err_pct, 3.0));
        checks.push(Check::below(
            format!("mode {} median |zeta error| (%)", s.mode),
            s.median_zeta_err_pct,
            10.0,
        ));
        checks.push(Check::below(
            format!("mode {} worst |zeta error| (%)", s.mode),
            s.max_zeta_err_pct,
            20.0,
        ));
        checks.push(Check::below(
            format!("mode {} unmatched runs", s.mode),
            (n_runs - s.matched_runs) as f64,
            0.5,
        ));
    }
}

fn least_damped_truth(truth_set: &ModeSet) -> Result<usize> {
    truth_set
        .least_damped()
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Degenerate("system has no oscillatory mode".into()))
}

/// Pick the machine pair and VSC from an estimated Case I mode set, then
/// scan signed gains on the true linearization.
pub fn design_case2(
    model: &SystemModel,
    truth_set: &ModeSet,
    estimated: &ModeSet,
    opts: &CaseOptions,
) -> Result<Case2Design> {
    let ng = model.n_gen();
    let nv = model.n_vsc();
    if nv == 0 {
        return Err(Error::Config("Case II needs at least one VSC".into()));
    }
    let (_, target_est) = estimated
        .least_damped()
        .ok_or_else(|| Error::Degenerate("estimate has no oscillatory mode".into()))?;
    if target_est.shape.len() != ng {
        return Err(Error::Dimension("mode shape does not cover every machine speed".into()));
    }
    let target_truth = truth_set
        .modes
        .iter()
        .enumerate()
        .min_by(|a, b| {
            (a.1.lambda - target_est.lambda)
                .norm()
                .total_cmp(&(b.1.lambda - target_est.lambda).norm())
        })
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Degenerate("truth has no oscillatory mode".into()))?;

    let shape = &target_est.shape;
    let i = (0..ng).max_by(|&a, &b| shape[a].norm().total_cmp(&shape[b].norm())).unwrap_or(0);
    let opposed = |j: usize| j != i && (shape[j] * shape[i].conj()).re < 0.0;
    let j = (0..ng)
        .filter(|&j| opposed(j))
        .max_by(|&a, &b| shape[a].norm().total_cmp(&shape[b].norm()))
        .or_else(|| {
            (0..ng)
                .filter(|&j| j != i)
                .max_by(|&a, &b| shape[a].norm().total_cmp(&shape[b].norm()))
        })
        .ok_or_else(|| Error::Config("Case II needs at least two machines".into()))?;

    let lin = model.linearize()?;
    let a2 = &lin.reduction.a2;
    let vsc = (0..nv)
        .max_by(|&a, &b| {
            let wa = a2[(i, a)].abs() + a2[(j, a)].abs();
            let wb = a2[(i, b)].abs() + a2[(j, b)].abs();
            wa.total_cmp(&wb)
        })
        .unwrap_or(0);

    let open = open_loop_matrices(model, &lin.reduction);
    let reference = match opts.estimator.coords {
        Coords::ReferenceReduced(r) => r,
        Coords::Full => 0,
    };
    let zeta_before = truth_set.modes[target_truth].damping;
    let target_lambda = truth_set.modes[target_truth].lambda;

    let mut best: Option<(f64, f64, usize)> = None;
    for &mag in &opts.case2_gains {
        for sign in [1.0, -1.0] {
            let gain = sign * mag;
            let mut vscs = model.vscs.clone();
            vscs.k1 = pair_gain(nv, ng, vsc, i, j, gain);
            let closed = reduce_reference(&closed_loop_matrix(&open, &vscs)?, reference)?;
            let Ok(set) = truth_modes(&closed) else { continue };
            let hurwitz = set.real_eigenvalues.iter().all(|&r| r < 0.0) && set.modes.iter().all(|m| m.damping > 0.0);
            let bounded = set.modes.iter().all(|m| m.damping < opts.case2_max_damping);
            if !hurwitz || !bounded || set.modes.len() != truth_set.modes.len() {
                continue;
            }
            let Some((k, m)) = set
                .modes
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1.lambda - target_lambda).norm().total_cmp(&(b.1.lambda - target_lambda).norm()))
            else {
                continue;
            };
            if best.is_none_or(|(_, z, _)| m.damping > z) {
                best = Some((gain, m.damping, k));
            }
        }
    }
    let (gain, zeta_after, k_after) = best
        .filter(|&(_, z, _)| z > zeta_before)
        .ok_or_else(|| Error::Degenerate("no admissible Case II gain raises the target damping".into()))?;
    let k1 = pair_gain(nv, ng, vsc, i, j, gain);
    Ok(Case2Design {
        target_mode: target_truth + 1,
        target_freq: truth_set.modes[target_truth].freq,
        machines: (i, j),
        machine_names: (model.machines.names[i].clone(), model.machines.names[j].clone()),
        vsc,
        gain,
        zeta_before: 100.0 * zeta_before,
        zeta_after: 100.0 * zeta_after,
        target_mode_after: k_after + 1,
        k1: (0..nv).map(|r| k1.row(r).iter().copied().collect()).collect(),
    })
}

fn pair_gain(nv: usize, ng: usize, vsc: usize, i: usize, j: usize, gain: f64) -> DMatrix<f64> {
    let mut k1 = DMatrix::zeros(nv, ng);
    k1[(vsc, i)] = gain;
    k1[(vsc, j)] = -gain;
    k1
}

fn target_zeta_est(run: &SeedRun, target: usize) -> Option<f64> {
    run.comparison.pair_for_truth(target).map(|p| p.zeta_est)
}

/// Norm of the angle-row change over the speed-block change.
fn block_ratio(before: &DMatrix<f64>, after: &DMatrix<f64>, n_gen: usize) -> f64 {
    let d = after - before;
    let dim = d.nrows();
    let n_angle = dim - n_gen;
    let angle = frobenius(&d.rows(0, n_angle).into_owned());
    let speed = frobenius(&d.view((n_angle, n_angle), (n_gen, n_gen)).into_owned());
    angle / speed
}

pub fn run_case(fixture: &FixtureSystem, case: Case, seeds: &[u64], opts: &CaseOptions) -> Result<ExperimentReport> {
    if seeds.is_empty() {
        return Err(Error::Config("at least one seed is required".into()));
    }
    let model = &fixture.model;
    let coords = opts.estimator.coords;
    let truth1 = truth_state_space(model, coords)?;
    let set1 = truth_modes(&truth1)?;
    let mut checks = Vec::new();

    match case {
        Case::I => {
            let runs = run_seeds(seeds, |s| run_seed(model, &truth1, &set1, opts, s, false))?;
            let summary = summarize(&set1, &runs);
            accuracy_checks(&summary, runs.len(), &mut checks);
            let target = least_damped_truth(&set1)?;
            checks.push(Check::below(
                "least-damped mode median participation error",
                summary[target].median_participation_error,
                0.1,
            ));
            Ok(ExperimentReport {
                case,
                fixture: fixture.name.clone(),
                model_hash: model.content_hash(),
                seeds: seeds.to_vec(),
                coords,
                summary,
                runs,
                baseline: None,
                design: None,
                estimated_increase: None,
                block_change_ratio: None,
                checks,
            })
        }
        Case::II | Case::Noise => {
            let base_seeds: &[u64] = if case == Case::II { seeds } else { &seeds[..1] };
            let base_runs = run_seeds(base_seeds, |s| run_seed(model, &truth1, &set1, opts, s, false))?;
            let first = base_runs[0]
                .estimated_modes
                .as_ref()
                .ok_or_else(|| Error::Degenerate("missing Case I modes".into()))?;
            let design = design_case2(model, &set1, first, opts)?;
            let k1 = DMatrix::from_row_iterator(
                model.n_vsc(),
                model.n_gen(),
                design.k1.iter().flatten().copied(),
            );
            let k2 = DMatrix::zeros(model.n_vsc(), model.n_gen());
            let model2 = model.with_feedback(k1, k2)?;
            let truth2 = truth_state_space(&model2, coords)?;
            let set2 = truth_modes(&truth2)?;
            let target_before = design.target_mode - 1;
            let target_after = design.target_mode_after - 1;

            if case == Case::II {
                let runs = run_seeds(seeds, |s| run_seed(&model2, &truth2, &set2, opts, s, false))?;
                let summary = summarize(&set2, &runs);
                let increases: Vec<f64> = runs
                    .iter()
                    .zip(&base_runs)
                    .filter_map(|(after, before)| {
                        Some(target_zeta_est(after, target_after)? - target_zeta_est(before, target_before)?)
                    })
                    .collect();
                let ratios: Vec<f64> = runs
                    .iter()
                    .zip(&base_runs)
                    .map(|(after, before)| block_ratio(&before.a_hat, &after.a_hat, model.n_gen()))
                    .collect();
                let true_increase = design.zeta_after - design.zeta_before;
                let est_increase = median(increases);
                let ratio = median(ratios);
                checks.push(Check::above("true target damping increase (pp)", true_increase, 0.0));
                checks.push(Check::above("median estimated damping increase (pp)", est_increase, 0.0));
                checks.push(Check::below(
                    "relative error of estimated increase",
                    ((est_increase - true_increase) / true_increase).abs(),
                    0.3,
                ));
                checks.push(Check::below("angle-row / speed-block change ratio", ratio, 0.1));
                Ok(ExperimentReport {
                    case,
                    fixture: fixture.name.clone(),
                    model_hash: model2.content_hash(),
                    seeds: seeds.to_vec(),
                    coords,
                    summary,
                    runs,
                    baseline: Some(Baseline {
                        label: "case I".into(),
                        summary: summarize(&set1, &base_runs),
                        runs: base_runs,
                    }),
                    design: Some(design),
                    estimated_increase: Some(est_increase),
                    block_change_ratio: Some(ratio),
                    checks,
                })
            } else {
                let pairs: Vec<(SeedRun, SeedRun)> = seeds
                    .par_iter()
                    .map(|&s| {
                        let cfg = SimConfig { seed: s, ..opts.sim };
                        let traj = simulate_nonlinear(&model2, &cfg)?;
                        let clean = evaluate_record(&traj, &truth2, &set2, opts, s, false)?;
                        let noisy = evaluate_record(&traj, &truth2, &set2, opts, s, true)?;
                        Ok((clean, noisy))
                    })
                    .collect::<Result<_>>()?;
                let (clean, runs): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
                let summary = summarize(&set2, &runs);
                let clean_summary = summarize(&set2, &clean);
                degradation_checks(&clean_summary, &summary, &mut checks);
                Ok(ExperimentReport {
                    case,
                    fixture: fixture.name.clone(),
                    model_hash: model2.content_hash(),
                    seeds: seeds.to_vec(),
                    coords,
                    summary,
                    runs,
                    baseline: Some(Baseline {
                        label: "case II without measurement noise".into(),
                        summary: clean_summary,
                        runs: clean,
                    }),
                    design: Some(design),
                    estimated_increase: None,
                    block_change_ratio: None,
                    checks,
                })
            }
        }
    }
}

/// Median-error growth from `clean` to `noisy`, per mode, in percentage
/// points; the checks require each to stay below 2.
pub fn degradation_checks(clean: &[ModeSummary], noisy: &[ModeSummary], checks: &mut Vec<Check>) {
    for (c, n) in clean.iter().zip(noisy) {
        checks.push(Check::below(
            format!("mode {} median |f error| growth (pp)", c.mode),
            n.median_f_err_pct - c.median_f_err_pct,
            2.0,
        ));
        checks.push(Check::below(
            format!("mode {} median |zeta error| growth (pp)", c.mode),
            n.median_zeta_err_pct - c.median_zeta_err_pct,
            2.0,
        ));
    }
}
