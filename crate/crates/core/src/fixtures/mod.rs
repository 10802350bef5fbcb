//! Bundled desk-scale test systems and the scripted Case I / Case II /
//! measurement-noise experiments.

mod cases;
mod systems;

pub use cases::{
    degradation_checks, design_case2, evaluate_record, median, noise_seed, run_case, run_seed, summarize, truth_modes,
    truth_state_space, Baseline, Case, Case2Design, CaseOptions, Check, ExperimentReport, ModeSummary, SeedRun,
};
pub use systems::{build_fixture, FixtureSystem, FIXTURE_NAMES, OMEGA0};
