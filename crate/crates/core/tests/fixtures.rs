use vsc_ambient::fixtures::*;
use vsc_ambient::Error;

fn short() -> CaseOptions {
    let mut opts = CaseOptions::default();
    opts.sim.duration = 60.0;
    opts
}

#[test]
fn unknown_fixture_is_rejected() {
    assert!(matches!(build_fixture("ieee68"), Err(Error::UnknownFixture(_))));
}

#[test]
fn builders_are_deterministic() {
    for name in FIXTURE_NAMES {
        assert_eq!(
            build_fixture(name).unwrap().model.content_hash(),
            build_fixture(name).unwrap().model.content_hash()
        );
    }
}

#[test]
fn reports_are_deterministic_given_seeds() {
    let fixture = build_fixture("twomachine_1vsc").unwrap();
    let a = run_case(&fixture, Case::I, &[3, 4], &short()).unwrap();
    let b = run_case(&fixture, Case::I, &[3, 4], &short()).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(a.seeds, vec![3, 4]);
    assert_eq!(a.runs.len(), 2);
    assert!(!a.checks.is_empty());
}

#[test]
fn case_two_records_design_and_baseline() {
    let fixture = build_fixture("ninebus_1vsc").unwrap();
    let report = run_case(&fixture, Case::II, &[1, 2], &short()).unwrap();
    let design = report.design.as_ref().unwrap();
    assert!(design.zeta_after > design.zeta_before);
    assert!(design.zeta_after < 25.0);
    assert_eq!(report.baseline.as_ref().unwrap().runs.len(), 2);
    assert!(report.estimated_increase.is_some());
    assert!(report.block_change_ratio.unwrap() >= 0.0);
    assert_eq!(report.median_table().pairs.len(), 2);
}

#[test]
fn noise_case_compares_against_clean_record() {
    let fixture = build_fixture("twomachine_1vsc").unwrap();
    let report = run_case(&fixture, Case::Noise, &[5], &short()).unwrap();
    let baseline = report.baseline.as_ref().unwrap();
    assert_eq!(baseline.runs.len(), 1);
    assert_ne!(baseline.runs[0].matrix_error, report.runs[0].matrix_error);
    assert_eq!(report.checks.len(), 2 * report.summary.len());
}

#[test]
fn empty_seed_list_is_config_error() {
    let fixture = build_fixture("twomachine_1vsc").unwrap();
    assert!(matches!(run_case(&fixture, Case::I, &[], &short()), Err(Error::Config(_))));
}
