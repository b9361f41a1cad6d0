//! Identical configs and seeds must reproduce reports byte for byte
//! (runtime excluded), independently of the worker-pool size.

use ftlab::config::{ExperimentConfig, ExperimentKind};
use ftlab::run_experiment;

fn canonical(kind: ExperimentKind, seed: u64, jobs: Option<usize>) -> String {
    let mut cfg = ExperimentConfig::new(kind);
    cfg.seed = seed;
    cfg.cases = Some(10);
    cfg.jobs = jobs;
    let mut report = run_experiment(&cfg).unwrap();
    // jobs is an execution knob, not part of the measured identity.
    report.config.jobs = None;
    report.canonical_json().unwrap()
}

#[test]
fn reports_reproduce_bitwise() {
    for kind in [
        ExperimentKind::RiemannOracle,
        ExperimentKind::InteractionSuite,
        ExperimentKind::ShockContraction,
    ] {
        let a = canonical(kind, 42, None);
        let b = canonical(kind, 42, None);
        assert_eq!(a, b, "rerun differs for {kind:?}");
    }
}

#[test]
fn reports_independent_of_worker_count() {
    let a = canonical(ExperimentKind::ShockContraction, 7, Some(1));
    let b = canonical(ExperimentKind::ShockContraction, 7, Some(4));
    assert_eq!(a, b);
}

#[test]
fn different_seeds_differ() {
    let a = canonical(ExperimentKind::ShockContraction, 1, None);
    let b = canonical(ExperimentKind::ShockContraction, 2, None);
    assert_ne!(a, b);
}
