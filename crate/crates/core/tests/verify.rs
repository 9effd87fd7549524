use cfe_core::protocol::Mutation;
use cfe_core::sequences::bundled;
use cfe_core::sim::Scenario;
use cfe_core::verify::{replay, sweep, GraphMode, Property, PropertyReport, SweepSpec};

#[test]
fn three_node_sweep_passes_everything() {
    let report = sweep(&SweepSpec::exhaustive(3, bundled(3).unwrap())).unwrap();
    assert!(report.passed(), "{}", report.to_text());
    assert_eq!(report.graphs, 10);
    assert_eq!(report.scenarios, 10 * 6 * 12);
    assert!(report.properties.iter().all(|t| t.passed == report.scenarios));
    assert!(report.stats.max_time <= 3 * report.sigma + 64);
}

#[test]
fn report_json_round_trips() {
    let report = sweep(&SweepSpec::sampled(4, bundled(4).unwrap(), 3, 40)).unwrap();
    assert_eq!(report.mode, GraphMode::Sampled { seed: 3, scenarios: 40 });
    let back: PropertyReport = serde_json::from_str(&report.to_json()).unwrap();
    assert_eq!(back, report);
}

#[test]
fn sampled_sweeps_repeat_exactly() {
    let spec = SweepSpec::sampled(5, bundled(5).unwrap(), 11, 25);
    let a = sweep(&spec).unwrap();
    let b = sweep(&spec).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    let other = sweep(&SweepSpec { mode: GraphMode::Sampled { seed: 12, scenarios: 25 }, ..spec }).unwrap();
    assert_ne!(a.trace_digest, other.trace_digest);
}

#[test]
fn budget_marks_report_partial() {
    let mut spec = SweepSpec::exhaustive(3, bundled(3).unwrap());
    spec.max_scenarios = Some(50);
    let report = sweep(&spec).unwrap();
    assert_eq!(report.scenarios, 50);
    assert!(report.partial);
    assert!(!report.passed());
}

#[test]
fn mutant_failure_replays_from_files() {
    let mut spec = SweepSpec::exhaustive(4, bundled(4).unwrap());
    spec.mutation = Some(Mutation::DropTerminalWait);
    spec.stop_at_first_failure = true;
    let report = sweep(&spec).unwrap();
    assert!(!report.passed());
    let failure = report.first_failure.clone().unwrap();
    let again = replay(&failure).unwrap();
    assert!(again.contains(&failure.property), "{again:?}");

    let dir = tempfile::tempdir().unwrap();
    let (g, side) = failure.to_scenario().save(dir.path(), "failure").unwrap();
    let loaded = Scenario::load(&g, &side).unwrap();
    assert_eq!(loaded, failure.to_scenario());
}

#[test]
fn wrong_k_is_caught_by_bit_exchange() {
    let mut spec = SweepSpec::exhaustive(4, bundled(4).unwrap());
    spec.mutation = Some(Mutation::WrongK);
    spec.stop_at_first_failure = true;
    let report = sweep(&spec).unwrap();
    assert_eq!(report.failed_properties(), vec![Property::BitExchange]);
}
