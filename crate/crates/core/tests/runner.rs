use std::f64::consts::PI;

use kvloc_core::runner::{ScenarioSource, Status};
use kvloc_core::scenarios::{builtin_with, serialize};
use kvloc_core::{run, RunSpec, Suite};

fn tmp(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("kvloc-runner-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn stationary_phase_on_the_sphere() {
    let mut spec = RunSpec::new("sphere2_rotation", Suite::StationaryPhase);
    spec.t = Some(1.0);
    let r = run(&spec);
    assert!(r.passed, "{}", r.to_json());
    let exact = 2.0 * PI * (1f64.exp() - (-1f64).exp());
    let dh = r.checks.iter().find(|c| c.name == "duistermaat-heckman").unwrap();
    assert!((dh.lhs.unwrap().re - exact).abs() < 1e-9 * exact);
    assert!((dh.rhs.unwrap().re - exact).abs() < 1e-9 * exact);
    assert_eq!(dh.components.len(), 2);
}

#[test]
fn torus_routes_localization_to_decay() {
    let r = run(&RunSpec::new("torus2_translations", Suite::Localization));
    assert_eq!(r.exit_code(), 0);
    let c = &r.checks[0];
    assert_eq!(c.status, Status::Skipped);
    assert!(c.message.as_deref().unwrap().contains("decay"));
    let d = run(&RunSpec::new("torus2_translations", Suite::Decay));
    assert!(d.passed && d.checks.iter().all(|c| c.status == Status::Pass));
}

#[test]
fn unknown_scenario_is_a_named_failure() {
    let r = run(&RunSpec::new("no_such_manifold", Suite::All));
    assert_ne!(r.exit_code(), 0);
    assert_eq!(r.checks.len(), 1);
    assert_eq!(r.checks[0].error_kind.as_deref(), Some("scenario-not-found"));
}

#[test]
fn identical_specs_give_identical_bodies() {
    let mut spec = RunSpec::new("sphere2_two_rotations", Suite::All);
    spec.seed = 17;
    let a = run(&spec);
    let b = run(&spec);
    assert_eq!(a.body_json(), b.body_json());
    assert!(a.to_json().contains("\"timings\""));
    assert!(!a.body_json().contains("\"timings\""));
}

#[test]
fn seeds_are_recorded_and_change_samples_only() {
    let mut spec = RunSpec::new("sphere2_rotation", Suite::Identities);
    spec.seed = 1;
    let a = run(&spec);
    spec.seed = 2;
    let b = run(&spec);
    assert_eq!((a.seed, b.seed), (1, 2));
    assert!(a.passed && b.passed);
}

#[test]
fn scenario_files_round_trip_through_the_runner() {
    let s = builtin_with("sphere2_two_rotations", &[("c".to_string(), 0.5)].into_iter().collect()).unwrap();
    let path = tmp("two_rotations.json");
    std::fs::write(&path, serialize(&s)).unwrap();
    let mut spec = RunSpec::new(path.to_str().unwrap(), Suite::Localization);
    assert_eq!(spec.scenario, ScenarioSource::File(path.clone()));
    let out = tmp("report.json");
    spec.out = Some(out.clone());
    let r = run(&spec);
    assert!(r.passed, "{}", r.to_json());
    assert_eq!(r.parameters["c"], 0.5);
    let written: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(written["schema_version"], 1);
    assert_eq!(written["scenario"], "sphere2_two_rotations");
    assert!(written["checks"].as_array().unwrap().iter().all(|c| c["status"] != "fail"));
}

#[test]
fn malformed_scenario_file_fails_with_parse_error() {
    let path = tmp("broken.json");
    std::fs::write(&path, "{ \"name\": 3 ").unwrap();
    let r = run(&RunSpec::new(path.to_str().unwrap(), Suite::All));
    assert_eq!(r.checks[0].error_kind.as_deref(), Some("parse"));
    assert_ne!(r.exit_code(), 0);
}

#[test]
fn overrides_are_type_checked() {
    let mut spec = RunSpec::new("torus2_translations", Suite::Identities);
    spec.t = Some(2.0);
    assert_eq!(run(&spec).checks[0].error_kind.as_deref(), Some("argument"));

    let mut spec = RunSpec::new("sphere2_rotation", Suite::Identities);
    spec.params.insert("nonexistent".into(), 1.0);
    assert_eq!(run(&spec).checks[0].error_kind.as_deref(), Some("argument"));

    let mut spec = RunSpec::new("sphere2_rotation", Suite::Identities);
    spec.tol = Some(-1.0);
    assert_eq!(run(&spec).checks[0].error_kind.as_deref(), Some("argument"));
}

#[test]
fn node_and_tolerance_overrides_are_applied() {
    let mut spec = RunSpec::new("sphere2_rotation", Suite::Localization);
    spec.nodes = Some(vec![40, 4]);
    spec.tol = Some(1e-4);
    let r = run(&spec);
    assert!(r.passed);
    let c = r.checks.iter().find(|c| c.name.starts_with("localization of exp")).unwrap();
    assert_eq!(c.tolerance, Some(1e-4));
}

#[test]
fn noncommuting_scenarios_skip_commuting_generators() {
    let mut cfg = kvloc_core::scenarios::builtin_config("plane_cr").unwrap();
    cfg.name = "plane_rotation".into();
    cfg.field_y = vec!["-y".into(), "x".into()];
    cfg.commuting = false;
    let text = serde_json::to_string(&cfg).unwrap();
    let path = tmp("plane_rotation.json");
    std::fs::write(&path, text).unwrap();
    let r = run(&RunSpec::new(path.to_str().unwrap(), Suite::Identities));
    assert!(r.passed, "{}", r.to_json());
    let skipped: Vec<_> = r.checks.iter().filter(|c| c.status == Status::Skipped).map(|c| c.name.clone()).collect();
    assert!(skipped.iter().any(|n| n.contains("Y'+iX'")));
}
