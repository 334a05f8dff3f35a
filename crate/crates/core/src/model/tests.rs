use proptest::prelude::*;

use super::*;
use crate::bench_models::{example_valuation, robot_valuation, robots, workers};

fn minimal() -> &'static str {
    r#"{
      "components": [
        { "name": "c", "locations": ["l"], "initial": "l",
          "jumps": [ { "from": "l", "port": "p", "to": "l" } ] }
      ],
      "interactions": { "a": [ { "component": "c", "port": "p" } ] }
    }"#
}

fn with(edit: impl FnOnce(&mut serde_json::Value)) -> String {
    let mut v: serde_json::Value = serde_json::from_str(&robots(1).to_json()).unwrap();
    edit(&mut v);
    v.to_string()
}

fn validation_message(text: &str) -> String {
    match load_system(text) {
        Err(ModelError::Validation(m)) => m,
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn robots_round_trip() {
    let s = robots(2);
    let back = load_system(&s.to_json()).unwrap();
    assert_eq!(back, s);
    assert_eq!(back.components.len(), 4);
    let names: Vec<&str> = back.interaction_names().collect();
    assert_eq!(
        names,
        ["take1l", "take1r", "release1", "take2l", "take2r", "release2", "reset"]
    );
    let params: Vec<&str> = back.parameters.keys().map(String::as_str).collect();
    for p in ["alpha1", "alpha2", "beta1", "beta2", "gamma1", "gamma2", "eta1", "eta2"] {
        assert!(params.contains(&p), "{p}");
    }
}

#[test]
fn minimal_model_loads() {
    let s = load_system(minimal()).unwrap();
    assert_eq!(s.components[0].clocks.len(), 0);
    assert!(!s.has_parameters());
}

#[test]
fn port_on_two_jumps_is_rejected() {
    let text = minimal().replace(
        r#"[ { "from": "l", "port": "p", "to": "l" } ]"#,
        r#"[ { "from": "l", "port": "p", "to": "l" }, { "from": "l", "port": "p", "to": "l" } ]"#,
    );
    assert!(validation_message(&text).contains("port p bound to two jumps"));
}

#[test]
fn unbound_port_is_rejected() {
    let text = with(|v| {
        v["interactions"].as_object_mut().unwrap().remove("take1r");
    });
    let m = validation_message(&text);
    assert!(m.contains("not bound to any interaction"), "{m}");
}

#[test]
fn unbounded_parameter_points_at_bounded_domains() {
    let text = with(|v| {
        v["parameters"]["alpha1"] = serde_json::json!({ "lo": 0 });
    });
    let m = validation_message(&text);
    assert!(m.contains("alpha1") && m.contains("bounded"), "{m}");
}

#[test]
fn range_and_constant_checks() {
    let text = with(|v| v["parameters"]["beta1"] = serde_json::json!({ "lo": 5, "hi": 4 }));
    assert!(validation_message(&text).contains("empty range"));
    let text = with(|v| v["parameters"]["beta1"] = serde_json::json!({ "lo": -1, "hi": 4 }));
    assert!(validation_message(&text).contains("negative lower bound"));
    let text = with(|v| v["components"][0]["invariants"]["p12"][0]["le"] = serde_json::json!({ "param": "zeta" }));
    assert!(validation_message(&text).contains("unknown parameter zeta"));
}

#[test]
fn foreign_clocks_and_reserved_names() {
    let text = with(|v| v["components"][0]["jumps"][0]["resets"] = serde_json::json!(["x9"]));
    assert!(validation_message(&text).contains("foreign clock x9"));
    let text = with(|v| v["components"][1]["name"] = serde_json::json!("monitor"));
    assert!(validation_message(&text).contains("reserved"));
}

#[test]
fn multi_clock_guards_need_extended_mode() {
    let guard = serde_json::json!([{ "lhs": { "t1": 1, "ts1": 3 }, "rel": ">=", "rhs": 10 }]);
    let text = with(|v| v["components"][0]["jumps"][0]["guard"] = guard.clone());
    assert!(validation_message(&text).contains("extended mode"));
    let text = with(|v| {
        v["components"][0]["jumps"][0]["guard"] = guard.clone();
        v["mode"] = serde_json::json!("extended");
    });
    assert_eq!(load_system(&text).unwrap().mode, Mode::Extended);
}

#[test]
fn parse_errors_carry_a_position() {
    match load_system("{\n  \"components\": [,\n") {
        Err(ModelError::Parse { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
}

#[test]
fn instantiate_replaces_every_parameter() {
    let s = robots(2);
    let cs = instantiate(&s, &example_valuation()).unwrap();
    assert!(cs.parameters.is_empty());
    assert!(cs.bound_terms().all(|t| t.literal().is_some()));
    let r1 = cs.component("Robot1").unwrap();
    assert_eq!(r1.invariant("p11")[0].le, BoundTerm::Lit(5));
    assert_eq!(cs.component("Robot2").unwrap().invariant("p21")[0].le, BoundTerm::Lit(20));
}

#[test]
fn instantiate_reports_missing_and_out_of_range_values() {
    let s = robots(2);
    let mut v = example_valuation();
    v.0.shift_remove("eta2");
    match instantiate(&s, &v) {
        Err(ModelError::Valuation(m)) => assert!(m.contains("eta2"), "{m}"),
        other => panic!("{other:?}"),
    }
    let v = robot_valuation(2, &[("gamma1", 31)]);
    assert!(matches!(instantiate(&s, &v), Err(ModelError::Valuation(_))));
}

#[test]
fn parameter_free_instantiation_is_identity() {
    let s = load_system(minimal()).unwrap();
    let cs = instantiate(&s, &Valuation::default()).unwrap();
    assert_eq!(*cs, s);
}

fn every_port_covered(s: &System) -> bool {
    s.interactions.values().all(|ps| !ps.is_empty())
        && s.components.iter().all(|c| {
            c.jumps.iter().all(|j| {
                s.interactions
                    .values()
                    .any(|ps| ps.iter().any(|p| p.component == c.name && p.port == j.port))
            })
        })
}

proptest! {
    #[test]
    fn instantiation_round_trips_and_is_idempotent(
        n in 1usize..=3,
        seed in prop::collection::vec(0i64..=30, 12),
    ) {
        let s = robots(n);
        let v = Valuation(s.parameters.keys().zip(&seed).map(|(k, x)| (k.clone(), *x)).collect());
        let cs = instantiate(&s, &v).unwrap();
        let again = instantiate(&cs, &Valuation::default()).unwrap();
        prop_assert_eq!(&*again, &*cs);
        let loaded = load_system(&cs.to_json()).unwrap();
        prop_assert_eq!(&loaded, &*cs);
        prop_assert!(every_port_covered(&loaded));
    }

    #[test]
    fn worker_chains_validate(n in 1usize..=12) {
        let s = workers(n);
        prop_assert_eq!(load_system(&s.to_json()).unwrap(), s.clone());
        prop_assert!(every_port_covered(&s));
    }
}
