use super::*;
use crate::bench_models::{example_valuation, robot_valuation, robots, robots_prompt, EXAMPLE_PERIOD};
use crate::ltl::parse_ltl;
use crate::model::load_system;

fn one_clock(inv: i64, guard: i64) -> System {
    load_system(&format!(
        r#"{{"components":[{{"name":"C","clocks":["t"],"locations":["a","b"],"initial":"a",
            "invariants":{{"a":[{{"clock":"t","le":{inv}}}]}},
            "jumps":[{{"from":"a","guard":[{{"lhs":{{"t":1}},"rel":">=","rhs":{guard}}}],"port":"p","resets":["t"],"to":"b"}},
                     {{"from":"b","port":"q","resets":["t"],"to":"a"}}]}}],
           "interactions":{{"go":[{{"component":"C","port":"p"}}],"back":[{{"component":"C","port":"q"}}]}}}}"#
    ))
    .unwrap()
}

#[test]
fn unreachable_guard_deadlocks() {
    let s = one_clock(1, 2);
    let cs = instantiate(&s, &Valuation::default()).unwrap();
    let ex = explore(&cs, None, &ExploreOptions::default()).unwrap();
    assert!(ex.deadlock_reachable());
    assert!(!ex.risk_reachable());
    let ok = one_clock(3, 2);
    let cs = instantiate(&ok, &Valuation::default()).unwrap();
    assert!(!explore(&cs, None, &ExploreOptions::default()).unwrap().deadlock_reachable());
}

#[test]
fn example_schedule_replays() {
    let cs = instantiate(&robots(2), &example_valuation()).unwrap();
    assert!(simulate_word(&cs, &EXAMPLE_PERIOD).unwrap());
    let two: Vec<&str> = EXAMPLE_PERIOD.iter().chain(EXAMPLE_PERIOD.iter()).copied().collect();
    assert!(simulate_word(&cs, &two).unwrap());
    assert!(simulate_word(&cs, &[]).unwrap());
    assert!(!simulate_word(&cs, &["release1"]).unwrap());
    assert!(matches!(
        simulate_word(&cs, &["fly"]),
        Err(OracleError::UnknownInteraction(_))
    ));
}

#[test]
fn replay_reports_firing_windows() {
    let cs = instantiate(&robots(2), &example_valuation()).unwrap();
    let steps = replay(&cs, None, &EXAMPLE_PERIOD).unwrap().unwrap();
    assert_eq!(steps[0].earliest, "0");
    assert_eq!(steps[0].latest.as_deref(), Some("5"));
    assert_eq!(steps[6].interaction, "reset");
    assert_eq!(steps[6].earliest, "30");
    assert_eq!(steps[6].latest.as_deref(), Some("30"));
}

#[test]
fn example_valuation_is_a_solution() {
    let phi = parse_ltl(&robots_prompt(2)).unwrap();
    let v = verify_witness(&robots(2), Some(&phi), 1, &example_valuation()).unwrap();
    assert!(v.is_ok(), "{v:?}");
}

#[test]
fn lopsided_valuation_avoids_risk() {
    let phi = parse_ltl(&robots_prompt(2)).unwrap();
    let b = ltl_to_buchi(&Ltl::not(phi.clone()));
    let aug = augment(&robots(2), build_monitor(&b, 1), &phi.atoms()).unwrap();
    let v = robot_valuation(2, &[("gamma1", 0), ("eta1", 0), ("gamma2", 15), ("eta2", 15)]);
    let cs = instantiate(&aug.base, &v).unwrap();
    let ex = explore(&cs, aug.monitor.as_ref(), &ExploreOptions::default()).unwrap();
    assert!(!ex.risk_reachable());
}

#[test]
fn simultaneous_starts_reach_risk() {
    let phi = parse_ltl(&robots_prompt(2)).unwrap();
    let v = robot_valuation(2, &[]);
    match verify_witness(&robots(2), Some(&phi), 1, &v).unwrap() {
        Verdict::Fails { reason, path, .. } => {
            assert_eq!(reason, FailReason::Risk);
            let word: Vec<&str> = path.iter().map(|s| s.interaction.as_str()).collect();
            let m = build_monitor(&ltl_to_buchi(&Ltl::not(phi)), 1);
            assert_eq!(m.run(word.iter().copied()), None);
            assert!(m.run(word[..word.len() - 1].iter().copied()).is_some());
        }
        v => panic!("expected a risk path, got {v:?}"),
    }
}

#[test]
fn subsumption_does_not_change_verdicts() {
    let phi = parse_ltl(&robots_prompt(2)).unwrap();
    let b = ltl_to_buchi(&Ltl::not(phi.clone()));
    let aug = augment(&robots(2), build_monitor(&b, 1), &phi.atoms()).unwrap();
    for v in [example_valuation(), robot_valuation(2, &[("alpha1", 3)]), robot_valuation(2, &[])] {
        let cs = instantiate(&aug.base, &v).unwrap();
        let on = explore(&cs, aug.monitor.as_ref(), &ExploreOptions::default()).unwrap();
        let off = explore(
            &cs,
            aug.monitor.as_ref(),
            &ExploreOptions {
                subsumption: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(on.risk_reachable(), off.risk_reachable());
        assert_eq!(on.deadlock_reachable(), off.deadlock_reachable());
        assert!(on.states.len() <= off.states.len());
    }
}

#[test]
fn extended_mode_is_refused() {
    let mut s = one_clock(3, 2);
    s.mode = Mode::Extended;
    let cs = instantiate(&s, &Valuation::default()).unwrap();
    assert_eq!(explore(&cs, None, &ExploreOptions::default()).unwrap_err(), OracleError::ExtendedMode);
}
