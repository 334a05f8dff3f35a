mod common;

use std::time::Instant;

use common::*;
use proptest::prelude::*;
use tosyn_core::{parse_ltl, Ltl};

#[test]
fn evaluator_sanity() {
    let f = parse_ltl("G F a").unwrap();
    assert!(holds(&f, &["b"], &["a", "#"]));
    assert!(!holds(&f, &["a"], &["b"]));
    let u = parse_ltl("a U b").unwrap();
    assert!(holds(&u, &["a", "a"], &["b"]));
    assert!(!holds(&u, &[], &["a"]));
    let r = parse_ltl("a R b").unwrap();
    assert!(holds(&r, &[], &["b"]));
    assert!(!holds(&r, &["b"], &["#"]));
}

#[test]
fn generator_respects_the_size_bound() {
    for f in formula_sample(7, 2000) {
        assert!(f.size() <= 6, "{f}");
    }
}

#[test]
fn automata_agree_with_lasso_semantics() {
    let lassos = lassos();
    assert_eq!(lassos.len(), 121 * 120);
    let start = Instant::now();
    let formulas = formula_sample(2024, 500);
    for (i, f) in formulas.iter().enumerate() {
        if let Some(m) = lasso_mismatch(f, &lassos, i % 5 == 0) {
            panic!("{m}");
        }
    }
    eprintln!("500 formulas x {} lassos in {:?}", lassos.len(), start.elapsed());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn negation_complements_acceptance(seed in any::<u64>()) {
        let f = formula_sample(seed, 1).pop().unwrap();
        let pos = tosyn_core::ltl_to_buchi(&f);
        let neg = tosyn_core::ltl_to_buchi(&Ltl::not(f.clone()));
        for (u, w) in lassos().into_iter().step_by(37) {
            prop_assert_ne!(pos.accepts_lasso(&u, &w), neg.accepts_lasso(&u, &w), "{} on {:?}({:?})", f, u, w);
        }
    }
}
