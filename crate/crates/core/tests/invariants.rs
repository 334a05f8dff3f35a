use std::time::Instant;

use tosyn_core::bench_models::{robot_valuation, robots, robots_prompt};
use tosyn_core::constraints::formula::{Assignment, Val};
use tosyn_core::constraints::ten::ten;
use tosyn_core::constraints::{assemble, Ctx, EfQuery, EncodeOptions, TenStyle};
use tosyn_core::efsmt::fsolver::{check_sat, FResult};
use tosyn_core::pipeline::monitored;
use tosyn_core::{Formula, LinExpr, Rel};

fn robot_query(opts: &EncodeOptions) -> EfQuery {
    let aug = monitored(&robots(2), Some(&robots_prompt(2)), 1).unwrap();
    assemble(&aug, opts).unwrap()
}

fn var(q: &EfQuery, name: &str) -> LinExpr {
    LinExpr::var(q.vars.id(name).unwrap_or_else(|| panic!("no variable {name}")))
}

fn flag(q: &EfQuery, name: &str) -> Formula {
    Formula::var(q.vars.id(name).unwrap())
}

fn has_conjunct(section: &Formula, expected: &Formula) -> bool {
    let want = expected.canonical();
    section.conjuncts().iter().any(|c| c.canonical() == want)
}

#[test]
fn location_invariants_are_lifted() {
    let q = robot_query(&EncodeOptions::default());
    let ci = q.section("component-invariants").unwrap();
    let cases = [
        ("Robot1.p10", "ts1", var(&q, "alpha1")),
        ("Robot1.p11", "t1", var(&q, "gamma1")),
        ("Robot1.p12", "t1", LinExpr::int(3)),
        ("Robot1.p13", "t1", LinExpr::int(3)),
    ];
    for (loc, clock, bound) in cases {
        let f = Formula::implies(flag(&q, loc), Formula::atom(var(&q, clock), Rel::Le, bound));
        assert!(has_conjunct(ci, &f), "missing {}", f.display(&q.vars));
    }
}

#[test]
fn reach_window_bounds_the_cycle() {
    let q = robot_query(&EncodeOptions::default());
    let ci = q.section("component-invariants").unwrap();
    let late = Formula::implies(
        Formula::atom(var(&q, "ts1"), Rel::Gt, var(&q, "gamma1") + LinExpr::int(6)),
        flag(&q, "Robot1.p10"),
    );
    assert!(has_conjunct(ci, &late), "{}", ci.display(&q.vars));
    let early = Formula::implies(
        Formula::atom(var(&q, "ts1"), Rel::Lt, var(&q, "eta1")),
        flag(&q, "Robot1.p11"),
    );
    assert!(has_conjunct(ci, &early));
}

#[test]
fn reset_offsets_and_equalities() {
    let q = robot_query(&EncodeOptions::default());
    let pi = q.section("jump-invariants").unwrap();
    let offset = Formula::implies(
        flag(&q, "Robot1.p12"),
        Formula::atom(var(&q, "ts1") - var(&q, "t1"), Rel::Ge, var(&q, "eta1")),
    );
    assert!(has_conjunct(pi, &offset), "{}", pi.display(&q.vars));
    let global = Formula::atom(var(&q, "ts1"), Rel::Eq, var(&q, "ts2"));
    assert!(has_conjunct(pi, &global));
    let eq = |a: &str, b: &str| Formula::atom(var(&q, a), Rel::Eq, var(&q, b));
    let four = Formula::implies(
        Formula::and([flag(&q, "Robot1.p11"), flag(&q, "Robot2.p21")]),
        Formula::and([eq("t1", "ts1"), eq("ts1", "t2"), eq("t2", "ts2")]),
    );
    assert!(has_conjunct(pi, &four));
}

#[test]
fn history_keeps_per_edge_offsets() {
    let q = robot_query(&EncodeOptions {
        history: 1,
        ..Default::default()
    });
    let pi = q.section("jump-invariants").unwrap();
    let f = Formula::implies(
        Formula::and([flag(&q, "Robot1.p12"), flag(&q, "prev1_take1l")]),
        Formula::atom(var(&q, "ts1") - var(&q, "t1"), Rel::Ge, var(&q, "eta1")),
    );
    assert!(has_conjunct(pi, &f));
}

#[test]
fn joint_wait_state_is_refuted() {
    let q = robot_query(&EncodeOptions::default());
    let v = robot_valuation(2, &[("gamma1", 0), ("eta1", 0), ("gamma2", 15), ("eta2", 15)]);
    let start = Instant::now();
    let f = Formula::and([
        q.hyp.substitute(&q.assignment(&v)),
        flag(&q, "Robot1.p12"),
        flag(&q, "Robot2.p22"),
    ]);
    assert_eq!(check_sat(&f, &q.vars), FResult::Unsat);
    assert!(start.elapsed().as_secs_f64() < 1.0);

    // Without the co-reset equality the state is consistent.
    let weaker = Formula::and([
        q.section("component-invariants").unwrap().substitute(&q.assignment(&v)),
        q.section("one-hot").unwrap().clone(),
        flag(&q, "Robot1.p12"),
        flag(&q, "Robot2.p22"),
    ]);
    assert!(matches!(check_sat(&weaker, &q.vars), FResult::Sat(_)));
}

#[test]
fn abstract_reachability_contains_the_risk_vector() {
    let q = robot_query(&EncodeOptions {
        abs: tosyn_core::constraints::AbsEncoding::Dnf,
        ..Default::default()
    });
    let abs = q.section("abs").unwrap();
    let mut a = Assignment::default();
    for (id, info) in q.vars.iter() {
        if info.kind.is_bool() {
            let on = ["Robot1.p12", "Robot2.p22", "Buffer1.f11", "Buffer2.f21", "monitor.risk"].contains(&info.name.as_str());
            a.set(id, Val::Bool(on));
        }
    }
    assert_eq!(abs.eval(&a), Some(true));
}

#[test]
fn release_enabling_matches_the_worked_formula() {
    let aug = monitored(&robots(2), None, 1).unwrap();
    let mut ctx = Ctx::new(&aug, None);
    ctx.ten_style = TenStyle::Latest;
    let f = ten(&mut ctx, "release1");
    let v = |n: &str| LinExpr::var(ctx.vars.id(n).unwrap());
    let fl = |n: &str| Formula::var(ctx.vars.id(n).unwrap());
    let expected = [
        fl("Robot1.p13"),
        fl("Buffer1.f11"),
        fl("Buffer2.f21"),
        Formula::atom(v("t1"), Rel::Le, LinExpr::int(3)),
        Formula::atom(LinExpr::int(3) - v("t1"), Rel::Le, v("alpha1") - v("ts1")),
    ];
    // `2 - t1 <= 3 - t1` folds to true and disappears.
    let got: Vec<Formula> = f.conjuncts().iter().map(|c| c.canonical()).collect();
    for e in expected {
        assert!(got.contains(&e.canonical()), "missing {}", e.display(&ctx.vars));
    }
    // One disjunction over Robot2's locations.
    assert!(f.conjuncts().iter().any(|c| matches!(c, Formula::Or(v) if v.len() == 4)));
}

#[test]
fn query_shape_for_three_robots() {
    let aug = monitored(&robots(3), Some(&robots_prompt(3)), 1).unwrap();
    let q = assemble(
        &aug,
        &EncodeOptions {
            history: 1,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(q.info.exists_ints, 12);
    assert_eq!(q.info.forall_reals, 6);
    assert_eq!(q.vars.iter().filter(|(_, i)| i.name.starts_with("prev1_")).count(), 10);
}
