//! One pass/fail line per acceptance criterion. Runs without the libtest
//! harness; the process fails if any criterion does.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tosyn_core::bench_models::{
    example_valuation, robot_valuation, robots, robots_prompt, toy_query, workers, EXAMPLE_PERIOD,
};
use tosyn_core::efsmt::fsolver::{check_sat, FResult};
use tosyn_core::efsmt::{solve_traced, Order, SolveConfig};
use tosyn_core::monitor::{compute_k_star, k_star_from};
use tosyn_core::oracle::{verify_augmented, ExploreOptions};
use tosyn_core::pipeline::{synthesize, SynthesisConfig};
use tosyn_core::{
    build_monitor, instantiate, load_system, ltl_to_buchi, parse_ltl, simulate_word, verify_witness, EfQuery,
    Formula, LinExpr, Ltl, Rel,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn monitor_golden() -> Outcome {
    let phi = parse_ltl(&robots_prompt(2)).map_err(|e| e.to_string())?;
    let m = build_monitor(&ltl_to_buchi(&Ltl::not(phi)), 1);
    let init = m.initial;
    ensure(m.names[init] == "{s0[s3(0)]}", format!("initial is {}", m.names[init]))?;
    let a = m.step(init, "take1l").ok_or("no take1l edge")?;
    ensure(
        m.names[a] == "{s0[s3(0)],s1[s3(0)]}",
        format!("take1l successor is {}", m.names[a]),
    )?;
    let r = m.step(a, "take2l").ok_or("no take2l edge")?;
    ensure(m.is_risk(r), "take2l does not reach risk")?;
    ensure(m.step(init, "#") == Some(init), "no #-self-loop at the initial location")?;
    ensure(m.step(init, "release1") == Some(init), "release1 is not read as #")?;
    Ok(format!("{} locations", m.num_locations()))
}

fn has_conjunct(section: &Formula, expected: &Formula) -> bool {
    let want = expected.canonical();
    section.conjuncts().iter().any(|c| c.canonical() == want)
}

fn invariant_goldens() -> Outcome {
    let (_, q) = robot_query(2);
    let v = |n: &str| LinExpr::var(q.vars.id(n).unwrap());
    let f = |n: &str| Formula::var(q.vars.id(n).unwrap());
    let eq = |a: &str, b: &str| Formula::atom(v(a), Rel::Eq, v(b));
    let ci = q.section("component-invariants").ok_or("no component-invariants")?;
    let pi = q.section("jump-invariants").ok_or("no jump-invariants")?;
    let expected = [
        (ci, Formula::implies(f("Robot1.p10"), Formula::atom(v("ts1"), Rel::Le, v("alpha1")))),
        (
            pi,
            Formula::implies(f("Robot1.p12"), Formula::atom(v("ts1") - v("t1"), Rel::Ge, v("eta1"))),
        ),
        (pi, eq("ts1", "ts2")),
        (
            pi,
            Formula::implies(
                Formula::and([f("Robot1.p11"), f("Robot2.p21")]),
                Formula::and([eq("t1", "ts1"), eq("ts1", "t2"), eq("t2", "ts2")]),
            ),
        ),
        (
            ci,
            Formula::implies(
                Formula::atom(v("ts1"), Rel::Gt, v("gamma1") + LinExpr::int(6)),
                f("Robot1.p10"),
            ),
        ),
    ];
    for (section, e) in &expected {
        ensure(has_conjunct(section, e), format!("missing {}", e.display(&q.vars)))?;
    }
    Ok(format!("{} formulas found", expected.len()))
}

fn joint_wait_state() -> Outcome {
    let (_, q) = robot_query(2);
    let v = robot_valuation(2, &[("gamma1", 0), ("eta1", 0), ("gamma2", 15), ("eta2", 15)]);
    let flag = |n: &str| Formula::var(q.vars.id(n).unwrap());
    let start = Instant::now();
    let f = Formula::and([q.hyp.substitute(&q.assignment(&v)), flag("Robot1.p12"), flag("Robot2.p22")]);
    let r = check_sat(&f, &q.vars);
    let t = start.elapsed();
    ensure(r == FResult::Unsat, "H(v) with p12 and p22 is satisfiable")?;
    ensure(t < Duration::from_secs(1), format!("took {t:?}"))?;
    Ok(format!("unsat in {t:.2?}"))
}

fn toy_trace() -> Outcome {
    let q: EfQuery = toy_query();
    let (out, trace) = solve_traced(&q, &SolveConfig::default());
    let cands: Vec<i64> = trace.steps.iter().filter_map(|s| s.candidate.get("x1")).collect();
    ensure(out.witness().and_then(|w| w.get("x1")) == Some(100), format!("outcome {out:?}"))?;
    ensure(out.iterations() <= 3, format!("{} iterations", out.iterations()))?;
    ensure(cands.contains(&90), format!("candidates {cands:?}"))?;
    Ok(format!("candidates {cands:?}"))
}

fn end_to_end() -> Outcome {
    let mut lines = Vec::new();
    for n in [2, 3] {
        let start = Instant::now();
        let s = synthesize(&robots(n), Some(&robots_prompt(n)), &SynthesisConfig::default())
            .map_err(|e| e.to_string())?;
        let t = start.elapsed();
        ensure(s.verified(), format!("{n} robots: {:?} / {:?}", s.outcome, s.verdict))?;
        ensure(t <= Duration::from_secs(120), format!("{n} robots took {t:?}"))?;
        lines.push(format!("{n} robots: {} iterations, {t:.2?}", s.outcome.iterations()));
    }
    Ok(lines.join("; "))
}

fn soundness_sweep() -> Outcome {
    let (aug, q) = robot_query(2);
    let vals = sweep_valuations(&aug, 240, 6);
    let (mut accepted, mut rejected_ok) = (0, 0);
    for v in &vals {
        let verdict = verify_augmented(&aug, v, &ExploreOptions::default()).map_err(|e| e.to_string())?;
        if check_sat(&q.negated_claim(v), &q.vars) == FResult::Unsat {
            accepted += 1;
            ensure(verdict.is_ok(), format!("accepted {v} but the oracle says {verdict:?}"))?;
        } else if verdict.is_ok() {
            rejected_ok += 1;
        }
    }
    ensure(accepted > 0, "no valuation was accepted")?;
    Ok(format!(
        "{} valuations, {accepted} accepted and confirmed, {rejected_ok} rejected but oracle-ok",
        vals.len()
    ))
}

fn example_realizable() -> Outcome {
    let s = robots(2);
    let v = example_valuation();
    let cs = instantiate(&s, &v).map_err(|e| e.to_string())?;
    let word: Vec<&str> = EXAMPLE_PERIOD.iter().chain(EXAMPLE_PERIOD.iter()).copied().collect();
    ensure(simulate_word(&cs, &word).map_err(|e| e.to_string())?, "two periods do not replay")?;
    let phi = parse_ltl(&robots_prompt(2)).map_err(|e| e.to_string())?;
    let verdict = verify_witness(&s, Some(&phi), 1, &v).map_err(|e| e.to_string())?;
    ensure(verdict.is_ok(), format!("{verdict:?}"))?;
    Ok("two periods replay; verdict ok".into())
}

fn k_star() -> Outcome {
    ensure(k_star_from(4, 2, 2, 3) == Some(385), "4,2,2,3 is not 385")?;
    let clockless = load_system(
        r#"{ "components": [ { "name": "c", "locations": ["l", "m"], "initial": "l",
              "jumps": [ { "from": "l", "port": "p", "to": "m" }, { "from": "m", "port": "q", "to": "l" } ] } ],
            "interactions": { "go": [ { "component": "c", "port": "p" } ],
                              "back": [ { "component": "c", "port": "q" } ] } }"#,
    )
    .map_err(|e| e.to_string())?;
    let b = ltl_to_buchi(&Ltl::not(parse_ltl("G F go").unwrap()));
    let expected = 2 * 2 * b.num_states() as u128 * 2 + 1;
    let clock_free = compute_k_star(&clockless, &b).map_err(|e| e.to_string())?;
    ensure(clock_free == expected, format!("clockless: {clock_free} != {expected}"))?;
    let b = ltl_to_buchi(&Ltl::not(parse_ltl(&robots_prompt(2)).unwrap()));
    let delta: u128 = 24 * 16 * 62u128.pow(4);
    let expected = delta * delta * 64 * 64 * b.num_states() as u128 * 7 + 1;
    let got = compute_k_star(&robots(2), &b).map_err(|e| e.to_string())?;
    ensure(got == expected, format!("2 robots: {got} != {expected}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..2000 {
        let args: [u128; 4] = std::array::from_fn(|_| rng.gen_range(1..10_000));
        let base = k_star_from(args[0], args[1], args[2], args[3]).unwrap();
        for i in 0..4 {
            let mut up = args;
            up[i] += 1;
            let bumped = k_star_from(up[0], up[1], up[2], up[3]).unwrap();
            ensure(bumped > base, format!("not monotone at {args:?}, argument {i}"))?;
        }
    }
    Ok(format!("385, {clock_free}, {got}; monotone on 2000 samples"))
}

fn ltl_oracle() -> Outcome {
    let lassos = lassos();
    let formulas = formula_sample(2024, 500);
    ensure(formulas.iter().all(|f| f.size() <= 6), "oversized formula")?;
    for (i, f) in formulas.iter().enumerate() {
        if let Some(m) = lasso_mismatch(f, &lassos, i % 5 == 0) {
            return Err(m);
        }
    }
    Ok(format!("{} formulas x {} lassos, 0 mismatches", formulas.len(), lassos.len()))
}

fn workers_smoke() -> Outcome {
    let mut cfg = SynthesisConfig::default();
    cfg.solve.order = Order::Desc;
    let start = Instant::now();
    let s = synthesize(&workers(10), None, &cfg).map_err(|e| e.to_string())?;
    let t = start.elapsed();
    let it = s.outcome.iterations();
    ensure(s.verified(), format!("{:?} / {:?}", s.outcome, s.verdict))?;
    ensure(t <= Duration::from_secs(30), format!("took {t:?}"))?;
    ensure(it <= 10, format!("{it} iterations"))?;
    Ok(format!(
        "beta = {}, {it} iterations, {t:.2?}",
        s.outcome.witness().and_then(|w| w.get("beta")).unwrap_or(-1)
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("monitor golden", monitor_golden),
        ("invariant goldens", invariant_goldens),
        ("joint wait state refuted", joint_wait_state),
        ("toy query trace", toy_trace),
        ("end-to-end synthesis", end_to_end),
        ("soundness sweep", soundness_sweep),
        ("example schedule", example_realizable),
        ("k* formula", k_star),
        ("LTL lasso oracle", ltl_oracle),
        ("worker chain", workers_smoke),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
