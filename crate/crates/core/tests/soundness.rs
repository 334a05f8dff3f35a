mod common;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tosyn_core::constraints::formula::{Assignment, Val};
use tosyn_core::constraints::{flag_name, monitor_flag_name};
use tosyn_core::efsmt::external::{check_sat_external, resolve_command, ExternalError};
use tosyn_core::efsmt::fsolver::{check_sat, FResult};
use tosyn_core::oracle::dbm::{is_weak, value, Dbm, INF};
use tosyn_core::oracle::{explore, verify_augmented, ExploreOptions};
use tosyn_core::{instantiate, Rat};

#[test]
fn refuted_claims_are_oracle_safe() {
    let (aug, q) = robot_query(2);
    let mut refuted = 0;
    for v in sweep_valuations(&aug, 240, 6) {
        if check_sat(&q.negated_claim(&v), &q.vars) == FResult::Unsat {
            refuted += 1;
            let verdict = verify_augmented(&aug, &v, &ExploreOptions::default()).unwrap();
            assert!(verdict.is_ok(), "{v:?}: {verdict:?}");
        }
    }
    assert!(refuted >= 20, "only {refuted} refuted claims; the sweep is vacuous");
}

/// A point of a canonical zone, fixed clock by clock at a random quarter
/// of the interval the earlier clocks leave open.
fn point_in(z: &Dbm, rng: &mut ChaCha8Rng) -> Vec<Rat> {
    let mut p = vec![Rat::from_integer(0)];
    for i in 1..z.dim() {
        let (mut lo, mut lo_strict) = (Rat::from_integer(0), false);
        let (mut hi, mut hi_strict) = (None::<Rat>, false);
        for (j, pj) in p.iter().enumerate() {
            let b = z.get(j, i);
            if b != INF {
                let l = *pj - Rat::from_integer(value(b) as i128);
                if l > lo || (l == lo && !is_weak(b)) {
                    (lo, lo_strict) = (l, !is_weak(b));
                }
            }
            let b = z.get(i, j);
            if b != INF {
                let h = *pj + Rat::from_integer(value(b) as i128);
                if hi.is_none_or(|x| h < x || (h == x && !is_weak(b))) {
                    (hi, hi_strict) = (Some(h), !is_weak(b));
                }
            }
        }
        let hi = hi.unwrap_or(lo + Rat::from_integer(7));
        let t = Rat::new(rng.gen_range(0..=4), 4);
        let mut x = lo + (hi - lo) * t;
        if (x == lo && lo_strict) || (x == hi && hi_strict) {
            x = (lo + hi) / Rat::from_integer(2);
        }
        p.push(x);
    }
    p
}

#[test]
fn hypothesis_holds_on_reachable_states() {
    let (aug, q) = robot_query(2);
    let m = aug.monitor.as_ref().unwrap();
    let sys = &aug.base;
    let clocks = sys.clocks();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let opts = ExploreOptions {
        extrapolate: false,
        ..Default::default()
    };
    let mut checked = 0;
    for v in sweep_valuations(&aug, 24, 3) {
        let h = q.hyp.substitute(&q.assignment(&v));
        let cs = instantiate(sys, &v).unwrap();
        let ex = explore(&cs, Some(m), &opts).unwrap();
        for s in &ex.states {
            let mut a = Assignment::default();
            for (id, info) in q.vars.iter() {
                if info.kind.is_bool() {
                    a.set(id, Val::Bool(false));
                }
            }
            let mut on = |name: String| a.set(q.vars.id(&name).unwrap(), Val::Bool(true));
            for (ci, c) in sys.components.iter().enumerate() {
                on(flag_name(&c.name, &c.locations[s.locs[ci]]));
            }
            on(monitor_flag_name(m, s.locs[sys.components.len()]));
            for _ in 0..4 {
                let p = point_in(&s.zone, &mut rng);
                assert!(s.zone.contains(&p));
                let mut b = a.clone();
                for (k, c) in clocks.iter().enumerate() {
                    b.set(q.vars.id(c).unwrap(), Val::Num(p[k + 1]));
                }
                assert_eq!(h.eval(&b), Some(true), "{v:?} at {:?} {p:?}", s.locs);
                checked += 1;
            }
        }
    }
    assert!(checked > 100);
}

#[test]
fn subsumption_keeps_verdicts() {
    let (aug, _) = robot_query(2);
    let plain = ExploreOptions {
        subsumption: false,
        ..Default::default()
    };
    for v in sweep_valuations(&aug, 30, 17) {
        let a = verify_augmented(&aug, &v, &ExploreOptions::default()).unwrap();
        let b = verify_augmented(&aug, &v, &plain).unwrap();
        assert_eq!(a.is_ok(), b.is_ok(), "{v:?}");
    }
}

#[test]
fn external_backend_agrees() {
    let (aug, q) = robot_query(2);
    let cmd = resolve_command(None);
    for v in sweep_valuations(&aug, 24, 23) {
        let f = q.negated_claim(&v);
        let ours = check_sat(&f, &q.vars);
        match check_sat_external(&f, &q.vars, &cmd) {
            Err(ExternalError::Spawn { .. }) => {
                eprintln!("skipped: `{}` is not available", cmd.join(" "));
                return;
            }
            Err(e) => panic!("{e}"),
            Ok(theirs) => {
                assert_eq!(ours.is_sat(), theirs.is_sat(), "{v:?}");
                if let FResult::Sat(model) = theirs {
                    let full = model.merged(&q.assignment(&v));
                    assert_eq!(f.eval(&full), Some(true));
                }
            }
        }
    }
}
