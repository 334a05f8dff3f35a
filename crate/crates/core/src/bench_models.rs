//! Benchmark model families: robots sharing buffers in a ring, a chain of
//! workers synchronized by a global round, and a one-parameter toy query.

use indexmap::IndexMap;

use crate::constraints::formula::{Formula, LinExpr, Rel, VarKind, Vars};
use crate::constraints::EfQuery;
use crate::model::{
    BoundTerm, Component, GuardAtom, GuardRel, InvariantAtom, Jump, Mode, ParamRange, PortRef, System, Valuation,
};

/// Per-robot timing: `(occupy-r window, release window)` as `(cap, guard)` pairs.
const ROBOT_TIMING: [((i64, i64), (i64, i64)); 3] = [((3, 2), (3, 2)), ((4, 3), (2, 1)), ((5, 4), (3, 2))];

fn lit(v: i64) -> BoundTerm {
    BoundTerm::Lit(v)
}

fn param(p: &str) -> BoundTerm {
    BoundTerm::Param(p.into())
}

fn ge(clock: &str, rhs: BoundTerm) -> Vec<GuardAtom> {
    vec![GuardAtom::simple(clock, GuardRel::Ge, rhs)]
}

fn inv(clock: &str, le: BoundTerm) -> Vec<InvariantAtom> {
    vec![InvariantAtom {
        clock: clock.into(),
        le,
    }]
}

fn jump(from: &str, guard: Vec<GuardAtom>, port: &str, resets: &[&str], to: &str) -> Jump {
    Jump {
        from: from.into(),
        guard,
        port: port.into(),
        resets: resets.iter().map(|s| s.to_string()).collect(),
        to: to.into(),
    }
}

fn robot(i: usize) -> Component {
    let ((r_cap, r_guard), (rel_cap, rel_guard)) = ROBOT_TIMING[(i - 1) % ROBOT_TIMING.len()];
    let t = format!("t{i}");
    let ts = format!("ts{i}");
    let p = |k: usize| format!("p{i}{k}");
    let mut invariants = IndexMap::new();
    invariants.insert(p(0), inv(&ts, param(&format!("alpha{i}"))));
    invariants.insert(p(1), inv(&t, param(&format!("gamma{i}"))));
    invariants.insert(p(2), inv(&t, lit(r_cap)));
    invariants.insert(p(3), inv(&t, lit(rel_cap)));
    Component {
        name: format!("Robot{i}"),
        clocks: vec![t.clone(), ts.clone()],
        locations: (0..4).map(p).collect(),
        initial: p(1),
        invariants,
        jumps: vec![
            jump(&p(1), ge(&t, param(&format!("eta{i}"))), &format!("occupy{i}-l"), &[&t], &p(2)),
            jump(&p(2), ge(&t, lit(r_guard)), &format!("occupy{i}-r"), &[&t], &p(3)),
            jump(&p(3), ge(&t, lit(rel_guard)), &format!("release{i}"), &[], &p(0)),
            jump(&p(0), ge(&ts, param(&format!("beta{i}"))), &format!("end{i}"), &[&t, &ts], &p(1)),
        ],
    }
}

fn buffer(i: usize) -> Component {
    let f = |k: usize| format!("f{i}{k}");
    Component {
        name: format!("Buffer{i}"),
        clocks: vec![],
        locations: vec![f(0), f(1)],
        initial: f(0),
        invariants: IndexMap::new(),
        jumps: vec![jump(&f(0), vec![], "take", &[], &f(1)), jump(&f(1), vec![], "release", &[], &f(0))],
    }
}

/// `n` robots and `n` buffers in a ring. Robot `i` takes buffer `i` on its
/// left and buffer `i-1` (buffer `n` for the first robot) on its right, then
/// releases both. A global `reset` restarts all robots. Parameters
/// `alpha_i, beta_i, gamma_i, eta_i` range over `[0, 30]`.
///
/// # Panics
/// If `n == 0`.
pub fn robots(n: usize) -> System {
    assert!(n >= 1, "at least one robot");
    let mut parameters = IndexMap::new();
    for i in 1..=n {
        for p in ["alpha", "beta", "gamma", "eta"] {
            parameters.insert(format!("{p}{i}"), ParamRange { lo: 0, hi: 30 });
        }
    }
    let mut components: Vec<Component> = (1..=n).map(robot).collect();
    components.extend((1..=n).map(buffer));
    let mut interactions = IndexMap::new();
    for i in 1..=n {
        let right = if i == 1 { n } else { i - 1 };
        let r = format!("Robot{i}");
        let bl = format!("Buffer{i}");
        let br = format!("Buffer{right}");
        interactions.insert(
            format!("take{i}l"),
            vec![PortRef::new(&r, &format!("occupy{i}-l")), PortRef::new(&bl, "take")],
        );
        interactions.insert(
            format!("take{i}r"),
            vec![PortRef::new(&r, &format!("occupy{i}-r")), PortRef::new(&br, "take")],
        );
        let mut rel = vec![PortRef::new(&r, &format!("release{i}")), PortRef::new(&bl, "release")];
        if right != i {
            rel.push(PortRef::new(&br, "release"));
        }
        interactions.insert(format!("release{i}"), rel);
    }
    interactions.insert(
        "reset".into(),
        (1..=n).map(|i| PortRef::new(&format!("Robot{i}"), &format!("end{i}"))).collect(),
    );
    let sys = System {
        parameters,
        components,
        interactions,
        mode: Mode::Pta,
    };
    debug_assert!(sys.validate().is_ok());
    sys
}

/// Promptness: after a robot takes its left buffer, no other robot takes its
/// left buffer in the next step.
pub fn robots_prompt(n: usize) -> String {
    (1..=n)
        .map(|i| {
            let others: Vec<String> = (1..=n).filter(|j| *j != i).map(|j| format!("!take{j}l")).collect();
            if others.is_empty() {
                "true".to_string()
            } else {
                format!("G(take{i}l -> X({}))", others.join(" & "))
            }
        })
        .collect::<Vec<_>>()
        .join(" & ")
}

/// All robot parameters at 30 except the given ones.
pub fn robot_valuation(n: usize, overrides: &[(&str, i64)]) -> Valuation {
    let mut v = IndexMap::new();
    for i in 1..=n {
        for p in ["alpha", "beta", "gamma", "eta"] {
            v.insert(format!("{p}{i}"), 30);
        }
    }
    for (k, x) in overrides {
        v.insert(k.to_string(), *x);
    }
    Valuation(v)
}

/// The two-robot valuation under which one robot works early and the other late.
pub fn example_valuation() -> Valuation {
    robot_valuation(2, &[("gamma1", 5), ("gamma2", 20), ("eta1", 0), ("eta2", 15)])
}

/// One period of the cyclic schedule for two robots.
pub const EXAMPLE_PERIOD: [&str; 7] = ["take1l", "take1r", "release1", "take2l", "take2r", "release2", "reset"];

/// `n` workers that start, finish within `3i` time units (not before `2i`)
/// and wait for a global `round`, which needs worker 1's clock to reach `beta`.
/// Worker `i` must start within `i` time units; everything is done by 100.
///
/// # Panics
/// If `n == 0`.
pub fn workers(n: usize) -> System {
    assert!(n >= 1, "at least one worker");
    let mut components = Vec::new();
    let mut interactions = IndexMap::new();
    for i in 1..=n {
        let name = format!("Worker{i}");
        let x = format!("x{i}");
        let mut invariants = IndexMap::new();
        invariants.insert("idle".to_string(), inv(&x, lit(i as i64)));
        invariants.insert("busy".to_string(), inv(&x, lit(3 * i as i64)));
        invariants.insert("done".to_string(), inv(&x, lit(100)));
        let round_guard = if i == 1 { ge(&x, param("beta")) } else { vec![] };
        components.push(Component {
            name: name.clone(),
            clocks: vec![x.clone()],
            locations: vec!["idle".into(), "busy".into(), "done".into()],
            initial: "idle".into(),
            invariants,
            jumps: vec![
                jump("idle", vec![], "start", &[], "busy"),
                jump("busy", ge(&x, lit(2 * i as i64)), "finish", &[], "done"),
                jump("done", round_guard, "round", &[&x], "idle"),
            ],
        });
        interactions.insert(format!("start{i}"), vec![PortRef::new(&name, "start")]);
        interactions.insert(format!("finish{i}"), vec![PortRef::new(&name, "finish")]);
    }
    interactions.insert(
        "round".into(),
        (1..=n).map(|i| PortRef::new(&format!("Worker{i}"), "round")).collect(),
    );
    let mut parameters = IndexMap::new();
    parameters.insert("beta".to_string(), ParamRange { lo: 0, hi: 1000 });
    let sys = System {
        parameters,
        components,
        interactions,
        mode: Mode::Pta,
    };
    debug_assert!(sys.validate().is_ok());
    sys
}

/// `∃x1 ∈ [0, 100] ∀y1 . 10 ≤ y1 ≤ 20 → x1 - y1 ≥ 80`.
pub fn toy_query() -> EfQuery {
    let mut vars = Vars::new();
    let x = vars.declare("x1", VarKind::Param { lo: 0, hi: 100 });
    let y = vars.declare("y1", VarKind::Real);
    let hyp = Formula::and([
        Formula::atom(LinExpr::var(y), Rel::Ge, LinExpr::int(10)),
        Formula::atom(LinExpr::var(y), Rel::Le, LinExpr::int(20)),
    ]);
    let goal = Formula::atom(LinExpr::var(x) - LinExpr::var(y), Rel::Ge, LinExpr::int(80));
    EfQuery {
        vars,
        exists: vec![x],
        forall: vec![y],
        hyp,
        goal,
        side: Formula::True,
        objective: vec![],
        sections: vec![],
        info: Default::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn robot_shapes() {
        let s = robots(2);
        assert_eq!(s.components.len(), 4);
        assert_eq!(s.interactions.len(), 7);
        assert_eq!(s.parameters.len(), 8);
        s.validate().unwrap();
        let s3 = robots(3);
        assert_eq!(s3.parameters.len(), 12);
        assert_eq!(s3.clocks().len(), 6);
        s3.validate().unwrap();
        robots(1).validate().unwrap();
    }

    #[test]
    fn right_buffer_wraps() {
        let s = robots(2);
        let ports = &s.interactions["take2r"];
        assert!(ports.contains(&PortRef::new("Buffer1", "take")));
        let ports = &s.interactions["take1r"];
        assert!(ports.contains(&PortRef::new("Buffer2", "take")));
    }

    #[test]
    fn prompt_text() {
        assert_eq!(robots_prompt(2), "G(take1l -> X(!take2l)) & G(take2l -> X(!take1l))");
        assert_eq!(robots_prompt(1), "true");
    }

    #[test]
    fn worker_shapes() {
        let s = workers(10);
        s.validate().unwrap();
        assert_eq!(s.components.len(), 10);
        assert_eq!(s.interactions.len(), 21);
        assert_eq!(s.parameters.len(), 1);
    }
}
