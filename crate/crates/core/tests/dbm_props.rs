use proptest::prelude::*;
use tosyn_core::oracle::dbm::{le, lt, Dbm, INF};
use tosyn_core::Rat;

#[derive(Debug, Clone)]
enum Op {
    Constrain(usize, usize, i64, bool),
    Up,
    Reset(usize),
}

fn op(n: usize) -> impl Strategy<Value = Op> {
    prop_oneof![
        3 => (0..=n, 0..=n, -6i64..=8, any::<bool>()).prop_map(|(i, j, v, w)| Op::Constrain(i, j, v, w)),
        1 => Just(Op::Up),
        1 => (1..=n).prop_map(Op::Reset),
    ]
}

fn zone() -> impl Strategy<Value = (usize, Vec<Op>)> {
    (1usize..=5).prop_flat_map(|n| (Just(n), prop::collection::vec(op(n), 0..12)))
}

/// Applies `ops` from the origin; `None` once the zone becomes empty.
fn build(n: usize, ops: &[Op]) -> Option<Dbm> {
    let mut z = Dbm::zero(n);
    for o in ops {
        match *o {
            Op::Constrain(i, j, v, weak) if i != j => {
                if !z.constrain(i, j, if weak { le(v) } else { lt(v) }) {
                    return None;
                }
            }
            Op::Constrain(..) => {}
            Op::Up => z.up(),
            Op::Reset(x) => z.reset(x),
        }
    }
    Some(z)
}

fn canonical(z: &Dbm) -> bool {
    let mut c = z.clone();
    c.canonicalize();
    c == *z
}

/// Integer points of `z` with every clock at most `cap`.
fn points(z: &Dbm, cap: i64) -> Vec<Vec<Rat>> {
    let n = z.dim() - 1;
    let mut out = Vec::new();
    let mut v = vec![0i64; n];
    loop {
        let p: Vec<Rat> = std::iter::once(0).chain(v.iter().copied()).map(|x| Rat::from_integer(x as i128)).collect();
        if z.contains(&p) {
            out.push(p);
        }
        let mut i = 0;
        while i < n && v[i] == cap {
            v[i] = 0;
            i += 1;
        }
        if i == n {
            return out;
        }
        v[i] += 1;
    }
}

proptest! {
    #[test]
    fn operations_keep_canonical_form((n, ops) in zone()) {
        if let Some(z) = build(n, &ops) {
            prop_assert!(canonical(&z));
            let mut c = z.clone();
            prop_assert!(c.canonicalize());
            c.canonicalize();
            prop_assert_eq!(&c, &z);
            let mut d = z.clone();
            d.up();
            prop_assert!(canonical(&d));
            for x in 1..=n {
                let mut r = z.clone();
                r.reset(x);
                prop_assert!(canonical(&r));
            }
        }
    }

    #[test]
    fn constrain_matches_pointwise_filter((n, ops) in zone(), i in 0usize..=5, j in 0usize..=5, v in -4i64..=6, weak: bool) {
        let (i, j) = (i % (n + 1), j % (n + 1));
        prop_assume!(i != j);
        if let Some(z) = build(n, &ops) {
            let b = if weak { le(v) } else { lt(v) };
            let mut c = z.clone();
            let nonempty = c.constrain(i, j, b);
            let cap = if n > 3 { 4 } else { 7 };
            let k = Rat::from_integer(v as i128);
            for p in points(&z, cap) {
                let d = p[i] - p[j];
                let inside = d < k || (weak && d == k);
                prop_assert_eq!(nonempty && c.contains(&p), inside);
            }
        }
    }

    #[test]
    fn inclusion_and_subtraction_agree((n, ops) in zone(), (_, more) in zone()) {
        if let Some(z) = build(n, &ops) {
            let mut w = z.clone();
            let mut smaller = true;
            for o in more.iter().filter_map(|o| match o { Op::Constrain(i, j, v, _) => Some((*i % (n + 1), *j % (n + 1), *v)), _ => None }) {
                if o.0 != o.1 && !w.constrain(o.0, o.1, le(o.2)) {
                    smaller = false;
                    break;
                }
            }
            if smaller {
                prop_assert!(z.includes(&w));
                prop_assert!(z.subtract(&z).is_empty());
                let pieces = z.subtract(&w);
                let cap = if n > 3 { 3 } else { 6 };
                for p in points(&z, cap) {
                    let hits = pieces.iter().filter(|q| q.contains(&p)).count();
                    prop_assert_eq!(hits, usize::from(!w.contains(&p)));
                }
            }
        }
    }
}

#[test]
fn universe_is_unbounded_above() {
    let u = Dbm::universe(3);
    for x in 1..=3 {
        assert_eq!(u.get(x, 0), INF);
        assert_eq!(u.get(0, x), le(0));
    }
}
