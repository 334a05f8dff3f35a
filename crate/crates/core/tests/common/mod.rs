#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tosyn_core::bench_models::{robots, robots_prompt};
use tosyn_core::constraints::{assemble, EfQuery, EncodeOptions};
use tosyn_core::pipeline::monitored;
use tosyn_core::{AugmentedSystem, Ltl, Valuation};

pub const SYMBOLS: [&str; 3] = ["a", "b", "#"];

/// Truth of `f` at every position of `prefix · cycle^ω`, by fixpoint iteration
/// on the lasso's positions. An atom holds exactly at its own symbol.
pub fn lasso_truth(f: &Ltl, prefix: &[&str], cycle: &[&str]) -> Vec<bool> {
    let word: Vec<&str> = prefix.iter().chain(cycle).copied().collect();
    let n = word.len();
    let succ = |i: usize| if i + 1 < n { i + 1 } else { prefix.len() };
    let fix = |start: bool, step: &dyn Fn(usize, &[bool]) -> bool| {
        let mut v = vec![start; n];
        loop {
            let next: Vec<bool> = (0..n).map(|i| step(i, &v)).collect();
            if next == v {
                return v;
            }
            v = next;
        }
    };
    match f {
        Ltl::True => vec![true; n],
        Ltl::False => vec![false; n],
        Ltl::Atom(p) => word.iter().map(|s| *s == p).collect(),
        Ltl::Not(g) => lasso_truth(g, prefix, cycle).into_iter().map(|x| !x).collect(),
        Ltl::And(x, y) => zip(x, y, prefix, cycle, |a, b| a && b),
        Ltl::Or(x, y) => zip(x, y, prefix, cycle, |a, b| a || b),
        Ltl::Implies(x, y) => zip(x, y, prefix, cycle, |a, b| !a || b),
        Ltl::Next(g) => {
            let g = lasso_truth(g, prefix, cycle);
            (0..n).map(|i| g[succ(i)]).collect()
        }
        Ltl::Finally(g) => {
            let g = lasso_truth(g, prefix, cycle);
            fix(false, &|i, v| g[i] || v[succ(i)])
        }
        Ltl::Globally(g) => {
            let g = lasso_truth(g, prefix, cycle);
            fix(true, &|i, v| g[i] && v[succ(i)])
        }
        Ltl::Until(x, y) => {
            let (x, y) = (lasso_truth(x, prefix, cycle), lasso_truth(y, prefix, cycle));
            fix(false, &|i, v| y[i] || (x[i] && v[succ(i)]))
        }
        Ltl::Release(x, y) => {
            let (x, y) = (lasso_truth(x, prefix, cycle), lasso_truth(y, prefix, cycle));
            fix(true, &|i, v| y[i] && (x[i] || v[succ(i)]))
        }
    }
}

fn zip(x: &Ltl, y: &Ltl, prefix: &[&str], cycle: &[&str], op: fn(bool, bool) -> bool) -> Vec<bool> {
    let (x, y) = (lasso_truth(x, prefix, cycle), lasso_truth(y, prefix, cycle));
    x.into_iter().zip(y).map(|(a, b)| op(a, b)).collect()
}

pub fn holds(f: &Ltl, prefix: &[&str], cycle: &[&str]) -> bool {
    lasso_truth(f, prefix, cycle)[0]
}

/// A random negation-normal-form formula over `a`, `b` with at most `budget` nodes.
pub fn random_nnf(rng: &mut ChaCha8Rng, budget: usize) -> Ltl {
    let leaf = |rng: &mut ChaCha8Rng| match rng.gen_range(0..6) {
        0 => Ltl::True,
        1 => Ltl::False,
        2 => Ltl::atom("a"),
        3 => Ltl::atom("b"),
        4 => Ltl::Not(Box::new(Ltl::atom("a"))),
        _ => Ltl::Not(Box::new(Ltl::atom("b"))),
    };
    if budget <= 2 || rng.gen_bool(0.2) {
        // A negated atom has size 2.
        let l = leaf(rng);
        return if l.size() > budget { Ltl::atom("a") } else { l };
    }
    match rng.gen_range(0..7) {
        0 => Ltl::next(random_nnf(rng, budget - 1)),
        1 => Ltl::finally(random_nnf(rng, budget - 1)),
        2 => Ltl::globally(random_nnf(rng, budget - 1)),
        k => {
            let left = rng.gen_range(1..=budget - 2);
            let x = random_nnf(rng, left);
            let y = random_nnf(rng, budget - 1 - x.size());
            let (x, y) = (Box::new(x), Box::new(y));
            match k {
                3 => Ltl::And(x, y),
                4 => Ltl::Or(x, y),
                5 => Ltl::Until(x, y),
                _ => Ltl::Release(x, y),
            }
        }
    }
}

/// Every word over `SYMBOLS` with length in `lens`.
pub fn words(lens: std::ops::RangeInclusive<usize>) -> Vec<Vec<&'static str>> {
    let mut out = Vec::new();
    for len in lens {
        let mut w = vec![0usize; len];
        loop {
            out.push(w.iter().map(|i| SYMBOLS[*i]).collect());
            let mut i = 0;
            while i < len && w[i] == SYMBOLS.len() - 1 {
                w[i] = 0;
                i += 1;
            }
            if i == len {
                break;
            }
            w[i] += 1;
        }
    }
    out
}

pub fn robot_aug(n: usize, k: u32) -> AugmentedSystem {
    monitored(&robots(n), Some(&robots_prompt(n)), k).unwrap()
}

pub fn robot_query(n: usize) -> (AugmentedSystem, EfQuery) {
    let aug = robot_aug(n, 1);
    let q = assemble(&aug, &EncodeOptions::default()).unwrap();
    (aug, q)
}

/// A uniformly random valuation inside the declared parameter ranges.
pub fn random_valuation(aug: &AugmentedSystem, rng: &mut ChaCha8Rng) -> Valuation {
    Valuation(
        aug.base
            .parameters
            .iter()
            .map(|(k, r)| (k.clone(), rng.gen_range(r.lo..=r.hi)))
            .collect(),
    )
}

/// Lassos `(u, w)` with `|u| ≤ 4` and `1 ≤ |w| ≤ 4` over `SYMBOLS`.
pub fn lassos() -> Vec<(Vec<&'static str>, Vec<&'static str>)> {
    let prefixes = words(0..=4);
    let cycles = words(1..=4);
    prefixes
        .iter()
        .flat_map(|u| cycles.iter().map(move |w| (u.clone(), w.clone())))
        .collect()
}

/// Seeded sample of `count` random NNF formulas of size at most 6.
pub fn formula_sample(seed: u64, count: usize) -> Vec<Ltl> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_nnf(&mut rng, 6)).collect()
}

/// First disagreement between the automaton of `f` (and, if asked, its
/// post-processed form) and the lasso evaluator.
pub fn lasso_mismatch(
    f: &Ltl,
    lassos: &[(Vec<&'static str>, Vec<&'static str>)],
    postprocessed: bool,
) -> Option<String> {
    let b = tosyn_core::ltl_to_buchi(f);
    let pp = postprocessed.then(|| tosyn_core::ltl::postprocess_alphabet(&b, &b.alphabet));
    for (u, w) in lassos {
        let want = holds(f, u, w);
        if b.accepts_lasso(u, w) != want {
            return Some(format!("{f}: {u:?}({w:?})^w should be {want}"));
        }
        if pp.as_ref().is_some_and(|p| p.accepts_lasso(u, w) != want) {
            return Some(format!("{f} (post-processed): {u:?}({w:?})^w should be {want}"));
        }
    }
    None
}

/// `base` with every parameter moved by at most `spread`, clamped to its range.
pub fn jitter(aug: &AugmentedSystem, base: &Valuation, spread: i64, rng: &mut ChaCha8Rng) -> Valuation {
    Valuation(
        aug.base
            .parameters
            .iter()
            .map(|(k, r)| {
                let x = base.get(k).expect("base covers every parameter") + rng.gen_range(-spread..=spread);
                (k.clone(), x.clamp(r.lo, r.hi))
            })
            .collect(),
    )
}

/// Uniform samples, then samples around the known schedule at two spreads.
pub fn sweep_valuations(aug: &AugmentedSystem, count: usize, seed: u64) -> Vec<Valuation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = tosyn_core::bench_models::example_valuation();
    (0..count)
        .map(|i| match i % 3 {
            0 => random_valuation(aug, &mut rng),
            1 => jitter(aug, &base, 3, &mut rng),
            _ => jitter(aug, &base, 8, &mut rng),
        })
        .collect()
}
