//! Invariants of the timed system derived without exploring it: location
//! invariants lifted to flags, reach windows of clocks reset only on entry
//! into the initial location, reset offsets and clock equalities.

use std::collections::{BTreeMap, BTreeSet};

use tracing::debug;

use super::formula::{Formula, LinExpr, Rel};
use super::{history_name, Ctx};
use crate::model::{Component, GuardRel};

const PATH_CAP: usize = 10_000;

/// Bound candidates kept as an antichain; `max` selects which side dominates.
#[derive(Debug, Clone, Default)]
struct Antichain(Vec<LinExpr>);

impl Antichain {
    fn insert(&mut self, ctx: &Ctx, e: LinExpr, max: bool) {
        let le = |a: &LinExpr, b: &LinExpr| ctx.provably_le(a, b);
        let dominated = self.0.iter().any(|x| if max { le(&e, x) } else { le(x, &e) });
        if dominated {
            return;
        }
        self.0.retain(|x| if max { !le(x, &e) } else { !le(&e, x) });
        self.0.push(e);
    }
}

fn chain_eq(ctx: &Ctx, clocks: &[&str]) -> Formula {
    Formula::and(
        clocks
            .windows(2)
            .map(|w| Formula::atom(ctx.clock_expr(w[0]), Rel::Eq, ctx.clock_expr(w[1]))),
    )
}

/// Simple paths (as jump index sequences) from the initial location that do
/// not re-enter it; `None` if there are too many.
fn simple_paths(c: &Component) -> Option<Vec<Vec<usize>>> {
    let init = c.initial_index();
    let mut out = vec![vec![]];
    let mut stack: Vec<(Vec<usize>, Vec<bool>)> = vec![(vec![], {
        let mut v = vec![false; c.locations.len()];
        v[init] = true;
        v
    })];
    while let Some((path, visited)) = stack.pop() {
        let here = match path.last() {
            Some(j) => c.loc_index(&c.jumps[*j].to).unwrap(),
            None => init,
        };
        for (ji, j) in c.jumps.iter().enumerate() {
            if c.loc_index(&j.from) != Some(here) {
                continue;
            }
            let to = c.loc_index(&j.to).unwrap();
            if visited[to] {
                continue;
            }
            let mut p = path.clone();
            p.push(ji);
            let mut v = visited.clone();
            v[to] = true;
            out.push(p.clone());
            if out.len() > PATH_CAP {
                return None;
            }
            stack.push((p, v));
        }
    }
    Some(out)
}

/// Locations reachable from the initial one without re-entering it, and
/// those among them reachable from a cycle avoiding the initial location.
fn reach_and_cyclic(c: &Component) -> (BTreeSet<usize>, BTreeSet<usize>) {
    let n = c.locations.len();
    let init = c.initial_index();
    let succ: Vec<Vec<usize>> = (0..n)
        .map(|l| {
            c.jumps
                .iter()
                .filter(|j| c.loc_index(&j.from) == Some(l))
                .map(|j| c.loc_index(&j.to).unwrap())
                .filter(|t| *t != init)
                .collect()
        })
        .collect();
    let closure = |start: Vec<usize>| {
        let mut seen: BTreeSet<usize> = start.iter().copied().collect();
        let mut stack = start;
        while let Some(l) = stack.pop() {
            for t in &succ[l] {
                if seen.insert(*t) {
                    stack.push(*t);
                }
            }
        }
        seen
    };
    let reach = closure(vec![init]);
    let on_cycle: Vec<usize> = reach
        .iter()
        .copied()
        .filter(|l| closure(succ[*l].clone()).contains(l))
        .collect();
    let cyclic = closure(on_cycle);
    (reach, cyclic)
}

/// Upper bound on the time spent in one visit of `loc`: an invariant bound
/// (each clock is nonnegative on entry). Picks the one with the smallest
/// worst case.
fn dwell_max(ctx: &Ctx, c: &Component, loc: &str) -> Option<LinExpr> {
    c.invariant(loc)
        .iter()
        .map(|a| ctx.term(&a.le))
        .min_by_key(|e| ctx.interval(e).1)
}

/// Lower bound on the time spent in a visit entered by resetting `entry`
/// and left by jump `leave`: a lower guard bound on a clock reset on entry.
fn dwell_min(ctx: &mut Ctx, ci: usize, entry: &BTreeSet<String>, leave: usize) -> LinExpr {
    let j = ctx.sys.components[ci].jumps[leave].clone();
    let mut best: Option<LinExpr> = None;
    for (ai, g) in j.guard.iter().enumerate() {
        let Some(clk) = g.single_clock() else { continue };
        if !entry.contains(clk) {
            continue;
        }
        let rhs = ctx.guard_rhs(ci, leave, ai);
        if best.as_ref().is_none_or(|b| ctx.interval(&rhs).0 > ctx.interval(b).0) {
            best = Some(rhs);
        }
    }
    best.unwrap_or_else(LinExpr::zero)
}

/// `ℓ → Inv(ℓ)` for every location, plus reach windows.
pub fn component_invariants(ctx: &mut Ctx, ci: usize) -> Formula {
    let c = ctx.sys.components[ci].clone();
    let mut parts = Vec::new();
    for l in &c.locations {
        let inv = c.invariant(l);
        if !inv.is_empty() {
            parts.push(Formula::implies(
                ctx.flag(ci, l),
                Formula::and(inv.iter().map(|a| ctx.inv_atom(a))),
            ));
        }
    }
    parts.push(reach_windows(ctx, ci));
    Formula::and(parts)
}

/// For each clock reset only on jumps into the initial location: lower
/// bounds from the shortest guard-forced path to each location and upper
/// bounds from the longest invariant-bounded path.
fn reach_windows(ctx: &mut Ctx, ci: usize) -> Formula {
    let c = ctx.sys.components[ci].clone();
    let init = c.initial_index();
    let Some(paths) = simple_paths(&c) else {
        debug!(component = %c.name, "too many paths; reach windows skipped");
        return Formula::True;
    };
    let (reach, cyclic) = reach_and_cyclic(&c);
    let all_clocks: BTreeSet<String> = c.clocks.iter().cloned().collect();
    let into_init: Vec<&crate::model::Jump> = c.incoming(&c.initial).collect();
    let loc_of = |p: &[usize]| match p.last() {
        Some(j) => c.loc_index(&c.jumps[*j].to).unwrap(),
        None => init,
    };

    let mut parts = Vec::new();
    for clk in &c.clocks {
        let resets_elsewhere = c.jumps.iter().any(|j| j.resets.contains(clk) && j.to != c.initial);
        if resets_elsewhere {
            continue;
        }
        let x = ctx.clock_expr(clk);

        // Upper bounds.
        if into_init.iter().all(|j| j.resets.contains(clk)) {
            let mut maxstay: BTreeMap<usize, Option<Antichain>> = BTreeMap::new();
            for l in &reach {
                maxstay.insert(*l, if cyclic.contains(l) { None } else { Some(Antichain::default()) });
            }
            for p in &paths {
                let end = loc_of(p);
                let Some(Some(chain)) = maxstay.get(&end).cloned() else { continue };
                let mut locs = vec![init];
                locs.extend(p.iter().map(|j| c.loc_index(&c.jumps[*j].to).unwrap()));
                let mut sum = Some(LinExpr::zero());
                for l in locs {
                    sum = match (sum, dwell_max(ctx, &c, &c.locations[l])) {
                        (Some(s), Some(d)) => Some(s + d),
                        _ => None,
                    };
                }
                let entry = maxstay.get_mut(&end).unwrap();
                match sum {
                    Some(s) => {
                        let mut chain = chain;
                        chain.insert(ctx, s, true);
                        *entry = Some(chain);
                    }
                    None => *entry = None,
                }
            }
            let bounds: BTreeSet<LinExpr> = maxstay.values().flatten().flat_map(|a| a.0.clone()).collect();
            for b in bounds {
                let outside: Vec<usize> = reach
                    .iter()
                    .copied()
                    .filter(|l| match &maxstay[l] {
                        None => true,
                        Some(a) => a.0.iter().any(|m| !ctx.provably_le(m, &b)),
                    })
                    .collect();
                if outside.len() < reach.len() {
                    parts.push(Formula::implies(
                        Formula::atom(x.clone(), Rel::Gt, b.clone()),
                        Formula::or(outside.iter().map(|l| ctx.flag(ci, &c.locations[*l]))),
                    ));
                }
            }
        }

        // Lower bounds. Entry into the initial location: at time zero (all
        // clocks zero) or by one of its incoming jumps.
        let mut entries: Vec<BTreeSet<String>> = vec![all_clocks.clone()];
        entries.extend(into_init.iter().map(|j| j.resets.iter().cloned().collect()));
        let mut minreach: BTreeMap<usize, Antichain> = BTreeMap::new();
        for p in &paths {
            for e0 in &entries {
                let mut sum = LinExpr::zero();
                let mut entry = e0.clone();
                for ji in p {
                    sum = sum + dwell_min(ctx, ci, &entry, *ji);
                    entry = c.jumps[*ji].resets.iter().cloned().collect();
                }
                minreach.entry(loc_of(p)).or_default().insert(ctx, sum, false);
            }
        }
        let zero = LinExpr::zero();
        let bounds: BTreeSet<LinExpr> = minreach
            .values()
            .flat_map(|a| a.0.clone())
            .filter(|b| !ctx.provably_le(b, &zero))
            .collect();
        for b in bounds {
            let early: Vec<usize> = reach
                .iter()
                .copied()
                .filter(|l| match minreach.get(l) {
                    None => true,
                    Some(a) => a.0.iter().any(|m| !ctx.provably_le(&b, m)),
                })
                .collect();
            if early.len() < reach.len() {
                parts.push(Formula::implies(
                    Formula::atom(x.clone(), Rel::Lt, b.clone()),
                    Formula::or(early.iter().map(|l| ctx.flag(ci, &c.locations[*l]))),
                ));
            }
        }
    }
    Formula::and(parts)
}

/// Clocks `g`, `d` hold equal values throughout every visit of `loc`: both
/// are reset by every jump entering it.
fn equal_at(c: &Component, loc: &str, g: &str, d: &str) -> bool {
    g == d
        || c.incoming(loc)
            .all(|j| j.resets.iter().any(|r| r == g) && j.resets.iter().any(|r| r == d))
}

/// Lower bound on clock `d` at the moment jump `ji` fires, from its guard.
fn guard_lower_on(ctx: &mut Ctx, ci: usize, ji: usize, d: &str) -> Option<LinExpr> {
    let c = ctx.sys.components[ci].clone();
    let j = &c.jumps[ji];
    let mut best: Option<LinExpr> = None;
    for (ai, g) in j.guard.iter().enumerate() {
        let Some(clk) = g.single_clock() else { continue };
        if !matches!(g.rel, GuardRel::Ge | GuardRel::Gt | GuardRel::Eq) {
            continue;
        }
        if !equal_at(&c, &j.from, clk, d) {
            continue;
        }
        let rhs = ctx.guard_rhs(ci, ji, ai);
        if best.as_ref().is_none_or(|b| ctx.interval(&rhs).0 > ctx.interval(b).0) {
            best = Some(rhs);
        }
    }
    best
}

/// Reset offsets, per-location and cross-component equalities, and global
/// equalities of clocks reset by exactly the same interactions. With
/// `history`, reset offsets are also emitted per entering interaction.
pub fn jump_invariants(ctx: &mut Ctx, history: bool) -> Formula {
    let sys = ctx.sys;
    let mut parts = Vec::new();

    for (ci, c) in sys.components.iter().enumerate() {
        for l in &c.locations {
            let incoming: Vec<usize> = c
                .jumps
                .iter()
                .enumerate()
                .filter(|(_, j)| &j.to == l)
                .map(|(i, _)| i)
                .collect();
            // Clocks reset together on every entry.
            if !incoming.is_empty() || *l == c.initial {
                let together: Vec<&str> = c
                    .clocks
                    .iter()
                    .filter(|x| incoming.iter().all(|ji| c.jumps[*ji].resets.contains(x)))
                    .map(String::as_str)
                    .collect();
                if together.len() >= 2 {
                    parts.push(Formula::implies(ctx.flag(ci, l), chain_eq(ctx, &together)));
                }
            }
            if incoming.is_empty() || *l == c.initial {
                continue;
            }
            // Reset offsets d − x ≥ a for x reset on entry, d not reset.
            for x in &c.clocks {
                for d in &c.clocks {
                    if x == d {
                        continue;
                    }
                    let mut per_edge: Vec<(usize, Option<LinExpr>)> = Vec::new();
                    for ji in &incoming {
                        let j = &c.jumps[*ji];
                        let b = if j.resets.contains(x) && !j.resets.contains(d) {
                            guard_lower_on(ctx, ci, *ji, d)
                        } else {
                            None
                        };
                        per_edge.push((*ji, b));
                    }
                    let offset = |b: &LinExpr| {
                        Formula::atom(ctx.clock_expr(d) - ctx.clock_expr(x), Rel::Ge, b.clone())
                    };
                    if per_edge.iter().all(|(_, b)| b.is_some()) {
                        let mut bs: Vec<LinExpr> = per_edge.iter().filter_map(|(_, b)| b.clone()).collect();
                        bs.sort();
                        bs.dedup();
                        parts.push(Formula::implies(ctx.flag(ci, l), Formula::or(bs.iter().map(offset))));
                    }
                    if history {
                        for (ji, b) in &per_edge {
                            let Some(b) = b else { continue };
                            for sigma in sys.interactions_with_port(&c.name, &c.jumps[*ji].port) {
                                let prev = ctx.vars.id(&history_name(sigma, 1)).expect("declared history");
                                parts.push(Formula::implies(
                                    Formula::and([ctx.flag(ci, l), Formula::var(prev)]),
                                    offset(b),
                                ));
                            }
                        }
                    }
                }
            }
        }
    }

    // Destinations of an interaction resetting clocks of several components.
    let all_clocks = sys.clocks();
    let mut emitted = BTreeSet::new();
    for sigma in sys.interaction_names() {
        let resets = sys.resets_of(sigma);
        let owners: Vec<(usize, String)> = sys
            .participants(sigma)
            .into_iter()
            .filter(|(_, j)| !j.resets.is_empty())
            .map(|(ci, j)| (ci, j.to.clone()))
            .collect();
        if owners.len() < 2 {
            continue;
        }
        let closed = sys.interaction_names().all(|tau| {
            let enters = sys
                .participants(tau)
                .iter()
                .any(|(ci, j)| owners.iter().any(|(oi, to)| oi == ci && &j.to == to));
            !enters || resets.is_subset(&sys.resets_of(tau))
        });
        if !closed || !emitted.insert(owners.clone()) {
            continue;
        }
        let ordered: Vec<&str> = all_clocks.iter().copied().filter(|c| resets.contains(c)).collect();
        parts.push(Formula::implies(
            Formula::and(owners.iter().map(|(ci, l)| ctx.flag(*ci, l))),
            chain_eq(ctx, &ordered),
        ));
    }

    // Clocks reset by exactly the same interactions stay equal.
    let mut classes: BTreeMap<BTreeSet<&str>, Vec<&str>> = BTreeMap::new();
    for clk in &all_clocks {
        let set: BTreeSet<&str> = sys
            .interaction_names()
            .filter(|s| sys.resets_of(s).contains(clk))
            .collect();
        classes.entry(set).or_default().push(clk);
    }
    for members in classes.values() {
        if members.len() >= 2 {
            parts.push(chain_eq(ctx, members));
        }
    }
    Formula::and(parts)
}
