//! Fences: conditions at the border of the region that is bound to reach a
//! risk location, forcing a safe interaction to win the race.

use std::collections::BTreeSet;

use tracing::debug;

use super::abs::ReachSet;
use super::formula::{Formula, LinExpr, Rel};
use super::{monitor_flag_name, ten, Ctx};
use crate::model::GuardRel;
use crate::rational::Rat;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FenceInfo {
    pub nodes: usize,
    /// Some fence node had an interaction whose guard cannot be blocked by
    /// lower bounds alone and was left unconstrained.
    pub skipped: bool,
}

/// Abstract nodes from which every path reaches a risk vector.
pub fn attractor(reach: &ReachSet, is_risk: impl Fn(&[usize]) -> bool) -> BTreeSet<usize> {
    let mut attr: BTreeSet<usize> = (0..reach.vectors.len())
        .filter(|n| is_risk(&reach.vectors[*n]))
        .collect();
    loop {
        let mut grew = false;
        for n in 0..reach.vectors.len() {
            if attr.contains(&n) {
                continue;
            }
            let succ: Vec<usize> = reach.successors(n).map(|(_, t)| t).collect();
            if !succ.is_empty() && succ.iter().all(|t| attr.contains(t)) {
                attr.insert(n);
                grew = true;
            }
        }
        if !grew {
            return attr;
        }
    }
}

/// Lower-bound guard atoms of the participants of `sigma`, or `None` if some
/// atom is an equality or ranges over several clocks.
fn lower_guard(ctx: &mut Ctx, sigma: &str) -> Option<Formula> {
    let mut atoms = Vec::new();
    for (ci, j) in ctx.sys.participants(sigma) {
        let ji = ctx.jump_index(ci, &j.port);
        for (ai, g) in j.guard.iter().enumerate() {
            let clk = g.single_clock()?;
            let k = Rat::from_integer(g.lhs[clk] as i128);
            let rel = match g.rel {
                GuardRel::Eq => return None,
                GuardRel::Ge => Rel::Ge,
                GuardRel::Gt => Rel::Gt,
            };
            let lhs = ctx.clock_expr(clk).scale(k);
            let rhs: LinExpr = ctx.guard_rhs(ci, ji, ai);
            atoms.push(Formula::atom(lhs, rel, rhs));
        }
    }
    Some(Formula::and(atoms))
}

/// `⋀ fences` over the fence nodes of `reach`.
pub fn fences(ctx: &mut Ctx, reach: &ReachSet) -> (Formula, FenceInfo) {
    let Some(m) = ctx.monitor else {
        return (Formula::True, FenceInfo::default());
    };
    let mi = ctx.sys.components.len();
    let attr = attractor(reach, |v| m.is_risk(v[mi]));
    let mut info = FenceInfo::default();
    let mut parts = Vec::new();
    for n in 0..reach.vectors.len() {
        if attr.contains(&n) {
            continue;
        }
        let (into, out): (Vec<(usize, usize)>, Vec<(usize, usize)>) =
            reach.successors(n).partition(|(_, t)| attr.contains(t));
        if into.is_empty() {
            continue;
        }
        info.nodes += 1;
        let into: BTreeSet<usize> = into.into_iter().map(|(s, _)| s).collect();
        let out: BTreeSet<usize> = out.into_iter().map(|(s, _)| s).collect();
        let mut guards = Vec::new();
        for s in &into {
            match lower_guard(ctx, &reach.interactions[*s]) {
                Some(g) => guards.push(g),
                None => {
                    info.skipped = true;
                    guards.clear();
                    break;
                }
            }
        }
        if guards.is_empty() {
            continue;
        }
        let safe: Vec<Formula> = out.iter().map(|s| ten::ten(ctx, &reach.interactions[*s])).collect();
        let v = &reach.vectors[n];
        let mut flags: Vec<Formula> = (0..mi).map(|ci| ctx.flag(ci, &ctx.sys.components[ci].locations[v[ci]])).collect();
        flags.push(Formula::var(ctx.vars.id(&monitor_flag_name(m, v[mi])).expect("declared")));
        let body = Formula::and(guards.iter().map(|g| {
            Formula::or(safe.iter().map(|t| Formula::and([t.clone(), Formula::not(g.clone())])))
        }));
        parts.push(Formula::implies(Formula::and(flags), body));
    }
    debug!(nodes = info.nodes, skipped = info.skipped, "fences");
    (Formula::and(parts), info)
}
