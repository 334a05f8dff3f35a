//! Timed enabledness `tEn⟨σ⟩` and the deadlock condition.
//!
//! `tEn⟨σ⟩` holds in a state from which σ can fire after some finite delay
//! that respects every invariant. It is built from delay bounds: each guard
//! atom gives a lower (or upper) bound on the delay, each invariant an upper
//! bound. The formula is a sufficient condition for firing.

use num_traits::{Signed, Zero};

use super::formula::{Formula, LinExpr, Rel};
use super::Ctx;
use super::TenStyle;
use crate::model::GuardRel;
use crate::rational::Rat;

#[derive(Debug, Clone)]
struct Bound {
    expr: LinExpr,
    strict: bool,
}

impl Bound {
    fn weak(expr: LinExpr) -> Self {
        Bound { expr, strict: false }
    }
}

/// `lower ≤ upper` (strict if either side is strict).
fn pair(l: &Bound, u: &Bound) -> Formula {
    let rel = if l.strict || u.strict { Rel::Lt } else { Rel::Le };
    Formula::atom(l.expr.clone(), rel, u.expr.clone())
}

struct Parts {
    flags: Vec<Formula>,
    /// Source invariants of participants: the atoms and their caps `b − x`.
    src_atoms: Vec<Formula>,
    src_caps: Vec<Bound>,
    lowers: Vec<Bound>,
    uppers: Vec<Bound>,
    statics: Vec<Formula>,
    /// Per non-participant component with invariants: `(flag, caps)` per location.
    stays: Vec<Vec<(Formula, Vec<Bound>)>>,
    exact: bool,
}

fn collect(ctx: &mut Ctx, sigma: &str) -> Parts {
    let sys = ctx.sys;
    let participants = sys.participants(sigma);
    let mut p = Parts {
        flags: vec![],
        src_atoms: vec![],
        src_caps: vec![],
        lowers: vec![],
        uppers: vec![],
        statics: vec![],
        stays: vec![],
        exact: false,
    };
    for (ci, j) in &participants {
        let comp = &sys.components[*ci];
        let ji = ctx.jump_index(*ci, &j.port);
        p.flags.push(ctx.flag(*ci, &j.from));
        for (ai, g) in j.guard.iter().enumerate() {
            let rhs = ctx.guard_rhs(*ci, ji, ai);
            let mut base = LinExpr::zero();
            let mut slope = Rat::zero();
            for (clk, k) in &g.lhs {
                let k = Rat::from_integer(*k as i128);
                base.add_term(ctx.clock(clk), k);
                slope += k;
            }
            if g.single_clock().is_none() || g.rel == GuardRel::Eq {
                p.exact = true;
            }
            if slope.is_zero() {
                let rel = match g.rel {
                    GuardRel::Eq => Rel::Eq,
                    GuardRel::Gt => Rel::Gt,
                    GuardRel::Ge => Rel::Ge,
                };
                p.statics.push(Formula::atom(base, rel, rhs));
                continue;
            }
            // slope·d ▷ rhs − base
            let b = (rhs - base).scale(slope.recip());
            let strict = g.rel == GuardRel::Gt;
            let bound = Bound { expr: b, strict };
            match (g.rel, slope.is_positive()) {
                (GuardRel::Eq, _) => {
                    p.lowers.push(bound.clone());
                    p.uppers.push(bound);
                }
                (_, true) => p.lowers.push(bound),
                (_, false) => p.uppers.push(bound),
            }
        }
        for a in comp.invariant(&j.from) {
            p.src_atoms.push(ctx.inv_atom(a));
            p.src_caps.push(Bound::weak(ctx.term(&a.le) - ctx.clock_expr(&a.clock)));
        }
        for a in comp.invariant(&j.to) {
            if !j.resets.contains(&a.clock) {
                p.uppers.push(Bound::weak(ctx.term(&a.le) - ctx.clock_expr(&a.clock)));
            }
        }
    }
    for (ci, comp) in sys.components.iter().enumerate() {
        if participants.iter().any(|(pi, _)| *pi == ci) || !comp.has_invariants() {
            continue;
        }
        let locs = comp
            .locations
            .iter()
            .map(|l| {
                let caps = comp
                    .invariant(l)
                    .iter()
                    .map(|a| Bound::weak(ctx.term(&a.le) - ctx.clock_expr(&a.clock)))
                    .collect();
                (ctx.flag(ci, l), caps)
            })
            .collect();
        p.stays.push(locs);
    }
    p
}

/// Fires at the latest delay `L = min(source caps)`: every lower bound must
/// be at most each cap and `L` must not exceed any other upper bound.
fn latest(p: Parts) -> Formula {
    let within = |u: &Bound| Formula::or(p.src_caps.iter().map(|c| pair(c, u)));
    let mut conj = p.flags.clone();
    conj.extend(p.src_atoms.iter().cloned());
    for l in &p.lowers {
        for c in &p.src_caps {
            conj.push(pair(l, c));
        }
    }
    for u in &p.uppers {
        conj.push(within(u));
    }
    for comp in &p.stays {
        conj.push(Formula::or(comp.iter().map(|(flag, caps)| {
            Formula::and(std::iter::once(flag.clone()).chain(caps.iter().map(within)))
        })));
    }
    conj.extend(p.statics);
    Formula::and(conj)
}

/// Exact elimination of the delay: every lower bound (including 0) is at
/// most every applicable upper bound.
fn exact(p: Parts) -> Formula {
    let mut lowers = p.lowers.clone();
    lowers.push(Bound::weak(LinExpr::zero()));
    let mut uppers = p.src_caps.clone();
    uppers.extend(p.uppers.iter().cloned());
    let mut conj = p.flags.clone();
    conj.extend(p.statics.iter().cloned());
    for l in &lowers {
        for u in &uppers {
            conj.push(pair(l, u));
        }
    }
    for comp in &p.stays {
        for (flag, caps) in comp {
            if caps.is_empty() {
                continue;
            }
            let inner = lowers.iter().flat_map(|l| caps.iter().map(move |u| pair(l, u)));
            conj.push(Formula::implies(flag.clone(), Formula::and(inner)));
        }
    }
    Formula::and(conj)
}

/// `tEn⟨σ⟩` over the base components.
pub fn ten(ctx: &mut Ctx, sigma: &str) -> Formula {
    let p = collect(ctx, sigma);
    if ctx.ten_style == TenStyle::Latest && !p.exact && !p.src_caps.is_empty() {
        latest(p)
    } else {
        exact(p)
    }
}

/// `⋀_σ ¬tEn⟨σ⟩`.
pub fn deadlock(ctx: &mut Ctx) -> Formula {
    let sigmas: Vec<String> = ctx.sys.interaction_names().map(str::to_string).collect();
    Formula::and(sigmas.iter().map(|s| Formula::not(ten(ctx, s))))
}
