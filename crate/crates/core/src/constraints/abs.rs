//! Untimed abstract reachability over location vectors, its characteristic
//! formula, one-hot well-formedness and the interaction history encoding.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use tracing::debug;

use super::formula::{Formula, VarId, VarKind};
use super::{history_name, ConstraintError, Ctx};
use crate::monitor::AugmentedSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AbsEncoding {
    /// Disjunction of the reached vectors.
    Dnf,
    /// Conjunction of negated location pairs that never co-occur; used only
    /// when it characterizes the reached set exactly.
    Cnf,
    /// The smaller of the two.
    #[default]
    Auto,
}

/// Reached location vectors (base components in order, then the monitor).
#[derive(Debug, Clone, Default)]
pub struct ReachSet {
    pub vectors: Vec<Vec<usize>>,
    /// `(source vector, interaction index, target vector)`.
    pub edges: Vec<(usize, usize, usize)>,
    pub interactions: Vec<String>,
    pub has_monitor: bool,
    /// `(vector, last interactions, most recent first)` when history is on.
    pub history: Vec<(usize, Vec<Option<usize>>)>,
}

impl ReachSet {
    pub fn index_of(&self, v: &[usize]) -> Option<usize> {
        self.vectors.iter().position(|x| x == v)
    }

    pub fn successors(&self, node: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges
            .iter()
            .filter(move |(s, _, _)| *s == node)
            .map(|(_, sigma, t)| (*sigma, *t))
    }

    /// Graphviz rendering with location names; risk vectors are highlighted.
    pub fn to_dot(&self, aug: &AugmentedSystem) -> String {
        use std::fmt::Write as _;
        let sys = &aug.base;
        let mut out = String::from("digraph abs {\n  init [shape=point];\n");
        for (i, v) in self.vectors.iter().enumerate() {
            let mut names: Vec<&str> = sys
                .components
                .iter()
                .zip(v)
                .map(|(c, l)| c.locations[*l].as_str())
                .collect();
            let mut risk = false;
            if let (Some(m), Some(l)) = (&aug.monitor, v.get(sys.components.len())) {
                names.push(&m.names[*l]);
                risk = m.is_risk(*l);
            }
            let style = if risk { ", color=red" } else { "" };
            let _ = writeln!(out, "  v{i} [shape=box, label=\"{}\"{style}];", names.join(" "));
        }
        out.push_str("  init -> v0;\n");
        for (s, sigma, t) in &self.edges {
            let _ = writeln!(out, "  v{s} -> v{t} [label=\"{}\"];", self.interactions[*sigma]);
        }
        out.push_str("}\n");
        out
    }
}

fn step(aug: &AugmentedSystem, v: &[usize], sigma: &str) -> Option<Vec<usize>> {
    let sys = &aug.base;
    let mut next = v.to_vec();
    for (ci, j) in sys.participants(sigma) {
        let c = &sys.components[ci];
        if c.locations[v[ci]] != j.from {
            return None;
        }
        next[ci] = c.loc_index(&j.to).expect("validated");
    }
    if let Some(m) = &aug.monitor {
        let mi = sys.components.len();
        if m.is_risk(v[mi]) {
            return None;
        }
        next[mi] = m.step(v[mi], sigma)?;
    }
    Some(next)
}

/// Breadth-first exploration of the untimed product. With `history > 0`
/// also explores vectors paired with their last `history` interactions.
pub fn explore_abs(aug: &AugmentedSystem, history: usize, cap: usize) -> Result<ReachSet, ConstraintError> {
    let sys = &aug.base;
    let interactions: Vec<String> = sys.interaction_names().map(str::to_string).collect();
    let mut init: Vec<usize> = sys.components.iter().map(|c| c.initial_index()).collect();
    if let Some(m) = &aug.monitor {
        init.push(m.initial);
    }
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut reach = ReachSet {
        interactions: interactions.clone(),
        has_monitor: aug.monitor.is_some(),
        ..Default::default()
    };
    index.insert(init.clone(), 0);
    reach.vectors.push(init);
    let mut queue = VecDeque::from([0usize]);
    while let Some(n) = queue.pop_front() {
        let v = reach.vectors[n].clone();
        for (si, sigma) in interactions.iter().enumerate() {
            let Some(next) = step(aug, &v, sigma) else {
                continue;
            };
            let t = match index.get(&next) {
                Some(t) => *t,
                None => {
                    if reach.vectors.len() >= cap {
                        return Err(ConstraintError::AbsCap { cap });
                    }
                    let t = reach.vectors.len();
                    index.insert(next.clone(), t);
                    reach.vectors.push(next);
                    queue.push_back(t);
                    t
                }
            };
            reach.edges.push((n, si, t));
        }
    }
    if history > 0 {
        let start = (0usize, vec![None; history]);
        let mut seen: HashMap<(usize, Vec<Option<usize>>), ()> = HashMap::new();
        seen.insert(start.clone(), ());
        reach.history.push(start.clone());
        let mut queue = VecDeque::from([start]);
        while let Some((n, h)) = queue.pop_front() {
            for (sigma, t) in reach.successors(n).collect::<Vec<_>>() {
                let mut nh = Vec::with_capacity(history);
                nh.push(Some(sigma));
                nh.extend_from_slice(&h[..history - 1]);
                let key = (t, nh);
                if seen.contains_key(&key) {
                    continue;
                }
                if reach.history.len() >= cap {
                    return Err(ConstraintError::AbsCap { cap });
                }
                seen.insert(key.clone(), ());
                reach.history.push(key.clone());
                queue.push_back(key);
            }
        }
    }
    debug!(vectors = reach.vectors.len(), edges = reach.edges.len(), "abstract reachability");
    Ok(reach)
}

/// Location flags of each component (base components, then the monitor).
fn flag_groups(ctx: &Ctx) -> Vec<Vec<VarId>> {
    let mut groups: Vec<Vec<VarId>> = ctx
        .sys
        .components
        .iter()
        .enumerate()
        .map(|(ci, c)| c.locations.iter().map(|l| ctx.flag_id(ci, l)).collect())
        .collect();
    if let Some(m) = ctx.monitor {
        groups.push(
            (0..m.num_locations())
                .map(|i| ctx.vars.id(&super::monitor_flag_name(m, i)).expect("declared"))
                .collect(),
        );
    }
    groups
}

fn exactly_one(ids: &[VarId]) -> Formula {
    let mut parts = vec![Formula::or(ids.iter().map(|v| Formula::var(*v)))];
    parts.extend(at_most_one(ids));
    Formula::and(parts)
}

fn at_most_one(ids: &[VarId]) -> Vec<Formula> {
    let mut out = Vec::new();
    for i in 0..ids.len() {
        for j in i + 1..ids.len() {
            out.push(Formula::not(Formula::and([Formula::var(ids[i]), Formula::var(ids[j])])));
        }
    }
    out
}

/// Exactly one location flag per component.
pub fn one_hot(ctx: &Ctx) -> Formula {
    Formula::and(flag_groups(ctx).iter().map(|g| exactly_one(g)))
}

fn vector_formula(groups: &[Vec<VarId>], v: &[usize]) -> Formula {
    Formula::and(v.iter().enumerate().map(|(ci, l)| Formula::var(groups[ci][*l])))
}

/// Number of vectors consistent with the allowed location pairs, stopping
/// once `limit` is exceeded.
fn count_pair_consistent(
    sizes: &[usize],
    allowed: &dyn Fn(usize, usize, usize, usize) -> bool,
    limit: usize,
) -> usize {
    fn go(
        sizes: &[usize],
        allowed: &dyn Fn(usize, usize, usize, usize) -> bool,
        prefix: &mut Vec<usize>,
        count: &mut usize,
        limit: usize,
    ) {
        if *count > limit {
            return;
        }
        let i = prefix.len();
        if i == sizes.len() {
            *count += 1;
            return;
        }
        for l in 0..sizes[i] {
            if prefix.iter().enumerate().all(|(j, lj)| allowed(j, *lj, i, l)) {
                prefix.push(l);
                go(sizes, allowed, prefix, count, limit);
                prefix.pop();
            }
        }
    }
    let mut count = 0;
    go(sizes, allowed, &mut Vec::new(), &mut count, limit);
    count
}

/// Characteristic formula of the reached vectors.
pub fn abs_formula(ctx: &Ctx, reach: &ReachSet, enc: AbsEncoding) -> Formula {
    let groups = flag_groups(ctx);
    let dnf = || Formula::or(reach.vectors.iter().map(|v| vector_formula(&groups, v)));
    if enc == AbsEncoding::Dnf {
        return dnf();
    }
    let n = groups.len();
    let sizes: Vec<usize> = groups.iter().map(Vec::len).collect();
    let mut seen_single: Vec<Vec<bool>> = sizes.iter().map(|s| vec![false; *s]).collect();
    let mut pairs = std::collections::HashSet::new();
    for v in &reach.vectors {
        for i in 0..n {
            seen_single[i][v[i]] = true;
            for j in i + 1..n {
                pairs.insert((i, v[i], j, v[j]));
            }
        }
    }
    let allowed = |i: usize, li: usize, j: usize, lj: usize| {
        let (a, la, b, lb) = if i < j { (i, li, j, lj) } else { (j, lj, i, li) };
        seen_single[a][la] && seen_single[b][lb] && pairs.contains(&(a, la, b, lb))
    };
    let exact = count_pair_consistent(&sizes, &allowed, reach.vectors.len()) == reach.vectors.len();
    let mut blocked = Vec::new();
    for i in 0..n {
        for (l, seen) in seen_single[i].iter().enumerate() {
            if !seen {
                blocked.push(Formula::not(Formula::var(groups[i][l])));
            }
        }
        for j in i + 1..n {
            for li in 0..sizes[i] {
                for lj in 0..sizes[j] {
                    if seen_single[i][li] && seen_single[j][lj] && !pairs.contains(&(i, li, j, lj)) {
                        blocked.push(Formula::not(Formula::and([
                            Formula::var(groups[i][li]),
                            Formula::var(groups[j][lj]),
                        ])));
                    }
                }
            }
        }
    }
    let cnf = Formula::and(blocked);
    match enc {
        AbsEncoding::Cnf if exact => cnf,
        AbsEncoding::Cnf => {
            debug!("pairwise encoding is not exact for this system; using the disjunctive form");
            dnf()
        }
        _ => {
            let d = dnf();
            if exact && cnf.size() < d.size() {
                cnf
            } else {
                d
            }
        }
    }
}

/// Declares `prev{j}_σ` for every depth `j ≤ k` and interaction; indexed `[j-1][σ]`.
pub fn declare_history(ctx: &mut Ctx, k: usize) -> Vec<Vec<VarId>> {
    let sigmas: Vec<String> = ctx.sys.interaction_names().map(str::to_string).collect();
    (1..=k)
        .map(|j| {
            sigmas
                .iter()
                .map(|s| {
                    ctx.vars.declare(
                        &history_name(s, j),
                        VarKind::History {
                            sigma: s.clone(),
                            depth: j,
                        },
                    )
                })
                .collect()
        })
        .collect()
}

/// At most one interaction per depth (none before that many steps), and
/// consistency of the history with the abstract transition relation.
pub fn history_formula(ctx: &Ctx, reach: &ReachSet, hist: &[Vec<VarId>]) -> Formula {
    if hist.is_empty() {
        return Formula::True;
    }
    let groups = flag_groups(ctx);
    let mut parts: Vec<Formula> = hist.iter().flat_map(|d| at_most_one(d)).collect();
    parts.push(Formula::or(reach.history.iter().map(|(n, h)| {
        let mut conj = vec![vector_formula(&groups, &reach.vectors[*n])];
        for (depth, last) in h.iter().enumerate() {
            match last {
                Some(s) => conj.push(Formula::var(hist[depth][*s])),
                None => conj.extend(hist[depth].iter().map(|v| Formula::not(Formula::var(*v)))),
            }
        }
        Formula::and(conj)
    })));
    Formula::and(parts)
}
