//! Zone-graph verification of concrete systems: reachability of the monitor's
//! risk location and of deadlocks, and replay of interaction words.

pub mod dbm;

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::{debug, warn};

use crate::ltl::{ltl_to_buchi, Ltl};
use crate::model::{instantiate, BoundTerm, ConcreteSystem, GuardRel, Mode, ModelError, System, Valuation};
use crate::monitor::{augment, build_monitor, AugmentedSystem, MonitorComponent, MonitorError};
use dbm::{covered, le, lt, Dbm, INF};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("the zone oracle handles single-clock guards only; this model uses extended mode")]
    ExtendedMode,
    #[error("zone exploration exceeded {cap} symbolic states")]
    StateCap { cap: usize },
    #[error("unknown interaction {0}")]
    UnknownInteraction(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Monitor(#[from] MonitorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExploreOptions {
    pub cap: usize,
    /// Skip states whose zone is included in a stored zone at the same locations.
    pub subsumption: bool,
    /// Stop at the first risk or deadlock state.
    pub stop_early: bool,
    /// Maximal-constant extrapolation. Without it zones are exact but
    /// exploration terminates only if every clock stays bounded.
    pub extrapolate: bool,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        ExploreOptions {
            cap: 200_000,
            subsumption: true,
            stop_early: false,
            extrapolate: true,
        }
    }
}

/// One step of a replayable path: an interaction and the window of absolute
/// times at which it can fire along the path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub interaction: String,
    pub earliest: String,
    pub latest: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FailReason {
    Risk,
    Deadlock,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Verdict {
    Ok {
        states: usize,
        zeno_suspect: usize,
    },
    Fails {
        reason: FailReason,
        path: Vec<TraceStep>,
        states: usize,
    },
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, Verdict::Ok { .. })
    }
}

#[derive(Debug, Clone)]
pub struct SymState {
    pub locs: Vec<usize>,
    pub zone: Dbm,
    parent: Option<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct Exploration {
    pub states: Vec<SymState>,
    pub interactions: Vec<String>,
    pub risk: Option<usize>,
    pub deadlock: Option<usize>,
    /// Strongly connected parts of the zone graph along which time may not
    /// need to advance.
    pub zeno_suspect: usize,
}

impl Exploration {
    pub fn risk_reachable(&self) -> bool {
        self.risk.is_some()
    }

    pub fn deadlock_reachable(&self) -> bool {
        self.deadlock.is_some()
    }

    /// Interactions leading from the initial state to state `s`.
    pub fn path_to(&self, mut s: usize) -> Vec<String> {
        let mut out = Vec::new();
        while let Some((p, sigma)) = self.states[s].parent {
            out.push(self.interactions[sigma].clone());
            s = p;
        }
        out.reverse();
        out
    }
}

/// Flattened view of a concrete system for zone operations.
struct Net<'a> {
    sys: &'a System,
    monitor: Option<&'a MonitorComponent>,
    clock: HashMap<&'a str, usize>,
    /// `(component, jump)` of each interaction's participants.
    parts: Vec<Vec<(usize, usize)>>,
    names: Vec<String>,
    max_const: Vec<i64>,
    extra_clocks: usize,
}

fn lit(t: &BoundTerm) -> i64 {
    t.literal().expect("instantiated system")
}

impl<'a> Net<'a> {
    fn new(cs: &'a ConcreteSystem, monitor: Option<&'a MonitorComponent>, extra_clocks: usize) -> Result<Self, OracleError> {
        let sys: &System = cs;
        if sys.mode == Mode::Extended {
            return Err(OracleError::ExtendedMode);
        }
        let clock: HashMap<&str, usize> = sys.clocks().into_iter().enumerate().map(|(i, c)| (c, i + 1)).collect();
        let names: Vec<String> = sys.interaction_names().map(str::to_string).collect();
        let parts = names
            .iter()
            .map(|s| {
                sys.participants(s)
                    .into_iter()
                    .map(|(ci, j)| {
                        let ji = sys.components[ci].jumps.iter().position(|x| x.port == j.port).unwrap();
                        (ci, ji)
                    })
                    .collect()
            })
            .collect();
        let mut max_const = vec![0i64; clock.len() + 1 + extra_clocks];
        for c in &sys.components {
            for atoms in c.invariants.values() {
                for a in atoms {
                    let x = clock[a.clock.as_str()];
                    max_const[x] = max_const[x].max(lit(&a.le));
                }
            }
            for j in &c.jumps {
                for g in &j.guard {
                    let x = clock[g.single_clock().ok_or(OracleError::ExtendedMode)?];
                    max_const[x] = max_const[x].max(lit(&g.rhs));
                }
            }
        }
        Ok(Net {
            sys,
            monitor,
            clock,
            parts,
            names,
            max_const,
            extra_clocks,
        })
    }

    fn dims(&self) -> usize {
        self.clock.len() + self.extra_clocks
    }

    fn initial_locs(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.sys.components.iter().map(|c| c.initial_index()).collect();
        if let Some(m) = self.monitor {
            v.push(m.initial);
        }
        v
    }

    fn is_risk(&self, locs: &[usize]) -> bool {
        self.monitor.is_some_and(|m| m.is_risk(locs[self.sys.components.len()]))
    }

    fn apply_invariants(&self, z: &mut Dbm, locs: &[usize]) -> bool {
        for (ci, c) in self.sys.components.iter().enumerate() {
            for a in c.invariant(&c.locations[locs[ci]]) {
                if !z.constrain(self.clock[a.clock.as_str()], 0, le(lit(&a.le))) {
                    return false;
                }
            }
        }
        true
    }

    fn apply_guards(&self, z: &mut Dbm, sigma: usize) -> bool {
        for (ci, ji) in &self.parts[sigma] {
            for g in &self.sys.components[*ci].jumps[*ji].guard {
                let x = self.clock[g.single_clock().expect("pta guard")];
                let k = lit(&g.rhs);
                let ok = match g.rel {
                    GuardRel::Ge => z.constrain(0, x, le(-k)),
                    GuardRel::Gt => z.constrain(0, x, lt(-k)),
                    GuardRel::Eq => z.constrain(0, x, le(-k)) && z.constrain(x, 0, le(k)),
                };
                if !ok {
                    return false;
                }
            }
        }
        true
    }

    /// Location vector after `sigma`, if every participant is at its source.
    fn target(&self, locs: &[usize], sigma: usize) -> Option<Vec<usize>> {
        let mut next = locs.to_vec();
        for (ci, ji) in &self.parts[sigma] {
            let c = &self.sys.components[*ci];
            let j = &c.jumps[*ji];
            if c.locations[locs[*ci]] != j.from {
                return None;
            }
            next[*ci] = c.loc_index(&j.to).expect("validated");
        }
        if let Some(m) = self.monitor {
            let mi = self.sys.components.len();
            next[mi] = m.step(locs[mi], &self.names[sigma])?;
        }
        Some(next)
    }

    fn resets(&self, sigma: usize) -> impl Iterator<Item = usize> + '_ {
        self.parts[sigma]
            .iter()
            .flat_map(|(ci, ji)| self.sys.components[*ci].jumps[*ji].resets.iter())
            .map(|r| self.clock[r.as_str()])
    }

    /// Firing points of `sigma` inside `z` (guard and the target invariant on
    /// clocks that are not reset).
    fn firing(&self, z: &Dbm, locs: &[usize], sigma: usize, next: &[usize]) -> Option<Dbm> {
        let mut f = z.clone();
        if !self.apply_guards(&mut f, sigma) {
            return None;
        }
        let reset: BTreeSet<usize> = self.resets(sigma).collect();
        for (ci, c) in self.sys.components.iter().enumerate() {
            if next[ci] == locs[ci] && !self.parts[sigma].iter().any(|(p, _)| *p == ci) {
                continue;
            }
            for a in c.invariant(&c.locations[next[ci]]) {
                let x = self.clock[a.clock.as_str()];
                if reset.contains(&x) {
                    if lit(&a.le) < 0 {
                        return None;
                    }
                    continue;
                }
                if !f.constrain(x, 0, le(lit(&a.le))) {
                    return None;
                }
            }
        }
        Some(f)
    }

    fn post(&self, f: &Dbm, sigma: usize, next: &[usize]) -> Option<Dbm> {
        let mut z = f.clone();
        for x in self.resets(sigma) {
            z.reset(x);
        }
        z.up();
        if self.apply_invariants(&mut z, next) {
            Some(z)
        } else {
            None
        }
    }

    /// Some point of `z` can neither fire an interaction now nor after any delay.
    fn deadlocked(&self, z: &Dbm, locs: &[usize]) -> bool {
        let mut cover = Vec::new();
        for sigma in 0..self.names.len() {
            let Some(next) = self.target(locs, sigma) else { continue };
            if let Some(mut f) = self.firing(z, locs, sigma, &next) {
                f.down();
                if f.intersect(z) {
                    cover.push(f);
                }
            }
        }
        !covered(z, &cover)
    }
}

/// Zone-graph exploration of `cs`, with the monitor attached if given.
pub fn explore(
    cs: &ConcreteSystem,
    monitor: Option<&MonitorComponent>,
    opts: &ExploreOptions,
) -> Result<Exploration, OracleError> {
    let net = Net::new(cs, monitor, 0)?;
    let mut out = Exploration {
        states: vec![],
        interactions: net.names.clone(),
        risk: None,
        deadlock: None,
        zeno_suspect: 0,
    };
    let init_locs = net.initial_locs();
    let mut z = Dbm::zero(net.dims());
    if !net.apply_invariants(&mut z, &init_locs) {
        // No legal initial state; nothing can ever happen.
        out.states.push(SymState {
            locs: init_locs,
            zone: z,
            parent: None,
        });
        out.deadlock = Some(0);
        return Ok(out);
    }
    z.up();
    net.apply_invariants(&mut z, &init_locs);
    if opts.extrapolate {
        z.extrapolate(&net.max_const);
    }
    out.states.push(SymState {
        locs: init_locs.clone(),
        zone: z,
        parent: None,
    });
    let mut stored: HashMap<Vec<usize>, Vec<usize>> = HashMap::from([(init_locs, vec![0])]);
    let mut edges: Vec<(usize, usize, usize)> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        let locs = out.states[s].locs.clone();
        let zone = out.states[s].zone.clone();
        if net.is_risk(&locs) {
            out.risk.get_or_insert(s);
            if opts.stop_early {
                break;
            }
            continue;
        }
        if out.deadlock.is_none() && net.deadlocked(&zone, &locs) {
            out.deadlock = Some(s);
            if opts.stop_early {
                break;
            }
        }
        for sigma in 0..net.names.len() {
            let Some(next) = net.target(&locs, sigma) else { continue };
            let Some(f) = net.firing(&zone, &locs, sigma, &next) else { continue };
            let Some(mut nz) = net.post(&f, sigma, &next) else { continue };
            if opts.extrapolate {
                nz.extrapolate(&net.max_const);
            }
            let bucket = stored.entry(next.clone()).or_default();
            let dup = bucket.iter().copied().find(|t| {
                let tz = &out.states[*t].zone;
                if opts.subsumption {
                    tz.includes(&nz)
                } else {
                    *tz == nz
                }
            });
            let t = match dup {
                Some(t) => t,
                None => {
                    if out.states.len() >= opts.cap {
                        return Err(OracleError::StateCap { cap: opts.cap });
                    }
                    let t = out.states.len();
                    out.states.push(SymState {
                        locs: next,
                        zone: nz,
                        parent: Some((s, sigma)),
                    });
                    bucket.push(t);
                    queue.push_back(t);
                    t
                }
            };
            edges.push((s, sigma, t));
        }
    }
    out.zeno_suspect = zeno_suspect(&net, &out, &edges);
    if out.zeno_suspect > 0 {
        warn!(components = out.zeno_suspect, "cycles that may not let time advance");
    }
    debug!(states = out.states.len(), risk = ?out.risk, deadlock = ?out.deadlock, "zone exploration");
    Ok(out)
}

/// Counts nontrivial strongly connected parts of the zone graph in which no
/// clock is both reset and required to reach at least 1 before a jump.
fn zeno_suspect(net: &Net, ex: &Exploration, edges: &[(usize, usize, usize)]) -> usize {
    let n = ex.states.len();
    let mut adj = vec![Vec::new(); n];
    for (s, _, t) in edges {
        adj[*s].push(*t);
    }
    let comp = tarjan(&adj);
    let ncomp = comp.iter().max().map_or(0, |m| m + 1);
    let mut inner: Vec<Vec<usize>> = vec![Vec::new(); ncomp];
    for (s, sigma, t) in edges {
        if comp[*s] == comp[*t] {
            inner[comp[*s]].push(*sigma);
        }
    }
    inner
        .iter()
        .filter(|sigmas| !sigmas.is_empty())
        .filter(|sigmas| {
            let reset: BTreeSet<usize> = sigmas.iter().flat_map(|s| net.resets(*s)).collect();
            let bounded: BTreeSet<usize> = sigmas
                .iter()
                .flat_map(|s| net.parts[*s].iter())
                .flat_map(|(ci, ji)| net.sys.components[*ci].jumps[*ji].guard.iter())
                .filter(|g| lit(&g.rhs) >= 1)
                .map(|g| net.clock[g.single_clock().unwrap()])
                .collect();
            reset.is_disjoint(&bounded)
        })
        .count()
}

fn tarjan(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comp = vec![usize::MAX; n];
    let mut next_index = 0;
    let mut next_comp = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        while let Some((v, i)) = call.pop() {
            if i == 0 {
                index[v] = next_index;
                low[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&w) = adj[v].get(i) {
                call.push((v, i + 1));
                if index[w] == usize::MAX {
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().unwrap();
                    on_stack[w] = false;
                    comp[w] = next_comp;
                    if w == v {
                        break;
                    }
                }
                next_comp += 1;
            }
            if let Some((u, _)) = call.last() {
                low[*u] = low[*u].min(low[v]);
            }
        }
    }
    comp
}

fn fmt_bound_time(b: dbm::Bound, lower: bool) -> String {
    let v = dbm::value(b);
    let v = if lower { -v } else { v };
    match (lower, dbm::is_weak(b)) {
        (_, true) => v.to_string(),
        (true, false) => format!(">{v}"),
        (false, false) => format!("<{v}"),
    }
}

/// Replays `word` from the initial state, returning the firing-time windows,
/// or `None` if no time run performs exactly this sequence.
pub fn replay(
    cs: &ConcreteSystem,
    monitor: Option<&MonitorComponent>,
    word: &[&str],
) -> Result<Option<Vec<TraceStep>>, OracleError> {
    let net = Net::new(cs, monitor, 1)?;
    let global = net.dims();
    let mut locs = net.initial_locs();
    let mut z = Dbm::zero(net.dims());
    if !net.apply_invariants(&mut z, &locs) {
        return Ok(None);
    }
    z.up();
    net.apply_invariants(&mut z, &locs);
    let mut steps = Vec::new();
    for w in word {
        let sigma = net
            .names
            .iter()
            .position(|n| n == w)
            .ok_or_else(|| OracleError::UnknownInteraction(w.to_string()))?;
        let Some(next) = net.target(&locs, sigma) else { return Ok(None) };
        let Some(f) = net.firing(&z, &locs, sigma, &next) else { return Ok(None) };
        let (lo, hi) = f.range(global);
        steps.push(TraceStep {
            interaction: w.to_string(),
            earliest: fmt_bound_time(lo, true),
            latest: (hi != INF).then(|| fmt_bound_time(hi, false)),
        });
        let Some(nz) = net.post(&f, sigma, &next) else { return Ok(None) };
        z = nz;
        locs = next;
    }
    Ok(Some(steps))
}

/// Whether some time run of `cs` performs exactly the interactions of `word`.
pub fn simulate_word(cs: &ConcreteSystem, word: &[&str]) -> Result<bool, OracleError> {
    Ok(replay(cs, None, word)?.is_some())
}

/// Checks an instantiated augmented system for risk and deadlock.
pub fn verify_augmented(aug: &AugmentedSystem, v: &Valuation, opts: &ExploreOptions) -> Result<Verdict, OracleError> {
    let cs = instantiate(&aug.base, v)?;
    let ex = explore(&cs, aug.monitor.as_ref(), opts)?;
    let states = ex.states.len();
    let fail = match (ex.risk, ex.deadlock) {
        (Some(s), _) => Some((FailReason::Risk, s)),
        (None, Some(s)) => Some((FailReason::Deadlock, s)),
        (None, None) => None,
    };
    Ok(match fail {
        None => Verdict::Ok {
            states,
            zeno_suspect: ex.zeno_suspect,
        },
        Some((reason, s)) => {
            let word = ex.path_to(s);
            let refs: Vec<&str> = word.iter().map(String::as_str).collect();
            let path = replay(&cs, aug.monitor.as_ref(), &refs)?.unwrap_or_else(|| {
                word.iter()
                    .map(|w| TraceStep {
                        interaction: w.clone(),
                        earliest: "?".into(),
                        latest: None,
                    })
                    .collect()
            });
            Verdict::Fails { reason, path, states }
        }
    })
}

/// Builds the monitor for `phi` unrolled `k` times, attaches it and checks `v`.
pub fn verify_witness(s: &System, phi: Option<&Ltl>, k: u32, v: &Valuation) -> Result<Verdict, OracleError> {
    let aug = match phi {
        None => AugmentedSystem::plain(s.clone()),
        Some(phi) => {
            let b = ltl_to_buchi(&Ltl::not(phi.clone()));
            let sigma_phi = phi.atoms();
            augment(s, build_monitor(&b, k), &sigma_phi)?
        }
    };
    verify_augmented(&aug, v, &ExploreOptions::default())
}

#[cfg(test)]
mod tests;
