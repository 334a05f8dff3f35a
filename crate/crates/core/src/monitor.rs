//! Unrolled risk monitors for Büchi automata, system augmentation and the
//! unrolling bound `k*`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;
use tracing::debug;

use crate::ltl::{BuchiAutomaton, HASH};
use crate::model::{BoundTerm, PortRef, System, MONITOR_NAME};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MonitorError {
    #[error("property mentions {0}, which is not an interaction of the system")]
    UnknownInteraction(String),
    #[error("bound exceeds practical range; use configured k")]
    Overflow,
}

/// A monitor location: the risk sink, or the tracked Büchi states with their
/// visit counters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MonitorLocation {
    Risk,
    Track(BTreeMap<usize, u32>),
}

/// Deterministic unrolling `C_{¬φ,k}` of a Büchi automaton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonitorComponent {
    pub locations: Vec<MonitorLocation>,
    pub names: Vec<String>,
    pub initial: usize,
    /// `Σ_φ` in sorted order followed by `#`.
    pub symbols: Vec<String>,
    /// `edges[l][i]`: successor of location `l` on `symbols[i]`; empty for risk.
    pub edges: Vec<Vec<usize>>,
    pub risk: Option<usize>,
    pub k: u32,
}

impl MonitorComponent {
    pub fn num_locations(&self) -> usize {
        self.locations.len()
    }

    pub fn is_risk(&self, loc: usize) -> bool {
        self.risk == Some(loc)
    }

    pub fn symbol_index(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }

    /// The monitor symbol an interaction is read as.
    pub fn symbol_for<'a>(&'a self, sigma: &'a str) -> &'a str {
        if self.symbols[..self.symbols.len() - 1].iter().any(|s| s == sigma) {
            sigma
        } else {
            HASH
        }
    }

    /// Successor on interaction `sigma`; `None` from risk.
    pub fn step(&self, loc: usize, sigma: &str) -> Option<usize> {
        let i = self.symbol_index(self.symbol_for(sigma))?;
        self.edges[loc].get(i).copied()
    }

    /// Runs a word; `None` if it reaches risk.
    pub fn run<'a>(&self, word: impl IntoIterator<Item = &'a str>) -> Option<usize> {
        let mut loc = self.initial;
        for s in word {
            if self.is_risk(loc) {
                return None;
            }
            loc = self.step(loc, s)?;
        }
        if self.is_risk(loc) {
            None
        } else {
            Some(loc)
        }
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph monitor {\n  rankdir=LR;\n  init [shape=point];\n");
        for (i, n) in self.names.iter().enumerate() {
            let shape = if self.is_risk(i) { "doubleoctagon" } else { "box" };
            let _ = writeln!(out, "  l{i} [shape={shape}, label=\"{n}\"];");
        }
        let _ = writeln!(out, "  init -> l{};", self.initial);
        for (i, succ) in self.edges.iter().enumerate() {
            let mut grouped: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
            for (s, t) in succ.iter().enumerate() {
                grouped.entry(*t).or_default().push(&self.symbols[s]);
            }
            for (t, syms) in grouped {
                let _ = writeln!(out, "  l{i} -> l{t} [label=\"{}\"];", syms.join(","));
            }
        }
        out.push_str("}\n");
        out
    }
}

fn render_location(b: &BuchiAutomaton, loc: &MonitorLocation) -> String {
    match loc {
        MonitorLocation::Risk => "risk".into(),
        MonitorLocation::Track(map) => {
            let acc: Vec<&str> = b.accepting.iter().map(|s| b.states[*s].as_str()).collect();
            let parts: Vec<String> = map
                .iter()
                .map(|(s, c)| {
                    if acc.is_empty() {
                        b.states[*s].clone()
                    } else {
                        format!("{}[{}({c})]", b.states[*s], acc.join("|"))
                    }
                })
                .collect();
            format!("{{{}}}", parts.join(","))
        }
    }
}

/// Breadth-first subset construction with per-state visit counters. A
/// successor state's counter is the maximum over its predecessors of the
/// predecessor counter plus one if the successor is accepting; reaching `k`
/// turns the whole successor into risk.
///
/// # Panics
/// If `k == 0`.
pub fn build_monitor(b: &BuchiAutomaton, k: u32) -> MonitorComponent {
    assert!(k >= 1, "monitor unrolling needs k >= 1");
    let symbols: Vec<String> = b
        .alphabet
        .iter()
        .cloned()
        .chain(std::iter::once(HASH.to_string()))
        .collect();
    let init_count = u32::from(b.accepting.contains(&b.initial));
    let init = if init_count >= k {
        MonitorLocation::Risk
    } else {
        MonitorLocation::Track(BTreeMap::from([(b.initial, init_count)]))
    };
    let mut locations = vec![init.clone()];
    let mut index: HashMap<MonitorLocation, usize> = HashMap::from([(init, 0)]);
    let mut edges: Vec<Vec<usize>> = vec![Vec::new()];
    let mut queue = VecDeque::from([0usize]);
    while let Some(l) = queue.pop_front() {
        let MonitorLocation::Track(map) = locations[l].clone() else {
            continue;
        };
        let mut succ = Vec::with_capacity(symbols.len());
        for sym in &symbols {
            let mut next: BTreeMap<usize, u32> = BTreeMap::new();
            let mut risk = false;
            for (s, c) in &map {
                for e in b.out_edges(*s) {
                    if !e.label.matches(sym, &b.alphabet) {
                        continue;
                    }
                    let cnt = c + u32::from(b.accepting.contains(&e.to));
                    risk |= cnt >= k;
                    let slot = next.entry(e.to).or_insert(0);
                    *slot = (*slot).max(cnt);
                }
            }
            let loc = if risk {
                MonitorLocation::Risk
            } else {
                MonitorLocation::Track(next)
            };
            let id = match index.get(&loc) {
                Some(&id) => id,
                None => {
                    locations.push(loc.clone());
                    edges.push(Vec::new());
                    index.insert(loc, locations.len() - 1);
                    queue.push_back(locations.len() - 1);
                    locations.len() - 1
                }
            };
            succ.push(id);
        }
        edges[l] = succ;
    }
    let risk = locations.iter().position(|l| *l == MonitorLocation::Risk);
    let names = locations.iter().map(|l| render_location(b, l)).collect();
    debug!(locations = locations.len(), k, "monitor built");
    MonitorComponent {
        locations,
        names,
        initial: 0,
        symbols,
        edges,
        risk,
        k,
    }
}

/// `S_inv,k`: the base system with the monitor attached to every interaction.
#[derive(Debug, Clone)]
pub struct AugmentedSystem {
    pub base: System,
    pub monitor: Option<MonitorComponent>,
    pub sigma_phi: BTreeSet<String>,
}

impl AugmentedSystem {
    /// A system without a monitor (pure deadlock-freedom).
    pub fn plain(base: System) -> Self {
        AugmentedSystem {
            base,
            monitor: None,
            sigma_phi: BTreeSet::new(),
        }
    }

    /// `Δ_inv,k(σ)`.
    pub fn delta_inv(&self, sigma: &str) -> Vec<PortRef> {
        let mut ports = self.base.interactions.get(sigma).cloned().unwrap_or_default();
        if let Some(m) = &self.monitor {
            ports.push(PortRef::new(MONITOR_NAME, m.symbol_for(sigma)));
        }
        ports
    }
}

/// Attaches `m` to every interaction, via its own symbol for `σ ∈ Σ_φ` and
/// via `#` otherwise.
pub fn augment(
    s: &System,
    m: MonitorComponent,
    sigma_phi: &BTreeSet<String>,
) -> Result<AugmentedSystem, MonitorError> {
    if let Some(bad) = sigma_phi.iter().find(|x| !s.interactions.contains_key(*x)) {
        return Err(MonitorError::UnknownInteraction(bad.clone()));
    }
    Ok(AugmentedSystem {
        base: s.clone(),
        monitor: Some(m),
        sigma_phi: sigma_phi.clone(),
    })
}

/// Classical region-count bound `n!·2ⁿ·(2λ+2)ⁿ` for `n` clocks with maximal
/// constant `λ`; `None` on overflow.
pub fn region_bound(n_clocks: u32, lambda: u64) -> Option<u128> {
    let mut acc: u128 = 1;
    let base = (lambda as u128).checked_mul(2)?.checked_add(2)?;
    for i in 1..=n_clocks as u128 {
        acc = acc.checked_mul(i)?.checked_mul(2)?.checked_mul(base)?;
    }
    Some(acc)
}

/// `δ²·η²·|A|·|Σ| + 1`; `None` on overflow.
pub fn k_star_from(delta: u128, eta: u128, automaton_states: u128, sigma: u128) -> Option<u128> {
    delta
        .checked_mul(delta)?
        .checked_mul(eta)?
        .checked_mul(eta)?
        .checked_mul(automaton_states)?
        .checked_mul(sigma)?
        .checked_add(1)
}

/// Largest constant of the system when every parameter takes its upper bound.
pub fn lambda(s: &System) -> u64 {
    let from_params = s.parameters.values().map(|r| r.hi.max(0) as u64);
    let from_lits = s.bound_terms().filter_map(BoundTerm::literal).map(|v| v.max(0) as u64);
    from_params.chain(from_lits).max().unwrap_or(0)
}

/// The unrolling bound beyond which enlarging `k` cannot change the answer.
pub fn compute_k_star(s: &System, b: &BuchiAutomaton) -> Result<u128, MonitorError> {
    let n = s.clocks().len() as u32;
    let delta = region_bound(n, lambda(s)).ok_or(MonitorError::Overflow)?;
    let mut eta: u128 = 1;
    for c in &s.components {
        eta = eta.checked_mul(c.locations.len() as u128).ok_or(MonitorError::Overflow)?;
    }
    k_star_from(delta, eta, b.num_states() as u128, s.interactions.len() as u128)
        .ok_or(MonitorError::Overflow)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::{ltl_to_buchi, parse_ltl, Ltl};

    fn prompt_monitor(k: u32) -> MonitorComponent {
        let phi = parse_ltl("G(take1l -> X !take2l) & G(take2l -> X !take1l)").unwrap();
        build_monitor(&ltl_to_buchi(&Ltl::not(phi)), k)
    }

    #[test]
    fn k1_walkthrough() {
        let m = prompt_monitor(1);
        assert_eq!(m.names[m.initial], "{s0[s3(0)]}");
        let a = m.step(m.initial, "take1l").unwrap();
        assert_eq!(m.names[a], "{s0[s3(0)],s1[s3(0)]}");
        let r = m.step(a, "take2l").unwrap();
        assert!(m.is_risk(r));
        assert_eq!(m.step(m.initial, "release1"), Some(m.initial));
        assert_eq!(m.step(r, "take1l"), None);
    }

    #[test]
    fn k2_counts_instead_of_risk() {
        let m = prompt_monitor(2);
        let a = m.step(m.initial, "take1l").unwrap();
        let b = m.step(a, "take2l").unwrap();
        assert_eq!(
            m.locations[b],
            MonitorLocation::Track(BTreeMap::from([(0, 0), (2, 0), (3, 1)]))
        );
    }

    #[test]
    fn no_accepting_states_no_risk() {
        let b = ltl_to_buchi(&parse_ltl("false").unwrap());
        for k in 1..4 {
            assert!(build_monitor(&b, k).risk.is_none());
        }
    }

    #[test]
    fn k_star_arithmetic() {
        assert_eq!(k_star_from(4, 2, 2, 3), Some(385));
        assert_eq!(region_bound(0, 30), Some(1));
        assert_eq!(region_bound(4, 30), Some(24 * 16 * 62u128.pow(4)));
        assert_eq!(k_star_from(u128::MAX, 2, 2, 2), None);
    }
}
