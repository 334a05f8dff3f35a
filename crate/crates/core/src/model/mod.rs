//! Systems of parametric timed automata: data model, JSON format, validation and
//! instantiation under a parameter valuation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Deref;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::warn;

#[cfg(test)]
mod tests;

/// Name reserved for the monitor component added by augmentation.
pub const MONITOR_NAME: &str = "monitor";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("valuation error: {0}")]
    Valuation(String),
}

fn invalid(msg: impl Into<String>) -> ModelError {
    ModelError::Validation(msg.into())
}

/// Right-hand side of a guard or invariant: a literal or a parameter.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundTerm {
    Lit(i64),
    Param(String),
}

impl BoundTerm {
    pub fn param(&self) -> Option<&str> {
        match self {
            BoundTerm::Param(p) => Some(p),
            BoundTerm::Lit(_) => None,
        }
    }
}

impl fmt::Display for BoundTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundTerm::Lit(v) => write!(f, "{v}"),
            BoundTerm::Param(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BoundTermDoc {
    Lit(i64),
    Param { param: String },
}

impl Serialize for BoundTerm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            BoundTerm::Lit(v) => BoundTermDoc::Lit(*v),
            BoundTerm::Param(p) => BoundTermDoc::Param { param: p.clone() },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BoundTerm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(match BoundTermDoc::deserialize(d)? {
            BoundTermDoc::Lit(v) => BoundTerm::Lit(v),
            BoundTermDoc::Param { param } => BoundTerm::Param(param),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GuardRel {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl fmt::Display for GuardRel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GuardRel::Eq => "=",
            GuardRel::Gt => ">",
            GuardRel::Ge => ">=",
        })
    }
}

/// `Σ coeff·clock  rel  rhs`. In PTA mode the left side is a single clock with
/// coefficient 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuardAtom {
    pub lhs: BTreeMap<String, i64>,
    pub rel: GuardRel,
    pub rhs: BoundTerm,
}

impl GuardAtom {
    pub fn simple(clock: &str, rel: GuardRel, rhs: BoundTerm) -> Self {
        GuardAtom {
            lhs: BTreeMap::from([(clock.to_string(), 1)]),
            rel,
            rhs,
        }
    }

    /// The clock of a single-clock, unit-coefficient atom.
    pub fn single_clock(&self) -> Option<&str> {
        match self.lhs.iter().next() {
            Some((c, 1)) if self.lhs.len() == 1 => Some(c),
            _ => None,
        }
    }
}

impl fmt::Display for GuardAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (c, k)) in self.lhs.iter().enumerate() {
            match (i, *k) {
                (0, 1) => write!(f, "{c}")?,
                (0, -1) => write!(f, "-{c}")?,
                (0, k) => write!(f, "{k}*{c}")?,
                (_, 1) => write!(f, " + {c}")?,
                (_, -1) => write!(f, " - {c}")?,
                (_, k) if k < 0 => write!(f, " - {}*{c}", -k)?,
                (_, k) => write!(f, " + {k}*{c}")?,
            }
        }
        write!(f, " {} {}", self.rel, self.rhs)
    }
}

/// `clock ≤ le`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantAtom {
    pub clock: String,
    pub le: BoundTerm,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Jump {
    pub from: String,
    #[serde(default)]
    pub guard: Vec<GuardAtom>,
    pub port: String,
    #[serde(default)]
    pub resets: Vec<String>,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub name: String,
    #[serde(default)]
    pub clocks: Vec<String>,
    pub locations: Vec<String>,
    pub initial: String,
    #[serde(default)]
    pub invariants: IndexMap<String, Vec<InvariantAtom>>,
    pub jumps: Vec<Jump>,
}

impl Component {
    pub fn loc_index(&self, name: &str) -> Option<usize> {
        self.locations.iter().position(|l| l == name)
    }

    pub fn initial_index(&self) -> usize {
        self.loc_index(&self.initial).expect("validated component")
    }

    /// The unique jump labelled by `port`.
    pub fn jump_for_port(&self, port: &str) -> Option<&Jump> {
        self.jumps.iter().find(|j| j.port == port)
    }

    pub fn invariant(&self, loc: &str) -> &[InvariantAtom] {
        self.invariants.get(loc).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn has_invariants(&self) -> bool {
        self.invariants.values().any(|v| !v.is_empty())
    }

    /// Jumps whose destination is `loc`.
    pub fn incoming<'a>(&'a self, loc: &'a str) -> impl Iterator<Item = &'a Jump> + 'a {
        self.jumps.iter().filter(move |j| j.to == loc)
    }

    pub fn owns_clock(&self, clock: &str) -> bool {
        self.clocks.iter().any(|c| c == clock)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamRange {
    pub lo: i64,
    pub hi: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Pta,
    Extended,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PortRef {
    pub component: String,
    pub port: String,
}

impl PortRef {
    pub fn new(component: &str, port: &str) -> Self {
        PortRef {
            component: component.into(),
            port: port.into(),
        }
    }
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.component, self.port)
    }
}

/// A validated system `(V, C, Σ, Δ)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct System {
    #[serde(default)]
    pub parameters: IndexMap<String, ParamRange>,
    pub components: Vec<Component>,
    pub interactions: IndexMap<String, Vec<PortRef>>,
    #[serde(default)]
    pub mode: Mode,
}

#[derive(Deserialize)]
struct RawRange {
    lo: Option<i64>,
    hi: Option<i64>,
}

#[derive(Deserialize)]
struct RawSystem {
    #[serde(default)]
    parameters: IndexMap<String, RawRange>,
    components: Vec<Component>,
    interactions: IndexMap<String, Vec<PortRef>>,
    #[serde(default)]
    mode: Mode,
}

/// Parses and validates a model document.
pub fn load_system(text: &str) -> Result<System, ModelError> {
    let raw: RawSystem = serde_json::from_str(text).map_err(|e| ModelError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut parameters = IndexMap::new();
    for (name, r) in raw.parameters {
        match (r.lo, r.hi) {
            (Some(lo), Some(hi)) => {
                parameters.insert(name, ParamRange { lo, hi });
            }
            _ => {
                return Err(invalid(format!(
                    "parameter {name} is unbounded; synthesis requires bounded integer domains \
                     (the unrolling bound k* and solver termination depend on it)"
                )))
            }
        }
    }
    let sys = System {
        parameters,
        components: raw.components,
        interactions: raw.interactions,
        mode: raw.mode,
    };
    sys.validate()?;
    Ok(sys)
}

impl System {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn component(&self, name: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.name == name)
    }

    pub fn component_index(&self, name: &str) -> Option<usize> {
        self.components.iter().position(|c| c.name == name)
    }

    pub fn interaction_names(&self) -> impl Iterator<Item = &str> {
        self.interactions.keys().map(String::as_str)
    }

    /// All clocks, in component order.
    pub fn clocks(&self) -> Vec<&str> {
        self.components
            .iter()
            .flat_map(|c| c.clocks.iter().map(String::as_str))
            .collect()
    }

    pub fn clock_owner(&self, clock: &str) -> Option<usize> {
        self.components.iter().position(|c| c.owns_clock(clock))
    }

    /// `(component index, jump)` pairs taking part in `sigma`.
    pub fn participants(&self, sigma: &str) -> Vec<(usize, &Jump)> {
        let Some(ports) = self.interactions.get(sigma) else {
            return vec![];
        };
        ports
            .iter()
            .map(|p| {
                let ci = self.component_index(&p.component).expect("validated");
                let j = self.components[ci].jump_for_port(&p.port).expect("validated");
                (ci, j)
            })
            .collect()
    }

    /// Clocks reset when `sigma` fires.
    pub fn resets_of(&self, sigma: &str) -> BTreeSet<&str> {
        self.participants(sigma)
            .into_iter()
            .flat_map(|(_, j)| j.resets.iter().map(String::as_str))
            .collect()
    }

    /// Interactions that contain port `port` of component `comp`.
    pub fn interactions_with_port(&self, comp: &str, port: &str) -> Vec<&str> {
        self.interactions
            .iter()
            .filter(|(_, ps)| ps.iter().any(|p| p.component == comp && p.port == port))
            .map(|(s, _)| s.as_str())
            .collect()
    }

    pub fn has_parameters(&self) -> bool {
        !self.parameters.is_empty()
    }

    /// Every bound term used in guards and invariants.
    pub fn bound_terms(&self) -> impl Iterator<Item = &BoundTerm> {
        self.components.iter().flat_map(|c| {
            c.jumps
                .iter()
                .flat_map(|j| j.guard.iter().map(|g| &g.rhs))
                .chain(c.invariants.values().flatten().map(|i| &i.le))
        })
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, r) in &self.parameters {
            if r.lo > r.hi {
                return Err(invalid(format!("parameter {name} has empty range [{}, {}]", r.lo, r.hi)));
            }
            if r.lo < 0 {
                return Err(invalid(format!(
                    "parameter {name} has negative lower bound {}; parameters stand for nonnegative constants",
                    r.lo
                )));
            }
        }
        if self.components.is_empty() {
            return Err(invalid("system has no components"));
        }
        if self.interactions.is_empty() {
            return Err(invalid("system has no interactions"));
        }
        let mut comp_names = BTreeSet::new();
        let mut clock_names: BTreeMap<&str, &str> = BTreeMap::new();
        for c in &self.components {
            if !comp_names.insert(c.name.as_str()) {
                return Err(invalid(format!("duplicate component name {}", c.name)));
            }
            if c.name == MONITOR_NAME {
                return Err(invalid(format!("component name {MONITOR_NAME} is reserved")));
            }
            for clk in &c.clocks {
                if self.parameters.contains_key(clk) {
                    return Err(invalid(format!("clock {clk} shadows a parameter")));
                }
                if let Some(other) = clock_names.insert(clk, &c.name) {
                    return Err(invalid(format!(
                        "clock {clk} declared by both {other} and {}",
                        c.name
                    )));
                }
            }
            self.validate_component(c)?;
        }
        let mut used_ports: BTreeSet<(&str, &str)> = BTreeSet::new();
        for (sigma, ports) in &self.interactions {
            if ports.is_empty() {
                return Err(invalid(format!("interaction {sigma} has no ports")));
            }
            let mut comps = BTreeSet::new();
            for p in ports {
                let Some(c) = self.component(&p.component) else {
                    return Err(invalid(format!(
                        "interaction {sigma} refers to unknown component {}",
                        p.component
                    )));
                };
                if c.jump_for_port(&p.port).is_none() {
                    return Err(invalid(format!("interaction {sigma} refers to unknown port {p}")));
                }
                if !comps.insert(p.component.as_str()) {
                    warn!(interaction = %sigma, component = %p.component, "interaction binds two ports of one component");
                    return Err(invalid(format!(
                        "interaction {sigma} binds two ports of component {}",
                        p.component
                    )));
                }
                used_ports.insert((&p.component, &p.port));
            }
        }
        for c in &self.components {
            for j in &c.jumps {
                if !used_ports.contains(&(c.name.as_str(), j.port.as_str())) {
                    return Err(invalid(format!(
                        "port {}.{} is not bound to any interaction",
                        c.name, j.port
                    )));
                }
            }
        }
        Ok(())
    }

    fn check_term(&self, t: &BoundTerm, ctx: &str) -> Result<(), ModelError> {
        match t {
            BoundTerm::Lit(v) if *v < 0 => Err(invalid(format!("negative constant {v} in {ctx}"))),
            BoundTerm::Param(p) if !self.parameters.contains_key(p) => {
                Err(invalid(format!("unknown parameter {p} in {ctx}")))
            }
            _ => Ok(()),
        }
    }

    fn validate_component(&self, c: &Component) -> Result<(), ModelError> {
        if c.locations.is_empty() {
            return Err(invalid(format!("component {} has no locations", c.name)));
        }
        let mut locs = BTreeSet::new();
        for l in &c.locations {
            if !locs.insert(l.as_str()) {
                return Err(invalid(format!("duplicate location {l} in {}", c.name)));
            }
        }
        if !locs.contains(c.initial.as_str()) {
            return Err(invalid(format!("initial location {} of {} is not declared", c.initial, c.name)));
        }
        for (loc, atoms) in &c.invariants {
            if !locs.contains(loc.as_str()) {
                return Err(invalid(format!("invariant on unknown location {loc} in {}", c.name)));
            }
            for a in atoms {
                if !c.owns_clock(&a.clock) {
                    return Err(invalid(format!(
                        "invariant at {}.{loc} uses clock {} not owned by the component",
                        c.name, a.clock
                    )));
                }
                self.check_term(&a.le, &format!("invariant of {}.{loc}", c.name))?;
            }
        }
        let mut ports = BTreeSet::new();
        for j in &c.jumps {
            if !ports.insert(j.port.as_str()) {
                return Err(invalid(format!("port {} bound to two jumps in {}", j.port, c.name)));
            }
            for l in [&j.from, &j.to] {
                if !locs.contains(l.as_str()) {
                    return Err(invalid(format!("jump {} uses unknown location {l} in {}", j.port, c.name)));
                }
            }
            for r in &j.resets {
                if !c.owns_clock(r) {
                    return Err(invalid(format!("jump {} resets foreign clock {r}", j.port)));
                }
            }
            for g in &j.guard {
                if g.lhs.is_empty() || g.lhs.values().any(|k| *k == 0) {
                    return Err(invalid(format!("jump {} has a guard with an empty left side", j.port)));
                }
                for clk in g.lhs.keys() {
                    if !c.owns_clock(clk) {
                        return Err(invalid(format!(
                            "guard of jump {}.{} uses clock {clk} not owned by the component",
                            c.name, j.port
                        )));
                    }
                }
                if self.mode == Mode::Pta && g.single_clock().is_none() {
                    return Err(invalid(format!(
                        "guard '{g}' of {}.{} needs extended mode",
                        c.name, j.port
                    )));
                }
                self.check_term(&g.rhs, &format!("guard of {}.{}", c.name, j.port))?;
            }
        }
        Ok(())
    }
}

/// Total assignment of parameters to integers.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Valuation(pub IndexMap<String, i64>);

impl Valuation {
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, i64)>) -> Self {
        Valuation(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }

    pub fn get(&self, name: &str) -> Option<i64> {
        self.0.get(name).copied()
    }

    /// Checks totality and ranges against `sys`.
    pub fn check(&self, sys: &System) -> Result<(), ModelError> {
        for (name, r) in &sys.parameters {
            match self.0.get(name) {
                None => return Err(ModelError::Valuation(format!("parameter {name} has no value"))),
                Some(v) if *v < r.lo || *v > r.hi => {
                    return Err(ModelError::Valuation(format!(
                        "parameter {name} = {v} outside [{}, {}]",
                        r.lo, r.hi
                    )))
                }
                _ => {}
            }
        }
        if let Some(extra) = self.0.keys().find(|k| !sys.parameters.contains_key(*k)) {
            return Err(ModelError::Valuation(format!("unknown parameter {extra}")));
        }
        Ok(())
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// A system without parameters; every bound is a literal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcreteSystem(System);

impl Deref for ConcreteSystem {
    type Target = System;
    fn deref(&self) -> &System {
        &self.0
    }
}

impl ConcreteSystem {
    pub fn into_inner(self) -> System {
        self.0
    }
}

/// Replaces every parameter reference by its value.
pub fn instantiate(sys: &System, v: &Valuation) -> Result<ConcreteSystem, ModelError> {
    v.check(sys)?;
    let subst = |t: &mut BoundTerm| {
        if let BoundTerm::Param(p) = t {
            *t = BoundTerm::Lit(v.get(p).expect("checked"));
        }
    };
    let mut out = sys.clone();
    out.parameters.clear();
    for c in &mut out.components {
        for j in &mut c.jumps {
            j.guard.iter_mut().for_each(|g| subst(&mut g.rhs));
        }
        for atoms in c.invariants.values_mut() {
            atoms.iter_mut().for_each(|a| subst(&mut a.le));
        }
    }
    Ok(ConcreteSystem(out))
}

impl BoundTerm {
    /// Value of a literal term; parameters are unresolved.
    pub fn literal(&self) -> Option<i64> {
        match self {
            BoundTerm::Lit(v) => Some(*v),
            BoundTerm::Param(_) => None,
        }
    }
}
