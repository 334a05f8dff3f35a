use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use tracing::debug;

use super::Ltl;

/// Placeholder symbol standing for every interaction outside the property's alphabet.
pub const HASH: &str = "#";

/// Edge label: a consistent literal set before post-processing, a symbol set after.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Lits {
        pos: BTreeSet<String>,
        neg: BTreeSet<String>,
    },
    Symbols(BTreeSet<String>),
}

impl Label {
    /// Whether `symbol` (an interaction, or [`HASH`]) satisfies the label.
    /// Interactions outside `alphabet` read as `#`.
    pub fn matches(&self, symbol: &str, alphabet: &BTreeSet<String>) -> bool {
        let inside = alphabet.contains(symbol);
        match self {
            Label::Lits { pos, neg } => {
                let pos_ok = match pos.len() {
                    0 => true,
                    1 => inside && pos.contains(symbol),
                    _ => false,
                };
                pos_ok && !(inside && neg.contains(symbol))
            }
            Label::Symbols(set) => {
                if inside {
                    set.contains(symbol)
                } else {
                    set.contains(HASH)
                }
            }
        }
    }

    pub fn render(&self) -> String {
        match self {
            Label::Lits { pos, neg } => {
                if pos.is_empty() && neg.is_empty() {
                    return "true".into();
                }
                let lits: Vec<String> = pos
                    .iter()
                    .cloned()
                    .chain(neg.iter().map(|n| format!("!{n}")))
                    .collect();
                lits.join(" & ")
            }
            Label::Symbols(set) => set.iter().cloned().collect::<Vec<_>>().join(","),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct BuchiEdge {
    pub from: usize,
    pub label: Label,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuchiAutomaton {
    pub states: Vec<String>,
    pub initial: usize,
    pub accepting: BTreeSet<usize>,
    pub edges: Vec<BuchiEdge>,
    /// Σ_φ: the interactions named by the formula.
    pub alphabet: BTreeSet<String>,
}

impl BuchiAutomaton {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn out_edges(&self, s: usize) -> impl Iterator<Item = &BuchiEdge> {
        self.edges.iter().filter(move |e| e.from == s)
    }

    /// Acceptance of the ultimately periodic word `prefix · cycle^ω`.
    ///
    /// # Panics
    /// If `cycle` is empty.
    pub fn accepts_lasso(&self, prefix: &[&str], cycle: &[&str]) -> bool {
        assert!(!cycle.is_empty(), "lasso cycle must be nonempty");
        let word: Vec<&str> = prefix.iter().chain(cycle.iter()).copied().collect();
        let len = word.len();
        let succ_pos = |i: usize| if i + 1 < len { i + 1 } else { prefix.len() };
        let n = self.states.len();
        let node = |q: usize, i: usize| q * len + i;
        let mut distinct: Vec<&str> = word.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let sym: Vec<usize> = word.iter().map(|w| distinct.binary_search(w).unwrap()).collect();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n * len];
        for e in &self.edges {
            let hits: Vec<bool> = distinct.iter().map(|d| e.label.matches(d, &self.alphabet)).collect();
            for i in 0..len {
                if hits[sym[i]] {
                    adj[node(e.from, i)].push(node(e.to, succ_pos(i)));
                }
            }
        }
        let mut reach = vec![false; n * len];
        let mut stack = vec![node(self.initial, 0)];
        reach[node(self.initial, 0)] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !reach[w] {
                    reach[w] = true;
                    stack.push(w);
                }
            }
        }
        let comp = tarjan(&adj);
        let mut comp_size = vec![0usize; n * len];
        for &c in &comp {
            comp_size[c] += 1;
        }
        (0..n * len).any(|v| {
            reach[v]
                && self.accepting.contains(&(v / len))
                && (comp_size[comp[v]] > 1 || adj[v].contains(&v))
        })
    }

    /// Graphviz rendering: accepting states double-circled, labels comma-joined.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph buchi {\n  rankdir=LR;\n  init [shape=point];\n");
        for (i, s) in self.states.iter().enumerate() {
            let shape = if self.accepting.contains(&i) { "doublecircle" } else { "circle" };
            let _ = writeln!(out, "  \"{s}\" [shape={shape}];");
        }
        let _ = writeln!(out, "  init -> \"{}\";", self.states[self.initial]);
        for e in &self.edges {
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [label=\"{}\"];",
                self.states[e.from],
                self.states[e.to],
                e.label.render()
            );
        }
        out.push_str("}\n");
        out
    }
}

/// Strongly connected components; returns the component index of every node.
pub(crate) fn tarjan(adj: &[Vec<usize>]) -> Vec<usize> {
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
        // Iterative DFS: (node, cursor).
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some((v, k)) = call.last_mut() {
            let v = *v;
            if *k < adj[v].len() {
                let w = adj[v][*k];
                *k += 1;
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some((u, _)) = call.last() {
                    low[*u] = low[*u].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }
    comp
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Node {
    True,
    False,
    Lit(String, bool),
    And(usize, usize),
    Or(usize, usize),
    Next(usize),
    Until(usize, usize),
    Release(usize, usize),
}

#[derive(Default)]
struct Interner {
    nodes: Vec<Node>,
    ids: HashMap<Node, usize>,
}

impl Interner {
    fn intern(&mut self, n: Node) -> usize {
        if let Some(&i) = self.ids.get(&n) {
            return i;
        }
        self.nodes.push(n.clone());
        self.ids.insert(n, self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    fn add(&mut self, f: &Ltl) -> usize {
        let n = match f {
            Ltl::True => Node::True,
            Ltl::False => Node::False,
            Ltl::Atom(a) => Node::Lit(a.clone(), true),
            Ltl::Not(x) => match x.as_ref() {
                Ltl::Atom(a) => Node::Lit(a.clone(), false),
                other => panic!("formula not in negation normal form: !{other}"),
            },
            Ltl::And(x, y) => Node::And(self.add(x), self.add(y)),
            Ltl::Or(x, y) => Node::Or(self.add(x), self.add(y)),
            Ltl::Next(x) => Node::Next(self.add(x)),
            Ltl::Until(x, y) => Node::Until(self.add(x), self.add(y)),
            Ltl::Release(x, y) => Node::Release(self.add(x), self.add(y)),
            other => panic!("formula not in negation normal form: {other}"),
        };
        self.intern(n)
    }
}

#[derive(Debug, Clone, Default)]
struct Branch {
    pos: BTreeSet<String>,
    neg: BTreeSet<String>,
    next: BTreeSet<usize>,
    postponed: BTreeSet<usize>,
    done: BTreeSet<usize>,
}

impl Branch {
    /// Applies the one-interaction-per-step reading of literals. `false` when
    /// the branch is inconsistent.
    fn consistent(&mut self) -> bool {
        if self.pos.len() > 1 || self.pos.iter().any(|p| self.neg.contains(p)) {
            return false;
        }
        if !self.pos.is_empty() {
            self.neg.clear();
        }
        true
    }
}

fn expand(nodes: &[Node], mut todo: Vec<usize>, mut br: Branch, out: &mut Vec<Branch>) {
    while let Some(f) = todo.pop() {
        if !br.done.insert(f) {
            continue;
        }
        match &nodes[f] {
            Node::True => {}
            Node::False => return,
            Node::Lit(a, true) => {
                br.pos.insert(a.clone());
                if !br.consistent() {
                    return;
                }
            }
            Node::Lit(a, false) => {
                if br.pos.contains(a) {
                    return;
                }
                if br.pos.is_empty() {
                    br.neg.insert(a.clone());
                }
            }
            Node::And(x, y) => {
                todo.push(*x);
                todo.push(*y);
            }
            Node::Next(x) => {
                br.next.insert(*x);
            }
            Node::Or(x, y) => {
                let mut t1 = todo.clone();
                t1.push(*x);
                expand(nodes, t1, br.clone(), out);
                todo.push(*y);
            }
            Node::Until(x, y) => {
                let mut t1 = todo.clone();
                t1.push(*y);
                expand(nodes, t1, br.clone(), out);
                todo.push(*x);
                br.next.insert(f);
                br.postponed.insert(f);
            }
            Node::Release(x, y) => {
                let mut t1 = todo.clone();
                t1.push(*x);
                t1.push(*y);
                expand(nodes, t1, br.clone(), out);
                todo.push(*y);
                br.next.insert(f);
            }
        }
    }
    out.push(br);
}

/// Translates an NNF formula into a state-based Büchi automaton whose edges
/// carry literal sets. Interactions are read as mutually exclusive: every
/// step carries exactly one symbol.
pub fn ltl_to_buchi(phi: &Ltl) -> BuchiAutomaton {
    let phi = phi.nnf();
    let mut it = Interner::default();
    let root = it.add(&phi);
    let nodes = it.nodes;
    let untils: Vec<usize> = (0..nodes.len())
        .filter(|&i| matches!(nodes[i], Node::Until(..)))
        .collect();
    let n_acc = untils.len();

    // Generalized automaton over obligation sets with transition acceptance.
    type Trans = (Label, usize, Vec<bool>);
    let mut gstates: Vec<BTreeSet<usize>> = vec![BTreeSet::from([root])];
    let mut gindex: HashMap<BTreeSet<usize>, usize> = HashMap::from([(gstates[0].clone(), 0)]);
    let mut gtrans: Vec<Vec<Trans>> = Vec::new();
    let mut i = 0;
    while i < gstates.len() {
        let mut branches = Vec::new();
        expand(&nodes, gstates[i].iter().copied().collect(), Branch::default(), &mut branches);
        let mut ts = Vec::new();
        for br in branches {
            let dest = match gindex.get(&br.next) {
                Some(&d) => d,
                None => {
                    gstates.push(br.next.clone());
                    gindex.insert(br.next.clone(), gstates.len() - 1);
                    gstates.len() - 1
                }
            };
            let acc = untils.iter().map(|u| !br.postponed.contains(u)).collect();
            ts.push((
                Label::Lits {
                    pos: br.pos,
                    neg: br.neg,
                },
                dest,
                acc,
            ));
        }
        gtrans.push(ts);
        i += 1;
    }

    // Degeneralize with a level counter; level `n_acc` is accepting.
    let mut states: Vec<(usize, usize)> = vec![(0, 0)];
    let mut index: HashMap<(usize, usize), usize> = HashMap::from([((0, 0), 0)]);
    let mut edges: BTreeSet<(usize, Label, usize)> = BTreeSet::new();
    let mut k = 0;
    while k < states.len() {
        let (g, level) = states[k];
        for (label, dest, acc) in &gtrans[g] {
            let mut j = if level == n_acc { 0 } else { level };
            while j < n_acc && acc[j] {
                j += 1;
            }
            let key = (*dest, j);
            let d = match index.get(&key) {
                Some(&d) => d,
                None => {
                    states.push(key);
                    index.insert(key, states.len() - 1);
                    states.len() - 1
                }
            };
            edges.insert((k, label.clone(), d));
        }
        k += 1;
    }
    let accepting: Vec<bool> = states.iter().map(|s| s.1 == n_acc).collect();
    let alphabet = phi.atoms();
    let raw = finish(states.len(), 0, accepting, edges.into_iter().collect(), alphabet);
    debug!(states = raw.states.len(), edges = raw.edges.len(), "buchi automaton built");
    raw
}

/// Drops accepting marks outside cycles, removes states that cannot reach an
/// accepting cycle, merges bisimilar states and renames states `s0, s1, …`
/// in breadth-first order.
fn finish(
    n: usize,
    initial: usize,
    mut accepting: Vec<bool>,
    edges: Vec<(usize, Label, usize)>,
    alphabet: BTreeSet<String>,
) -> BuchiAutomaton {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (f, _, t) in &edges {
        adj[*f].push(*t);
    }
    let comp = tarjan(&adj);
    let mut comp_size = vec![0usize; n];
    for &c in &comp {
        comp_size[c] += 1;
    }
    for v in 0..n {
        if accepting[v] && !(comp_size[comp[v]] > 1 || adj[v].contains(&v)) {
            accepting[v] = false;
        }
    }
    // Useful states: those that can reach an accepting state (which now lies on a cycle).
    let mut useful: Vec<bool> = accepting.clone();
    let mut changed = true;
    while changed {
        changed = false;
        for v in 0..n {
            if !useful[v] && adj[v].iter().any(|w| useful[*w]) {
                useful[v] = true;
                changed = true;
            }
        }
    }
    let edges: Vec<(usize, Label, usize)> = edges
        .into_iter()
        .filter(|(f, _, t)| useful[*f] && useful[*t])
        .collect();

    // Partition refinement for bisimulation.
    let mut class: Vec<usize> = (0..n).map(|v| usize::from(accepting[v])).collect();
    loop {
        let mut sigs: BTreeMap<(usize, BTreeSet<(Label, usize)>), usize> = BTreeMap::new();
        let mut next = vec![0; n];
        for v in 0..n {
            let out: BTreeSet<(Label, usize)> = edges
                .iter()
                .filter(|(f, _, _)| *f == v)
                .map(|(_, l, t)| (l.clone(), class[*t]))
                .collect();
            let key = (class[v], out);
            let len = sigs.len();
            next[v] = *sigs.entry(key).or_insert(len);
        }
        let stable = {
            let count_old: BTreeSet<usize> = class.iter().copied().collect();
            let count_new: BTreeSet<usize> = next.iter().copied().collect();
            count_old.len() == count_new.len()
        };
        class = next;
        if stable {
            break;
        }
    }

    // BFS renaming over quotient classes, edges in label order.
    let mut qedges: BTreeMap<usize, BTreeSet<(Label, usize)>> = BTreeMap::new();
    for (f, l, t) in &edges {
        qedges.entry(class[*f]).or_default().insert((l.clone(), class[*t]));
    }
    let mut order: HashMap<usize, usize> = HashMap::new();
    let mut queue = VecDeque::from([class[initial]]);
    order.insert(class[initial], 0);
    let mut out_edges = Vec::new();
    let mut acc_out = BTreeSet::new();
    while let Some(c) = queue.pop_front() {
        let id = order[&c];
        if (0..n).any(|v| class[v] == c && accepting[v]) {
            acc_out.insert(id);
        }
        for (l, t) in qedges.get(&c).into_iter().flatten() {
            let len = order.len();
            let tid = *order.entry(*t).or_insert_with(|| {
                queue.push_back(*t);
                len
            });
            out_edges.push(BuchiEdge {
                from: id,
                label: l.clone(),
                to: tid,
            });
        }
    }
    BuchiAutomaton {
        states: (0..order.len()).map(|i| format!("s{i}")).collect(),
        initial: 0,
        accepting: acc_out,
        edges: out_edges,
        alphabet,
    }
}

/// Replaces literal labels by symbol sets over `Σ_φ ∪ {#}`: `σ ↦ {σ}`,
/// `¬σ ↦ Σ_φ∖{σ} ∪ {#}`, conjunction ↦ intersection, `true` ↦ everything.
/// Empty labels are dropped; parallel edges are merged.
pub fn postprocess_alphabet(b: &BuchiAutomaton, sigma_phi: &BTreeSet<String>) -> BuchiAutomaton {
    let full: BTreeSet<String> = sigma_phi
        .iter()
        .cloned()
        .chain(std::iter::once(HASH.to_string()))
        .collect();
    let mut merged: BTreeMap<(usize, usize), BTreeSet<String>> = BTreeMap::new();
    for e in &b.edges {
        let set: BTreeSet<String> = match &e.label {
            Label::Symbols(s) => s.clone(),
            Label::Lits { pos, neg } => {
                if pos.len() > 1 {
                    debug!(label = %e.label.render(), "dropping edge with two positive interactions");
                    continue;
                }
                let mut set = full.clone();
                if let Some(p) = pos.iter().next() {
                    set = if sigma_phi.contains(p) {
                        BTreeSet::from([p.clone()])
                    } else {
                        BTreeSet::new()
                    };
                }
                for n in neg {
                    set.remove(n);
                }
                set
            }
        };
        if set.is_empty() {
            continue;
        }
        merged.entry((e.from, e.to)).or_default().extend(set);
    }
    BuchiAutomaton {
        states: b.states.clone(),
        initial: b.initial,
        accepting: b.accepting.clone(),
        edges: merged
            .into_iter()
            .map(|((from, to), set)| BuchiEdge {
                from,
                label: Label::Symbols(set),
                to,
            })
            .collect(),
        alphabet: sigma_phi.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::parse_ltl;

    fn set(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn globally_is_one_state() {
        let b = ltl_to_buchi(&parse_ltl("G a").unwrap());
        assert_eq!(b.num_states(), 1);
        assert_eq!(b.accepting, BTreeSet::from([0]));
        assert_eq!(b.edges.len(), 1);
        assert_eq!(
            b.edges[0].label,
            Label::Lits {
                pos: set(&["a"]),
                neg: set(&[])
            }
        );
    }

    #[test]
    fn finally_is_two_states() {
        let b = ltl_to_buchi(&parse_ltl("F a").unwrap());
        assert_eq!(b.num_states(), 2);
        assert_eq!(b.accepting, BTreeSet::from([1]));
        assert!(b.accepts_lasso(&["b"], &["a"]));
        assert!(!b.accepts_lasso(&[], &["b"]));
    }

    #[test]
    fn negated_prompt_has_golden_shape() {
        let phi = parse_ltl("G(take1l -> X !take2l) & G(take2l -> X !take1l)").unwrap();
        let b = ltl_to_buchi(&Ltl::not(phi));
        assert_eq!(b.num_states(), 4);
        assert_eq!(b.accepting, BTreeSet::from([3]));
        let sigma = set(&["take1l", "take2l"]);
        let p = postprocess_alphabet(&b, &sigma);
        let label = |f: usize, t: usize| {
            p.edges
                .iter()
                .find(|e| e.from == f && e.to == t)
                .map(|e| e.label.clone())
        };
        assert_eq!(label(0, 0), Some(Label::Symbols(set(&["#", "take1l", "take2l"]))));
        assert_eq!(label(0, 1), Some(Label::Symbols(set(&["take1l"]))));
        assert_eq!(label(1, 3), Some(Label::Symbols(set(&["take2l"]))));
        assert_eq!(label(3, 3), Some(Label::Symbols(set(&["#", "take1l", "take2l"]))));
    }

    #[test]
    fn postprocess_literal_rules() {
        let sigma = set(&["take1l", "take2l"]);
        let b = BuchiAutomaton {
            states: vec!["s0".into(), "s1".into()],
            initial: 0,
            accepting: BTreeSet::new(),
            edges: vec![
                BuchiEdge { from: 0, label: Label::Lits { pos: set(&[]), neg: set(&["take1l"]) }, to: 0 },
                BuchiEdge { from: 0, label: Label::Lits { pos: set(&["take1l"]), neg: set(&[]) }, to: 1 },
                BuchiEdge { from: 1, label: Label::Lits { pos: set(&[]), neg: set(&[]) }, to: 1 },
                BuchiEdge { from: 1, label: Label::Lits { pos: set(&["take1l", "take2l"]), neg: set(&[]) }, to: 0 },
            ],
            alphabet: sigma.clone(),
        };
        let p = postprocess_alphabet(&b, &sigma);
        assert_eq!(p.edges.len(), 3);
        assert_eq!(p.edges[0].label, Label::Symbols(set(&["#", "take2l"])));
        assert_eq!(p.edges[1].label, Label::Symbols(set(&["take1l"])));
        assert_eq!(p.edges[2].label, Label::Symbols(set(&["#", "take1l", "take2l"])));
    }

    #[test]
    fn dot_marks_accepting_states() {
        let b = ltl_to_buchi(&parse_ltl("F a").unwrap());
        let dot = b.to_dot();
        assert!(dot.contains("\"s1\" [shape=doublecircle]"));
        assert!(dot.contains("label=\"a\""));
    }
}
