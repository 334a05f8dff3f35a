//! CDCL SAT solver with a pluggable theory: two watched literals, first-UIP
//! learning, activity-based branching, phase saving and geometric restarts.
//! Optionally, a set of preferred literals is decided before anything else,
//! by activity and always with the preferred polarity.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: usize, positive: bool) -> Lit {
        Lit(((var as u32) << 1) | u32::from(!positive))
    }

    pub fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn code(self) -> usize {
        self.0 as usize
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

/// Theory attached to a subset of the Boolean variables.
pub trait Theory {
    fn is_theory_var(&self, var: usize) -> bool;
    /// Receives a literal over a theory variable. On conflict returns true
    /// literals whose conjunction is theory-inconsistent.
    fn assert_lit(&mut self, lit: Lit) -> Result<(), Vec<Lit>>;
    /// Consistency of everything asserted so far.
    fn check(&mut self) -> Result<(), Vec<Lit>>;
    fn push_level(&mut self);
    fn pop_to_level(&mut self, level: usize);
}

/// Theory that accepts everything.
pub struct NoTheory;

impl Theory for NoTheory {
    fn is_theory_var(&self, _: usize) -> bool {
        false
    }
    fn assert_lit(&mut self, _: Lit) -> Result<(), Vec<Lit>> {
        Ok(())
    }
    fn check(&mut self) -> Result<(), Vec<Lit>> {
        Ok(())
    }
    fn push_level(&mut self) {}
    fn pop_to_level(&mut self, _: usize) {}
}

const UNDEF: i8 = 0;

#[derive(Clone)]
pub struct Sat {
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    value: Vec<i8>,
    level: Vec<usize>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    theory_head: usize,
    activity: Vec<f64>,
    var_inc: f64,
    phase: Vec<bool>,
    unsat: bool,
    preferred: Vec<Lit>,
    pub conflicts: u64,
}

impl Default for Sat {
    fn default() -> Self {
        Self::new()
    }
}

impl Sat {
    pub fn new() -> Self {
        Sat {
            clauses: Vec::new(),
            watches: Vec::new(),
            value: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            theory_head: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            phase: Vec::new(),
            unsat: false,
            preferred: Vec::new(),
            conflicts: 0,
        }
    }

    pub fn new_var(&mut self) -> usize {
        let v = self.value.len();
        self.value.push(UNDEF);
        self.level.push(0);
        self.reason.push(None);
        self.activity.push(0.0);
        self.phase.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        v
    }

    pub fn num_vars(&self) -> usize {
        self.value.len()
    }

    fn lit_value(&self, l: Lit) -> i8 {
        let v = self.value[l.var()];
        if l.positive() {
            v
        } else {
            -v
        }
    }

    pub fn model_value(&self, var: usize) -> Option<bool> {
        match self.value[var] {
            1 => Some(true),
            -1 => Some(false),
            _ => None,
        }
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    /// Decides the variables of `lits` before all others, each with the
    /// polarity given. Ties in activity go to the earlier literal.
    pub fn set_preferred(&mut self, lits: Vec<Lit>) {
        self.preferred = lits;
    }

    /// Adds a clause at decision level 0, dropping any model from a previous solve.
    pub fn add_clause(&mut self, lits: &[Lit]) {
        if self.unsat {
            return;
        }
        self.backtrack(0, &mut NoTheory);
        let mut c: Vec<Lit> = lits.to_vec();
        c.sort();
        c.dedup();
        if c.windows(2).any(|w| w[0] == !w[1]) {
            return;
        }
        c.retain(|l| self.lit_value(*l) != -1 || self.level[l.var()] != 0);
        if c.iter().any(|l| self.lit_value(*l) == 1 && self.level[l.var()] == 0) {
            return;
        }
        match c.len() {
            0 => self.unsat = true,
            1 => {
                if self.lit_value(c[0]) == UNDEF {
                    self.enqueue(c[0], None);
                } else if self.lit_value(c[0]) == -1 {
                    self.unsat = true;
                }
            }
            _ => {
                self.attach(c);
            }
        }
    }

    fn attach(&mut self, c: Vec<Lit>) -> usize {
        let idx = self.clauses.len();
        self.watches[(!c[0]).code()].push(idx);
        self.watches[(!c[1]).code()].push(idx);
        self.clauses.push(c);
        idx
    }

    fn enqueue(&mut self, l: Lit, reason: Option<usize>) {
        let v = l.var();
        self.value[v] = if l.positive() { 1 } else { -1 };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Unit propagation; returns a conflicting clause index.
    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[p.code()]);
            let mut i = 0;
            let mut conflict = None;
            while i < ws.len() {
                let ci = ws[i];
                let c = &mut self.clauses[ci];
                if c[0] == false_lit {
                    c.swap(0, 1);
                }
                let first = c[0];
                let first_val = {
                    let v = self.value[first.var()];
                    if first.positive() {
                        v
                    } else {
                        -v
                    }
                };
                if first_val == 1 {
                    i += 1;
                    continue;
                }
                let mut found = false;
                for k in 2..c.len() {
                    let l = c[k];
                    let v = self.value[l.var()];
                    let lv = if l.positive() { v } else { -v };
                    if lv != -1 {
                        c.swap(1, k);
                        let nw = !c[1];
                        self.watches[nw.code()].push(ci);
                        ws.swap_remove(i);
                        found = true;
                        break;
                    }
                }
                if found {
                    continue;
                }
                if first_val == -1 {
                    conflict = Some(ci);
                    break;
                }
                self.enqueue(first, Some(ci));
                i += 1;
            }
            let existing = std::mem::take(&mut self.watches[p.code()]);
            ws.extend(existing);
            self.watches[p.code()] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn backtrack<T: Theory>(&mut self, level: usize, th: &mut T) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level];
        for i in (lim..self.trail.len()).rev() {
            let v = self.trail[i].var();
            self.phase[v] = self.trail[i].positive();
            self.value[v] = UNDEF;
            self.reason[v] = None;
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level);
        self.qhead = lim;
        self.theory_head = self.theory_head.min(lim);
        th.pop_to_level(level);
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
    }

    /// First-UIP analysis of a clause whose literals are all false, with at
    /// least one at the current level.
    fn analyze(&mut self, conflict: Vec<Lit>) -> (Vec<Lit>, usize) {
        let mut seen = vec![false; self.num_vars()];
        let mut learnt = vec![Lit(0)];
        let mut counter = 0;
        let mut clause = conflict;
        let mut idx = self.trail.len();
        let cur = self.decision_level();
        let uip;
        loop {
            for &q in &clause {
                let v = q.var();
                if seen[v] || self.level[v] == 0 {
                    continue;
                }
                seen[v] = true;
                self.bump(v);
                if self.level[v] >= cur {
                    counter += 1;
                } else {
                    learnt.push(q);
                }
            }
            loop {
                idx -= 1;
                if seen[self.trail[idx].var()] {
                    break;
                }
            }
            let p = self.trail[idx];
            counter -= 1;
            if counter == 0 {
                uip = p;
                break;
            }
            let r = self.reason[p.var()].expect("propagated literal has a reason");
            clause = self.clauses[r].iter().copied().filter(|l| *l != p).collect();
        }
        learnt[0] = !uip;
        let mut bt = 0;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var()] > self.level[learnt[max_i].var()] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            bt = self.level[learnt[1].var()];
        }
        self.var_inc /= 0.95;
        (learnt, bt)
    }

    fn pick_branch(&self) -> Option<Lit> {
        let mut pick: Option<Lit> = None;
        for l in &self.preferred {
            if self.value[l.var()] == UNDEF && pick.is_none_or(|p| self.activity[l.var()] > self.activity[p.var()]) {
                pick = Some(*l);
            }
        }
        if pick.is_some() {
            return pick;
        }
        let mut best: Option<usize> = None;
        for v in 0..self.num_vars() {
            if self.value[v] == UNDEF && best.is_none_or(|b| self.activity[v] > self.activity[b]) {
                best = Some(v);
            }
        }
        best.map(|v| Lit::new(v, self.phase[v]))
    }

    /// Forwards newly assigned theory literals; returns a conflict clause.
    fn sync_theory<T: Theory>(&mut self, th: &mut T) -> Option<Vec<Lit>> {
        while self.theory_head < self.trail.len() {
            let l = self.trail[self.theory_head];
            self.theory_head += 1;
            if th.is_theory_var(l.var()) {
                if let Err(expl) = th.assert_lit(l) {
                    return Some(expl.into_iter().map(|x| !x).collect());
                }
            }
        }
        th.check().err().map(|expl| expl.into_iter().map(|x| !x).collect())
    }

    /// Decides satisfiability; on `true` the model is available through
    /// [`Sat::model_value`].
    pub fn solve<T: Theory>(&mut self, th: &mut T) -> bool {
        if self.unsat {
            return false;
        }
        let mut restart_limit = 100.0f64;
        let mut since_restart = 0u64;
        loop {
            let conflict: Option<Vec<Lit>> = match self.propagate() {
                Some(ci) => Some(self.clauses[ci].clone()),
                None => self.sync_theory(th),
            };
            if let Some(clause) = conflict {
                self.conflicts += 1;
                since_restart += 1;
                let max_level = clause.iter().map(|l| self.level[l.var()]).max().unwrap_or(0);
                if max_level == 0 {
                    self.unsat = true;
                    return false;
                }
                self.backtrack(max_level, th);
                let (learnt, bt) = self.analyze(clause);
                self.backtrack(bt, th);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let first = learnt[0];
                    let ci = self.attach(learnt);
                    self.enqueue(first, Some(ci));
                }
                continue;
            }
            if since_restart as f64 >= restart_limit {
                since_restart = 0;
                restart_limit *= 1.5;
                self.backtrack(0, th);
                continue;
            }
            match self.pick_branch() {
                None => return true,
                Some(l) => {
                    self.trail_lim.push(self.trail.len());
                    th.push_level();
                    self.enqueue(l, None);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(n: usize, clauses: &[Vec<Lit>]) -> bool {
        (0u32..(1 << n)).any(|m| {
            clauses
                .iter()
                .all(|c| c.iter().any(|l| ((m >> l.var()) & 1 == 1) == l.positive()))
        })
    }

    #[test]
    fn pigeonhole_3_into_2_is_unsat() {
        let mut s = Sat::new();
        let p: Vec<Vec<usize>> = (0..3).map(|_| (0..2).map(|_| s.new_var()).collect()).collect();
        for row in &p {
            s.add_clause(&row.iter().map(|v| Lit::new(*v, true)).collect::<Vec<_>>());
        }
        for h in 0..2 {
            for i in 0..3 {
                for j in i + 1..3 {
                    s.add_clause(&[Lit::new(p[i][h], false), Lit::new(p[j][h], false)]);
                }
            }
        }
        assert!(!s.solve(&mut NoTheory));
    }

    proptest! {
        #[test]
        fn agrees_with_brute_force(raw in prop::collection::vec(prop::collection::vec((0usize..6, any::<bool>()), 1..4), 1..30)) {
            let clauses: Vec<Vec<Lit>> = raw.iter().map(|c| c.iter().map(|(v, p)| Lit::new(*v, *p)).collect()).collect();
            let mut s = Sat::new();
            for _ in 0..6 { s.new_var(); }
            for c in &clauses { s.add_clause(c); }
            let sat = s.solve(&mut NoTheory);
            prop_assert_eq!(sat, brute(6, &clauses));
            if sat {
                for c in &clauses {
                    prop_assert!(c.iter().any(|l| s.model_value(l.var()) == Some(l.positive())));
                }
            }
        }
    }
}
