//! Candidate generation over bounded integer boxes. Parameters are order
//! encoded (`[x >= v]` literals) into one incremental CDCL instance; linear
//! atoms become decision diagrams over those literals. Order literals are
//! decided before anything else and always toward the low end of the box
//! (`Asc`) or the high end (`Desc`). With one parameter the candidate is the
//! least (greatest) admissible value.

use std::collections::HashMap;

use num_integer::Integer;
use num_traits::Zero;

use super::sat::{Lit, NoTheory, Sat};
use crate::constraints::formula::{Assignment, Atom, Formula, LinExpr, Rel, Val, VarId};
use crate::rational::Rat;

/// Value order used when branching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    #[default]
    Asc,
    Desc,
}

/// `Σ a·x ≤ b` over parameter slots.
type Linear = (Vec<(usize, i128)>, i128);

#[derive(Clone)]
pub struct Candidates {
    sat: Sat,
    exist: Vec<VarId>,
    ranges: Vec<(i128, i128)>,
    /// `ge[i][k]` is the variable of `[x_i >= lo_i + 1 + k]`.
    ge: Vec<Vec<usize>>,
    bools: HashMap<VarId, usize>,
    linear: HashMap<Linear, Lit>,
    truth: Lit,
}

impl Candidates {
    pub fn new(exist: &[VarId], ranges: &[(i64, i64)], order: Order) -> Self {
        let mut sat = Sat::new();
        let t = Lit::new(sat.new_var(), true);
        sat.add_clause(&[t]);
        let ranges: Vec<(i128, i128)> = ranges.iter().map(|(a, b)| (*a as i128, *b as i128)).collect();
        let mut ge = Vec::new();
        let mut preferred = Vec::new();
        for (lo, hi) in &ranges {
            let vs: Vec<usize> = (*lo..*hi).map(|_| sat.new_var()).collect();
            for w in vs.windows(2) {
                sat.add_clause(&[Lit::new(w[1], false), Lit::new(w[0], true)]);
            }
            match order {
                Order::Asc => preferred.extend(vs.iter().map(|v| Lit::new(*v, false))),
                Order::Desc => preferred.extend(vs.iter().rev().map(|v| Lit::new(*v, true))),
            }
            ge.push(vs);
        }
        sat.set_preferred(preferred);
        Candidates {
            sat,
            exist: exist.to_vec(),
            ranges,
            ge,
            bools: HashMap::new(),
            linear: HashMap::new(),
            truth: t,
        }
    }

    /// `[x_i >= v]`.
    fn at_least(&self, i: usize, v: i128) -> Lit {
        let (lo, hi) = self.ranges[i];
        if v <= lo {
            self.truth
        } else if v > hi {
            !self.truth
        } else {
            Lit::new(self.ge[i][(v - lo - 1) as usize], true)
        }
    }

    fn gate_and(&mut self, lits: &[Lit]) -> Lit {
        if lits.iter().any(|l| *l == !self.truth) {
            return !self.truth;
        }
        let lits: Vec<Lit> = lits.iter().copied().filter(|l| *l != self.truth).collect();
        match lits.len() {
            0 => return self.truth,
            1 => return lits[0],
            _ => {}
        }
        let g = Lit::new(self.sat.new_var(), true);
        let mut long = vec![g];
        for &l in &lits {
            self.sat.add_clause(&[!g, l]);
            long.push(!l);
        }
        self.sat.add_clause(&long);
        g
    }

    fn gate_or(&mut self, lits: &[Lit]) -> Lit {
        let neg: Vec<Lit> = lits.iter().map(|l| !*l).collect();
        !self.gate_and(&neg)
    }

    /// Literal equivalent to `Σ a·x ≤ b`.
    fn linear_le(&mut self, terms: &[(usize, i128)], b: i128) -> Lit {
        let key = (terms.to_vec(), b);
        if let Some(l) = self.linear.get(&key) {
            return *l;
        }
        let l = self.diagram(terms, b, &mut HashMap::new());
        self.linear.insert(key, l);
        l
    }

    fn diagram(&mut self, terms: &[(usize, i128)], b: i128, memo: &mut HashMap<(usize, i128), Lit>) -> Lit {
        let span = |(i, a): &(usize, i128)| {
            let (lo, hi) = self.ranges[*i];
            (a * lo).min(a * hi)..=(a * lo).max(a * hi)
        };
        let min: i128 = terms.iter().map(|t| *span(t).start()).sum();
        let max: i128 = terms.iter().map(|t| *span(t).end()).sum();
        if max <= b {
            return self.truth;
        }
        if min > b {
            return !self.truth;
        }
        let (i, a) = terms[0];
        if terms.len() == 1 {
            return if a > 0 {
                !self.at_least(i, Integer::div_floor(&b, &a) + 1)
            } else {
                self.at_least(i, Integer::div_ceil(&b, &a))
            };
        }
        if let Some(l) = memo.get(&(terms.len(), b)) {
            return *l;
        }
        let (lo, hi) = self.ranges[i];
        let mut alts = Vec::new();
        for v in lo..=hi {
            let rest = self.diagram(&terms[1..], b - a * v, memo);
            if rest == !self.truth {
                continue;
            }
            let eq = self.gate_and(&[self.at_least(i, v), !self.at_least(i, v + 1)]);
            alts.push(self.gate_and(&[eq, rest]));
        }
        let l = self.gate_or(&alts);
        memo.insert((terms.len(), b), l);
        l
    }

    fn slot(&self, v: VarId) -> usize {
        self.exist
            .iter()
            .position(|x| *x == v)
            .expect("candidate constraints range over the parameters")
    }

    /// Integer form of `expr ≤ 0`: scaled coefficients and the bound.
    fn integral(&self, expr: &LinExpr) -> Linear {
        let scale = expr
            .coeffs
            .values()
            .chain(std::iter::once(&expr.constant))
            .fold(1i128, |acc, c| acc.lcm(c.denom()));
        let k = Rat::from_integer(scale);
        let mut terms: Vec<(usize, i128)> = expr
            .coeffs
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(v, c)| (self.slot(*v), (*c * k).to_integer()))
            .collect();
        terms.sort();
        (terms, -(expr.constant * k).to_integer())
    }

    fn atom_lit(&mut self, a: &Atom) -> Lit {
        let (terms, b) = self.integral(&a.expr);
        let neg: Vec<(usize, i128)> = terms.iter().map(|(i, c)| (*i, -c)).collect();
        match a.rel {
            Rel::Le => self.linear_le(&terms, b),
            Rel::Lt => self.linear_le(&terms, b - 1),
            Rel::Ge => self.linear_le(&neg, -b),
            Rel::Gt => self.linear_le(&neg, -b - 1),
            Rel::Eq => {
                let x = self.linear_le(&terms, b);
                let y = self.linear_le(&neg, -b);
                self.gate_and(&[x, y])
            }
        }
    }

    fn encode(&mut self, f: &Formula) -> Lit {
        match f {
            Formula::True => self.truth,
            Formula::False => !self.truth,
            Formula::Bool(v) => {
                let next = self.sat.num_vars();
                let s = *self.bools.entry(*v).or_insert(next);
                if s == next {
                    self.sat.new_var();
                }
                Lit::new(s, true)
            }
            Formula::Atom(a) => self.atom_lit(a),
            Formula::Not(g) => !self.encode(g),
            Formula::And(gs) => {
                let ls: Vec<Lit> = gs.iter().map(|g| self.encode(g)).collect();
                self.gate_and(&ls)
            }
            Formula::Or(gs) => {
                let ls: Vec<Lit> = gs.iter().map(|g| self.encode(g)).collect();
                self.gate_or(&ls)
            }
            Formula::Implies(a, b) => {
                let la = self.encode(a);
                let lb = self.encode(b);
                self.gate_or(&[!la, lb])
            }
        }
    }

    /// Adds a constraint over the parameters.
    pub fn add(&mut self, f: &Formula) {
        match f {
            Formula::And(gs) => gs.iter().for_each(|g| self.add(g)),
            Formula::Or(gs) => {
                let ls: Vec<Lit> = gs.iter().map(|g| self.encode(g)).collect();
                self.sat.add_clause(&ls);
            }
            other => {
                let l = self.encode(other);
                self.sat.add_clause(&[l]);
            }
        }
    }

    pub fn conflicts(&self) -> u64 {
        self.sat.conflicts
    }

    /// The first point satisfying everything added so far.
    pub fn next(&mut self) -> Option<Assignment> {
        if !self.sat.solve(&mut NoTheory) {
            return None;
        }
        let mut out = Assignment::default();
        for (i, v) in self.exist.iter().enumerate() {
            let (lo, _) = self.ranges[i];
            let above = self.ge[i]
                .iter()
                .take_while(|s| self.sat.model_value(**s) == Some(true))
                .count() as i128;
            out.set(*v, Val::Num(Rat::from_integer(lo + above)));
        }
        Some(out)
    }
}

/// Searches the box `ranges` (one per variable of `exist`, inclusive) for
/// an integer point satisfying every constraint, preferring values by
/// `order`. `nodes` counts solver conflicts.
pub fn find_point(
    exist: &[VarId],
    ranges: &[(i64, i64)],
    constraints: &[Formula],
    order: Order,
    nodes: &mut u64,
) -> Option<Assignment> {
    let mut c = Candidates::new(exist, ranges, order);
    for f in constraints {
        c.add(f);
    }
    let p = c.next();
    *nodes += c.conflicts();
    p
}

/// Lexicographic minimization of `objective` over the satisfying points.
pub fn find_min_point(
    base: &Candidates,
    objective: &[LinExpr],
    nodes: &mut u64,
) -> Option<Assignment> {
    let mut fixed = base.clone();
    let mut best = fixed.next()?;
    for obj in objective {
        loop {
            let val = obj
                .eval(&|v| best.num(v))
                .expect("objective ranges over existential variables");
            let mut probe = fixed.clone();
            probe.add(&Formula::atom(obj.clone(), Rel::Lt, LinExpr::constant(val)));
            let found = probe.next();
            *nodes += probe.conflicts();
            match found {
                Some(p) => best = p,
                None => {
                    fixed.add(&Formula::atom(obj.clone(), Rel::Eq, LinExpr::constant(val)));
                    break;
                }
            }
        }
    }
    Some(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::formula::{VarKind, Vars};
    use crate::rational::int;

    #[test]
    fn learned_constraint_jumps_to_ninety() {
        let mut vars = Vars::new();
        let x = vars.declare("x1", VarKind::Param { lo: 0, hi: 100 });
        let learned = Formula::atom(LinExpr::var(x) - LinExpr::int(10), Rel::Ge, LinExpr::int(80));
        let mut nodes = 0;
        let p = find_point(&[x], &[(0, 100)], &[learned], Order::Asc, &mut nodes).unwrap();
        assert_eq!(p.num(x), Some(int(90)));
        assert!(nodes <= 2);
    }

    #[test]
    fn ascending_and_descending() {
        let mut vars = Vars::new();
        let x = vars.declare("x", VarKind::Param { lo: 3, hi: 5 });
        let mut n = 0;
        assert_eq!(find_point(&[x], &[(3, 5)], &[], Order::Asc, &mut n).unwrap().num(x), Some(int(3)));
        assert_eq!(find_point(&[x], &[(3, 5)], &[], Order::Desc, &mut n).unwrap().num(x), Some(int(5)));
    }

    #[test]
    fn disjunction_and_minimization() {
        let mut vars = Vars::new();
        let a = vars.declare("a", VarKind::Param { lo: 0, hi: 10 });
        let b = vars.declare("b", VarKind::Param { lo: 0, hi: 10 });
        let c = Formula::or([
            Formula::atom(LinExpr::var(a) + LinExpr::var(b), Rel::Ge, LinExpr::int(12)),
            Formula::atom(LinExpr::var(a), Rel::Eq, LinExpr::int(7)),
        ]);
        let mut n = 0;
        let mut base = Candidates::new(&[a, b], &[(0, 10), (0, 10)], Order::Asc);
        base.add(&c);
        let p = find_min_point(&base, &[LinExpr::var(b)], &mut n).unwrap();
        assert_eq!(p.num(b), Some(int(0)));
        assert_eq!(p.num(a), Some(int(7)));
        let none = find_point(
            &[a, b],
            &[(0, 10), (0, 10)],
            &[c, Formula::atom(LinExpr::var(a), Rel::Lt, LinExpr::int(2))],
            Order::Asc,
            &mut n,
        );
        assert!(none.is_none());
    }
}
