//! Quantifier-free satisfiability over linear real arithmetic and Booleans:
//! Tseitin encoding into the CDCL solver with the simplex theory.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Signed};

use super::sat::{Lit, Sat};
use super::simplex::{BoundAtom, DeltaRat, Simplex};
use crate::constraints::formula::{Assignment, Atom, Formula, Rel, Val, VarId, Vars};
use crate::rational::Rat;

/// Result of a satisfiability check.
#[derive(Debug, Clone, PartialEq)]
pub enum FResult {
    Sat(Assignment),
    Unsat,
}

impl FResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, FResult::Sat(_))
    }
}

struct Encoder {
    sat: Sat,
    simplex: Simplex,
    /// Formula numeric variable -> simplex column.
    col: BTreeMap<VarId, usize>,
    /// Formula Boolean variable -> SAT variable.
    bools: BTreeMap<VarId, usize>,
    /// Normalized linear form -> simplex variable.
    forms: HashMap<Vec<(usize, Rat)>, usize>,
    atoms: HashMap<(usize, DeltaRat), usize>,
    true_lit: Lit,
}

impl Encoder {
    fn new(vars: &Vars, f: &Formula) -> Self {
        let numeric: Vec<VarId> = f
            .free_vars()
            .into_iter()
            .filter(|v| vars.kind(*v).is_numeric())
            .collect();
        let col = numeric.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let mut sat = Sat::new();
        let t = sat.new_var();
        let true_lit = Lit::new(t, true);
        sat.add_clause(&[true_lit]);
        Encoder {
            sat,
            simplex: Simplex::new(numeric.len()),
            col,
            bools: BTreeMap::new(),
            forms: HashMap::new(),
            atoms: HashMap::new(),
            true_lit,
        }
    }

    fn bool_lit(&mut self, v: VarId) -> Lit {
        let sv = match self.bools.get(&v) {
            Some(&s) => s,
            None => {
                let s = self.sat.new_var();
                self.bools.insert(v, s);
                s
            }
        };
        Lit::new(sv, true)
    }

    fn bound_lit(&mut self, x: usize, bound: DeltaRat) -> Lit {
        if let Some(&s) = self.atoms.get(&(x, bound)) {
            return Lit::new(s, true);
        }
        let s = self.sat.new_var();
        self.simplex.set_atom(s, BoundAtom { var: x, bound });
        self.atoms.insert((x, bound), s);
        Lit::new(s, true)
    }

    fn atom_lit(&mut self, a: &Atom) -> Lit {
        if a.expr.is_constant() {
            return if a.rel.holds(&a.expr.constant) {
                self.true_lit
            } else {
                !self.true_lit
            };
        }
        // Σ c·x + k rel 0  with leading coefficient scaled to +1.
        let lead = *a.expr.coeffs.values().next().unwrap();
        let scale = lead.abs().recip();
        let mut rel = a.rel;
        let sign = if lead.is_negative() { -Rat::one() } else { Rat::one() };
        if lead.is_negative() {
            rel = rel.flip();
        }
        let terms: Vec<(usize, Rat)> = a
            .expr
            .coeffs
            .iter()
            .map(|(v, c)| (self.col[v], *c * scale * sign))
            .collect();
        let bound = -a.expr.constant * scale * sign;
        let x = if terms.len() == 1 && terms[0].1.is_one() {
            terms[0].0
        } else {
            match self.forms.get(&terms) {
                Some(&s) => s,
                None => {
                    let s = self.simplex.add_slack(&terms);
                    self.forms.insert(terms, s);
                    s
                }
            }
        };
        let le = DeltaRat::real(bound);
        let lt = DeltaRat::new(bound, -Rat::one());
        match rel {
            Rel::Le => self.bound_lit(x, le),
            Rel::Lt => self.bound_lit(x, lt),
            Rel::Ge => !self.bound_lit(x, lt),
            Rel::Gt => !self.bound_lit(x, le),
            Rel::Eq => {
                let a = self.bound_lit(x, le);
                let b = !self.bound_lit(x, lt);
                self.gate_and(&[a, b])
            }
        }
    }

    fn gate_and(&mut self, lits: &[Lit]) -> Lit {
        let g = Lit::new(self.sat.new_var(), true);
        let mut long = vec![g];
        for &l in lits {
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

    fn encode(&mut self, f: &Formula) -> Lit {
        match f {
            Formula::True => self.true_lit,
            Formula::False => !self.true_lit,
            Formula::Bool(v) => self.bool_lit(*v),
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

    /// Asserts `f` at the top level, splitting top-level conjunctions.
    fn assert_top(&mut self, f: &Formula) {
        match f {
            Formula::And(gs) => gs.iter().for_each(|g| self.assert_top(g)),
            Formula::Or(gs) => {
                let ls: Vec<Lit> = gs.iter().map(|g| self.encode(g)).collect();
                self.sat.add_clause(&ls);
            }
            Formula::Implies(a, b) => {
                let la = self.encode(a);
                let lb = self.encode(b);
                self.sat.add_clause(&[!la, lb]);
            }
            other => {
                let l = self.encode(other);
                self.sat.add_clause(&[l]);
            }
        }
    }
}

/// Satisfiability of `f` with every numeric variable read as real. On `Sat`
/// the model assigns every free variable of `f`; numeric values avoid strict
/// bounds' infinitesimals where the constraints allow a bound-tight value.
pub fn check_sat(f: &Formula, vars: &Vars) -> FResult {
    let mut enc = Encoder::new(vars, f);
    enc.assert_top(f);
    let mut simplex = std::mem::replace(&mut enc.simplex, Simplex::new(0));
    if !enc.sat.solve(&mut simplex) {
        return FResult::Unsat;
    }
    let cols: Vec<usize> = enc.col.values().copied().collect();
    simplex.snap_strict(&cols);
    let delta = simplex.concrete_delta();
    let mut model = Assignment::default();
    for (v, c) in &enc.col {
        model.set(*v, Val::Num(simplex.concrete_value(*c, delta)));
    }
    for (v, s) in &enc.bools {
        model.set(*v, Val::Bool(enc.sat.model_value(*s).unwrap_or(false)));
    }
    debug_assert_eq!(f.eval(&model), Some(true), "model must satisfy the formula");
    FResult::Sat(model)
}
