//! Quantifier-free formulas over linear atoms, Boolean variables and the
//! variable table they refer to.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::rational::{fmt_rat, int, Rat};

pub type VarId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VarKind {
    /// Real-valued clock, nonnegative in every reachable state.
    Clock,
    /// Bounded integer parameter.
    Param { lo: i64, hi: i64 },
    /// Location indicator of one component (or of the monitor).
    LocFlag { component: String, location: String },
    /// `prev_σ^depth`: interaction fired `depth` steps ago.
    History { sigma: String, depth: usize },
    /// Guard imprecision in `[-eps, eps]`.
    Perturb { eps: Rat },
    /// Plain real variable (used by hand-built queries).
    Real,
    /// Plain Boolean variable.
    Bool,
}

impl VarKind {
    pub fn is_real(&self) -> bool {
        matches!(self, VarKind::Clock | VarKind::Perturb { .. } | VarKind::Real)
    }

    pub fn is_int(&self) -> bool {
        matches!(self, VarKind::Param { .. })
    }

    pub fn is_bool(&self) -> bool {
        matches!(
            self,
            VarKind::LocFlag { .. } | VarKind::History { .. } | VarKind::Bool
        )
    }

    pub fn is_numeric(&self) -> bool {
        !self.is_bool()
    }
}

#[derive(Debug, Clone)]
pub struct VarInfo {
    pub name: String,
    pub kind: VarKind,
}

/// Variable table; ids are dense and stable.
#[derive(Debug, Clone, Default)]
pub struct Vars {
    vars: Vec<VarInfo>,
    by_name: HashMap<String, VarId>,
}

impl Vars {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares `name`, or returns the existing id if it is already declared
    /// with the same kind.
    ///
    /// # Panics
    /// If `name` exists with a different kind.
    pub fn declare(&mut self, name: &str, kind: VarKind) -> VarId {
        if let Some(&id) = self.by_name.get(name) {
            assert_eq!(self.vars[id].kind, kind, "variable {name} redeclared with another kind");
            return id;
        }
        let id = self.vars.len();
        self.vars.push(VarInfo {
            name: name.to_string(),
            kind,
        });
        self.by_name.insert(name.to_string(), id);
        id
    }

    pub fn id(&self, name: &str) -> Option<VarId> {
        self.by_name.get(name).copied()
    }

    pub fn name(&self, id: VarId) -> &str {
        &self.vars[id].name
    }

    pub fn kind(&self, id: VarId) -> &VarKind {
        &self.vars[id].kind
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, &VarInfo)> {
        self.vars.iter().enumerate()
    }

    pub fn ids_where(&self, pred: impl Fn(&VarKind) -> bool) -> Vec<VarId> {
        self.iter().filter(|(_, v)| pred(&v.kind)).map(|(i, _)| i).collect()
    }

    /// Static range of a numeric variable, if bounded on both sides.
    pub fn range(&self, id: VarId) -> Option<(Rat, Rat)> {
        match &self.vars[id].kind {
            VarKind::Param { lo, hi } => Some((int(*lo), int(*hi))),
            VarKind::Perturb { eps } => Some((-*eps, *eps)),
            _ => None,
        }
    }
}

/// `Σ coeff·var + constant`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LinExpr {
    pub coeffs: BTreeMap<VarId, Rat>,
    pub constant: Rat,
}

impl LinExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rat) -> Self {
        LinExpr {
            coeffs: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn int(c: i64) -> Self {
        Self::constant(int(c))
    }

    pub fn var(v: VarId) -> Self {
        Self::term(v, Rat::one())
    }

    pub fn term(v: VarId, c: Rat) -> Self {
        let mut e = Self::zero();
        e.add_term(v, c);
        e
    }

    pub fn add_term(&mut self, v: VarId, c: Rat) {
        let slot = self.coeffs.entry(v).or_insert_with(Rat::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(&v);
        }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, v: VarId) -> Rat {
        self.coeffs.get(&v).copied().unwrap_or_else(Rat::zero)
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn scale(&self, k: Rat) -> LinExpr {
        if k.is_zero() {
            return LinExpr::zero();
        }
        LinExpr {
            coeffs: self.coeffs.iter().map(|(v, c)| (*v, *c * k)).collect(),
            constant: self.constant * k,
        }
    }

    /// Substitutes known values; the result mentions only unknown variables.
    pub fn substitute(&self, val: &dyn Fn(VarId) -> Option<Rat>) -> LinExpr {
        let mut out = LinExpr::constant(self.constant);
        for (v, c) in &self.coeffs {
            match val(*v) {
                Some(x) => out.constant += *c * x,
                None => out.add_term(*v, *c),
            }
        }
        out
    }

    pub fn eval(&self, val: &dyn Fn(VarId) -> Option<Rat>) -> Option<Rat> {
        let mut acc = self.constant;
        for (v, c) in &self.coeffs {
            acc += *c * val(*v)?;
        }
        Some(acc)
    }

    /// Lower and upper value over a box of per-variable intervals.
    pub fn interval(&self, range: &dyn Fn(VarId) -> (Rat, Rat)) -> (Rat, Rat) {
        let (mut lo, mut hi) = (self.constant, self.constant);
        for (v, c) in &self.coeffs {
            let (a, b) = range(*v);
            if c.is_positive() {
                lo += *c * a;
                hi += *c * b;
            } else {
                lo += *c * b;
                hi += *c * a;
            }
        }
        (lo, hi)
    }
}

impl std::ops::Add for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: LinExpr) -> LinExpr {
        for (v, c) in rhs.coeffs {
            self.add_term(v, c);
        }
        self.constant += rhs.constant;
        self
    }
}

impl std::ops::Sub for LinExpr {
    type Output = LinExpr;
    fn sub(self, rhs: LinExpr) -> LinExpr {
        self + rhs.scale(-Rat::one())
    }
}

impl std::ops::Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self.scale(-Rat::one())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Le,
    Lt,
    Eq,
    Ge,
    Gt,
}

impl Rel {
    pub fn holds(self, v: &Rat) -> bool {
        match self {
            Rel::Le => !v.is_positive(),
            Rel::Lt => v.is_negative(),
            Rel::Eq => v.is_zero(),
            Rel::Ge => !v.is_negative(),
            Rel::Gt => v.is_positive(),
        }
    }

    pub fn flip(self) -> Rel {
        match self {
            Rel::Le => Rel::Ge,
            Rel::Lt => Rel::Gt,
            Rel::Eq => Rel::Eq,
            Rel::Ge => Rel::Le,
            Rel::Gt => Rel::Lt,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Le => "<=",
            Rel::Lt => "<",
            Rel::Eq => "=",
            Rel::Ge => ">=",
            Rel::Gt => ">",
        }
    }

    pub fn is_strict(self) -> bool {
        matches!(self, Rel::Lt | Rel::Gt)
    }
}

/// `expr rel 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub expr: LinExpr,
    pub rel: Rel,
}

impl Atom {
    pub fn new(lhs: LinExpr, rel: Rel, rhs: LinExpr) -> Atom {
        Atom {
            expr: lhs - rhs,
            rel,
        }
    }

    /// Normal form: relation in {≤, <, =}, leading coefficient ±1 (positive for
    /// equalities). Equivalent atoms normalize identically.
    pub fn normalized(&self) -> Atom {
        let (mut expr, mut rel) = (self.expr.clone(), self.rel);
        if matches!(rel, Rel::Ge | Rel::Gt) {
            expr = -expr;
            rel = rel.flip();
        }
        if let Some((_, lead)) = expr.coeffs.iter().next() {
            let k = lead.abs();
            expr = expr.scale(k.recip());
            if rel == Rel::Eq && expr.coeffs.values().next().is_some_and(|c| c.is_negative()) {
                expr = -expr;
            }
        }
        Atom { expr, rel }
    }

    pub fn negated(&self) -> Option<Atom> {
        let rel = match self.rel {
            Rel::Le => Rel::Gt,
            Rel::Lt => Rel::Ge,
            Rel::Ge => Rel::Lt,
            Rel::Gt => Rel::Le,
            Rel::Eq => return None,
        };
        Some(Atom {
            expr: self.expr.clone(),
            rel,
        })
    }

    pub fn eval(&self, val: &dyn Fn(VarId) -> Option<Rat>) -> Option<bool> {
        self.expr.eval(val).map(|v| self.rel.holds(&v))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Bool(VarId),
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

/// A value assigned to a variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Val {
    Num(Rat),
    Bool(bool),
}

impl Val {
    pub fn num(self) -> Option<Rat> {
        match self {
            Val::Num(r) => Some(r),
            Val::Bool(_) => None,
        }
    }

    pub fn boolean(self) -> Option<bool> {
        match self {
            Val::Bool(b) => Some(b),
            Val::Num(_) => None,
        }
    }
}

/// Partial assignment indexed by variable id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Assignment(pub BTreeMap<VarId, Val>);

impl Assignment {
    pub fn set(&mut self, v: VarId, x: Val) {
        self.0.insert(v, x);
    }

    pub fn get(&self, v: VarId) -> Option<Val> {
        self.0.get(&v).copied()
    }

    pub fn num(&self, v: VarId) -> Option<Rat> {
        self.get(v).and_then(Val::num)
    }

    pub fn boolean(&self, v: VarId) -> Option<bool> {
        self.get(v).and_then(Val::boolean)
    }

    pub fn merged(&self, other: &Assignment) -> Assignment {
        let mut out = self.clone();
        out.0.extend(other.0.iter().map(|(k, v)| (*k, *v)));
        out
    }
}

impl Formula {
    pub fn atom(lhs: LinExpr, rel: Rel, rhs: LinExpr) -> Formula {
        Formula::Atom(Atom::new(lhs, rel, rhs)).fold_const()
    }

    fn fold_const(self) -> Formula {
        match &self {
            Formula::Atom(a) if a.expr.is_constant() => Formula::from_bool(a.rel.holds(&a.expr.constant)),
            _ => self,
        }
    }

    pub fn from_bool(b: bool) -> Formula {
        if b {
            Formula::True
        } else {
            Formula::False
        }
    }

    pub fn var(v: VarId) -> Formula {
        Formula::Bool(v)
    }

    /// Conjunction with flattening and constant folding.
    pub fn and(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    /// Disjunction with flattening and constant folding.
    pub fn or(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        match f {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(inner) => *inner,
            other => Formula::Not(Box::new(other)),
        }
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        match (a, b) {
            (Formula::False, _) | (_, Formula::True) => Formula::True,
            (Formula::True, b) => b,
            (a, Formula::False) => Formula::not(a),
            (a, b) => Formula::Implies(Box::new(a), Box::new(b)),
        }
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Formula::True)
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Formula::False)
    }

    /// Top-level conjuncts.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        match self {
            Formula::And(v) => v.iter().flat_map(|f| f.conjuncts()).collect(),
            Formula::True => vec![],
            other => vec![other],
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Bool(_) | Formula::Atom(_) => 1,
            Formula::Not(f) => 1 + f.size(),
            Formula::And(v) | Formula::Or(v) => 1 + v.iter().map(Formula::size).sum::<usize>(),
            Formula::Implies(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn visit_vars(&self, f: &mut dyn FnMut(VarId)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Bool(v) => f(*v),
            Formula::Atom(a) => a.expr.vars().for_each(f),
            Formula::Not(x) => x.visit_vars(f),
            Formula::And(v) | Formula::Or(v) => v.iter().for_each(|x| x.visit_vars(f)),
            Formula::Implies(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
        }
    }

    pub fn free_vars(&self) -> std::collections::BTreeSet<VarId> {
        let mut out = std::collections::BTreeSet::new();
        self.visit_vars(&mut |v| {
            out.insert(v);
        });
        out
    }

    /// Three-valued evaluation under a partial assignment: `None` when the
    /// value depends on unassigned variables.
    pub fn eval(&self, a: &Assignment) -> Option<bool> {
        self.eval_with(&|v| a.get(v))
    }

    pub fn eval_with(&self, val: &dyn Fn(VarId) -> Option<Val>) -> Option<bool> {
        match self {
            Formula::True => Some(true),
            Formula::False => Some(false),
            Formula::Bool(v) => val(*v).and_then(Val::boolean),
            Formula::Atom(a) => a.eval(&|v| val(v).and_then(Val::num)),
            Formula::Not(f) => f.eval_with(val).map(|b| !b),
            Formula::And(fs) => {
                let mut unknown = false;
                for f in fs {
                    match f.eval_with(val) {
                        Some(false) => return Some(false),
                        None => unknown = true,
                        Some(true) => {}
                    }
                }
                if unknown {
                    None
                } else {
                    Some(true)
                }
            }
            Formula::Or(fs) => {
                let mut unknown = false;
                for f in fs {
                    match f.eval_with(val) {
                        Some(true) => return Some(true),
                        None => unknown = true,
                        Some(false) => {}
                    }
                }
                if unknown {
                    None
                } else {
                    Some(false)
                }
            }
            Formula::Implies(a, b) => match (a.eval_with(val), b.eval_with(val)) {
                (Some(false), _) | (_, Some(true)) => Some(true),
                (Some(true), Some(false)) => Some(false),
                _ => None,
            },
        }
    }

    /// Substitutes assigned variables and simplifies.
    pub fn substitute(&self, a: &Assignment) -> Formula {
        self.substitute_with(&|v| a.get(v))
    }

    pub fn substitute_with(&self, val: &dyn Fn(VarId) -> Option<Val>) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Bool(v) => match val(*v).and_then(Val::boolean) {
                Some(b) => Formula::from_bool(b),
                None => self.clone(),
            },
            Formula::Atom(at) => {
                let expr = at.expr.substitute(&|v| val(v).and_then(Val::num));
                Formula::Atom(Atom { expr, rel: at.rel }).fold_const()
            }
            Formula::Not(f) => Formula::not(f.substitute_with(val)),
            Formula::And(fs) => Formula::and(fs.iter().map(|f| f.substitute_with(val))),
            Formula::Or(fs) => Formula::or(fs.iter().map(|f| f.substitute_with(val))),
            Formula::Implies(a, b) => Formula::implies(a.substitute_with(val), b.substitute_with(val)),
        }
    }

    /// Negation pushed to atoms where the atom has a negated form.
    pub fn nnf(&self) -> Formula {
        self.nnf_pol(true)
    }

    fn nnf_pol(&self, pos: bool) -> Formula {
        match self {
            Formula::True => Formula::from_bool(pos),
            Formula::False => Formula::from_bool(!pos),
            Formula::Bool(_) => {
                if pos {
                    self.clone()
                } else {
                    Formula::Not(Box::new(self.clone()))
                }
            }
            Formula::Atom(a) => {
                if pos {
                    self.clone()
                } else {
                    match a.negated() {
                        Some(n) => Formula::Atom(n),
                        None => {
                            let lt = Atom { expr: a.expr.clone(), rel: Rel::Lt };
                            let gt = Atom { expr: a.expr.clone(), rel: Rel::Gt };
                            Formula::Or(vec![Formula::Atom(lt), Formula::Atom(gt)])
                        }
                    }
                }
            }
            Formula::Not(f) => f.nnf_pol(!pos),
            Formula::And(fs) => {
                let parts = fs.iter().map(|f| f.nnf_pol(pos));
                if pos {
                    Formula::and(parts)
                } else {
                    Formula::or(parts)
                }
            }
            Formula::Or(fs) => {
                let parts = fs.iter().map(|f| f.nnf_pol(pos));
                if pos {
                    Formula::or(parts)
                } else {
                    Formula::and(parts)
                }
            }
            Formula::Implies(a, b) => {
                if pos {
                    Formula::or([a.nnf_pol(false), b.nnf_pol(true)])
                } else {
                    Formula::and([a.nnf_pol(true), b.nnf_pol(false)])
                }
            }
        }
    }

    /// Structural normal form used for syntactic comparison: atoms
    /// normalized, negated atoms folded, n-ary connectives flattened, sorted
    /// and deduplicated.
    pub fn canonical(&self) -> Formula {
        match self {
            Formula::True | Formula::False | Formula::Bool(_) => self.clone(),
            Formula::Atom(a) => Formula::Atom(a.normalized()).fold_const(),
            Formula::Not(f) => match f.canonical() {
                Formula::Atom(a) => match a.negated() {
                    Some(n) => Formula::Atom(n.normalized()),
                    None => Formula::not(Formula::Atom(a)),
                },
                other => Formula::not(other),
            },
            Formula::And(fs) => sorted(Formula::and(fs.iter().map(Formula::canonical))),
            Formula::Or(fs) => sorted(Formula::or(fs.iter().map(Formula::canonical))),
            Formula::Implies(a, b) => Formula::implies(a.canonical(), b.canonical()),
        }
    }

    pub fn display<'a>(&'a self, vars: &'a Vars) -> FormulaDisplay<'a> {
        FormulaDisplay { f: self, vars }
    }
}

fn sorted(f: Formula) -> Formula {
    match f {
        Formula::And(mut v) => {
            v.sort();
            v.dedup();
            if v.len() == 1 {
                v.pop().unwrap()
            } else {
                Formula::And(v)
            }
        }
        Formula::Or(mut v) => {
            v.sort();
            v.dedup();
            if v.len() == 1 {
                v.pop().unwrap()
            } else {
                Formula::Or(v)
            }
        }
        other => other,
    }
}

pub struct FormulaDisplay<'a> {
    f: &'a Formula,
    vars: &'a Vars,
}

fn write_sum(f: &mut fmt::Formatter<'_>, terms: &[(String, Rat)], constant: Rat) -> fmt::Result {
    let mut first = true;
    for (name, c) in terms {
        let mag = c.abs();
        let coef = if mag.is_one() {
            String::new()
        } else {
            format!("{}*", fmt_rat(&mag))
        };
        match (first, c.is_negative()) {
            (true, false) => write!(f, "{coef}{name}")?,
            (true, true) => write!(f, "-{coef}{name}")?,
            (false, false) => write!(f, " + {coef}{name}")?,
            (false, true) => write!(f, " - {coef}{name}")?,
        }
        first = false;
    }
    if first {
        write!(f, "{}", fmt_rat(&constant))
    } else if constant.is_positive() {
        write!(f, " + {}", fmt_rat(&constant))
    } else if constant.is_negative() {
        write!(f, " - {}", fmt_rat(&-constant))
    } else {
        Ok(())
    }
}

impl fmt::Display for FormulaDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sub = |g: &Formula| FormulaDisplay { f: g, vars: self.vars }.to_string();
        match self.f {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Bool(v) => f.write_str(self.vars.name(*v)),
            Formula::Atom(a) => {
                // Real variables on the left, parameters and the constant on the right.
                let real = |v: &VarId| self.vars.kind(*v).is_real();
                let any_real = a.expr.vars().any(|v| real(&v));
                let mut lhs = Vec::new();
                let mut rhs = Vec::new();
                for (v, c) in &a.expr.coeffs {
                    let name = self.vars.name(*v).to_string();
                    if real(v) || !any_real {
                        lhs.push((name, *c));
                    } else {
                        rhs.push((name, -*c));
                    }
                }
                write_sum(f, &lhs, Rat::zero())?;
                write!(f, " {} ", a.rel.symbol())?;
                write_sum(f, &rhs, -a.expr.constant)
            }
            Formula::Not(g) => write!(f, "!({})", sub(g)),
            Formula::And(fs) | Formula::Or(fs) => {
                let op = if matches!(self.f, Formula::And(_)) { " & " } else { " | " };
                f.write_str("(")?;
                for (i, g) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(op)?;
                    }
                    write!(f, "{}", sub(g))?;
                }
                f.write_str(")")
            }
            Formula::Implies(a, b) => write!(f, "({} -> {})", sub(a), sub(b)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (Vars, VarId, VarId, VarId) {
        let mut vars = Vars::new();
        let t = vars.declare("t1", VarKind::Clock);
        let ts = vars.declare("ts1", VarKind::Clock);
        let eta = vars.declare("eta1", VarKind::Param { lo: 0, hi: 30 });
        (vars, t, ts, eta)
    }

    #[test]
    fn display_puts_params_right() {
        let (vars, t, ts, eta) = setup();
        let f = Formula::atom(
            LinExpr::var(ts) - LinExpr::var(t),
            Rel::Ge,
            LinExpr::var(eta),
        );
        assert_eq!(f.display(&vars).to_string(), "-t1 + ts1 >= eta1");
    }

    #[test]
    fn canonical_identifies_equivalent_atoms() {
        let (_, t, ts, eta) = setup();
        let a = Formula::atom(LinExpr::var(ts) - LinExpr::var(t), Rel::Ge, LinExpr::var(eta));
        let b = Formula::not(Formula::atom(
            LinExpr::var(t).scale(int(2)) + LinExpr::var(eta).scale(int(2)),
            Rel::Gt,
            LinExpr::var(ts).scale(int(2)),
        ));
        assert_eq!(a.canonical(), b.canonical());
    }

    #[test]
    fn constant_folding() {
        assert_eq!(Formula::atom(LinExpr::int(2), Rel::Le, LinExpr::int(3)), Formula::True);
        assert_eq!(Formula::and([Formula::True, Formula::False]), Formula::False);
        assert_eq!(Formula::or(Vec::<Formula>::new()), Formula::False);
    }

    #[test]
    fn three_valued_eval() {
        let (_, t, _, eta) = setup();
        let f = Formula::or([
            Formula::atom(LinExpr::var(t), Rel::Le, LinExpr::int(3)),
            Formula::atom(LinExpr::var(eta), Rel::Ge, LinExpr::int(1)),
        ]);
        let mut a = Assignment::default();
        assert_eq!(f.eval(&a), None);
        a.set(eta, Val::Num(int(2)));
        assert_eq!(f.eval(&a), Some(true));
        a.set(eta, Val::Num(int(0)));
        assert_eq!(f.eval(&a), None);
        assert_eq!(
            f.substitute(&a),
            Formula::atom(LinExpr::var(t), Rel::Le, LinExpr::int(3))
        );
    }
}
