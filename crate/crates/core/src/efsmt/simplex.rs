//! Bounded simplex over delta-rationals (strict bounds as `c ± δ`), used as
//! the linear-real theory of the SAT solver.

use std::cmp::Ordering;
use std::ops::{Add, Mul, Sub};

use num_traits::{One, Signed, Zero};

use super::sat::{Lit, Theory};
use crate::rational::Rat;

/// `r + d·δ` for an infinitesimal `δ > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DeltaRat {
    pub r: Rat,
    pub d: Rat,
}

impl DeltaRat {
    pub fn new(r: Rat, d: Rat) -> Self {
        DeltaRat { r, d }
    }

    pub fn real(r: Rat) -> Self {
        DeltaRat { r, d: Rat::zero() }
    }

    pub fn zero() -> Self {
        Self::real(Rat::zero())
    }

    /// `self + δ`.
    pub fn bump(self) -> Self {
        DeltaRat {
            r: self.r,
            d: self.d + Rat::one(),
        }
    }

    pub fn scale(self, k: Rat) -> Self {
        DeltaRat {
            r: self.r * k,
            d: self.d * k,
        }
    }
}

impl PartialOrd for DeltaRat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DeltaRat {
    fn cmp(&self, other: &Self) -> Ordering {
        self.r.cmp(&other.r).then(self.d.cmp(&other.d))
    }
}

impl Add for DeltaRat {
    type Output = DeltaRat;
    fn add(self, o: DeltaRat) -> DeltaRat {
        DeltaRat {
            r: self.r + o.r,
            d: self.d + o.d,
        }
    }
}

impl Sub for DeltaRat {
    type Output = DeltaRat;
    fn sub(self, o: DeltaRat) -> DeltaRat {
        DeltaRat {
            r: self.r - o.r,
            d: self.d - o.d,
        }
    }
}

impl Mul<Rat> for DeltaRat {
    type Output = DeltaRat;
    fn mul(self, k: Rat) -> DeltaRat {
        self.scale(k)
    }
}

#[derive(Debug, Clone, Copy)]
struct Bound {
    value: DeltaRat,
    reason: Lit,
}

/// A theory atom `var ≤ bound` attached to a SAT variable. The negated
/// literal asserts `var ≥ bound + δ`.
#[derive(Debug, Clone, Copy)]
pub struct BoundAtom {
    pub var: usize,
    pub bound: DeltaRat,
}

enum Undo {
    Lower(usize, Option<Bound>),
    Upper(usize, Option<Bound>),
}

pub struct Simplex {
    n: usize,
    /// `rows[r]`: coefficients of the basic variable `basic[r]` over all columns.
    rows: Vec<Vec<Rat>>,
    basic: Vec<usize>,
    /// Row of a basic variable, `None` for nonbasic ones.
    row_of: Vec<Option<usize>>,
    lower: Vec<Option<Bound>>,
    upper: Vec<Option<Bound>>,
    value: Vec<DeltaRat>,
    atoms: Vec<Option<BoundAtom>>,
    undo: Vec<Undo>,
    level_marks: Vec<usize>,
    pub pivots: u64,
}

impl Simplex {
    /// `n_orig` original variables, all initially nonbasic at 0.
    pub fn new(n_orig: usize) -> Self {
        Simplex {
            n: n_orig,
            rows: Vec::new(),
            basic: Vec::new(),
            row_of: vec![None; n_orig],
            lower: vec![None; n_orig],
            upper: vec![None; n_orig],
            value: vec![DeltaRat::zero(); n_orig],
            atoms: Vec::new(),
            undo: Vec::new(),
            level_marks: Vec::new(),
            pivots: 0,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    /// Adds a slack variable `s = Σ coeff·x` over original variables and returns its index.
    pub fn add_slack(&mut self, terms: &[(usize, Rat)]) -> usize {
        let s = self.n;
        self.n += 1;
        for r in &mut self.rows {
            r.push(Rat::zero());
        }
        let mut row = vec![Rat::zero(); self.n];
        let mut val = DeltaRat::zero();
        for (x, c) in terms {
            match self.row_of[*x] {
                None => row[*x] += *c,
                Some(r) => {
                    for j in 0..self.n - 1 {
                        let a = self.rows[r][j];
                        if !a.is_zero() {
                            row[j] += *c * a;
                        }
                    }
                }
            }
            val = val + self.value[*x].scale(*c);
        }
        self.rows.push(row);
        self.basic.push(s);
        self.row_of.push(Some(self.rows.len() - 1));
        self.lower.push(None);
        self.upper.push(None);
        self.value.push(val);
        s
    }

    /// Registers the atom carried by SAT variable `sat_var`.
    pub fn set_atom(&mut self, sat_var: usize, atom: BoundAtom) {
        if self.atoms.len() <= sat_var {
            self.atoms.resize(sat_var + 1, None);
        }
        self.atoms[sat_var] = Some(atom);
    }

    pub fn value(&self, x: usize) -> DeltaRat {
        self.value[x]
    }

    fn update_nonbasic(&mut self, x: usize, v: DeltaRat) {
        let diff = v - self.value[x];
        for r in 0..self.rows.len() {
            let a = self.rows[r][x];
            if !a.is_zero() {
                let b = self.basic[r];
                self.value[b] = self.value[b] + diff.scale(a);
            }
        }
        self.value[x] = v;
    }

    fn pivot(&mut self, r: usize, xj: usize) {
        self.pivots += 1;
        let xi = self.basic[r];
        let a = self.rows[r][xj];
        let inv = a.recip();
        // Row for xj: xj = (xi - Σ_{k≠j} a_k x_k) / a.
        let mut new_row: Vec<Rat> = self.rows[r].iter().map(|c| -*c * inv).collect();
        new_row[xj] = Rat::zero();
        new_row[xi] = inv;
        for k in 0..self.rows.len() {
            if k == r {
                continue;
            }
            let c = self.rows[k][xj];
            if c.is_zero() {
                continue;
            }
            let row = &mut self.rows[k];
            row[xj] = Rat::zero();
            for (j, nv) in new_row.iter().enumerate() {
                if !nv.is_zero() {
                    row[j] += c * *nv;
                }
            }
        }
        self.rows[r] = new_row;
        self.basic[r] = xj;
        self.row_of[xj] = Some(r);
        self.row_of[xi] = None;
    }

    fn pivot_and_update(&mut self, r: usize, xj: usize, v: DeltaRat) {
        let xi = self.basic[r];
        let a = self.rows[r][xj];
        let theta = (v - self.value[xi]).scale(a.recip());
        self.value[xi] = v;
        self.value[xj] = self.value[xj] + theta;
        for k in 0..self.rows.len() {
            if k != r {
                let c = self.rows[k][xj];
                if !c.is_zero() {
                    let b = self.basic[k];
                    self.value[b] = self.value[b] + theta.scale(c);
                }
            }
        }
        self.pivot(r, xj);
    }

    fn assert_upper(&mut self, x: usize, v: DeltaRat, reason: Lit) -> Result<(), Vec<Lit>> {
        if self.upper[x].is_some_and(|u| u.value <= v) {
            return Ok(());
        }
        if let Some(l) = self.lower[x] {
            if v < l.value {
                return Err(vec![l.reason, reason]);
            }
        }
        self.undo.push(Undo::Upper(x, self.upper[x]));
        self.upper[x] = Some(Bound { value: v, reason });
        if self.row_of[x].is_none() && self.value[x] > v {
            self.update_nonbasic(x, v);
        }
        Ok(())
    }

    fn assert_lower(&mut self, x: usize, v: DeltaRat, reason: Lit) -> Result<(), Vec<Lit>> {
        if self.lower[x].is_some_and(|l| l.value >= v) {
            return Ok(());
        }
        if let Some(u) = self.upper[x] {
            if v > u.value {
                return Err(vec![u.reason, reason]);
            }
        }
        self.undo.push(Undo::Lower(x, self.lower[x]));
        self.lower[x] = Some(Bound { value: v, reason });
        if self.row_of[x].is_none() && self.value[x] < v {
            self.update_nonbasic(x, v);
        }
        Ok(())
    }

    fn below_lower(&self, x: usize) -> bool {
        self.lower[x].is_some_and(|l| self.value[x] < l.value)
    }

    fn above_upper(&self, x: usize) -> bool {
        self.upper[x].is_some_and(|u| self.value[x] > u.value)
    }

    fn can_increase(&self, x: usize) -> bool {
        self.upper[x].is_none_or(|u| self.value[x] < u.value)
    }

    fn can_decrease(&self, x: usize) -> bool {
        self.lower[x].is_none_or(|l| self.value[x] > l.value)
    }

    /// Restores feasibility of basic variables (Bland's rule).
    pub fn check_feasible(&mut self) -> Result<(), Vec<Lit>> {
        loop {
            let mut viol: Option<(usize, usize)> = None;
            for (r, &b) in self.basic.iter().enumerate() {
                if (self.below_lower(b) || self.above_upper(b)) && viol.is_none_or(|(_, vb)| b < vb) {
                    viol = Some((r, b));
                }
            }
            let Some((r, xi)) = viol else {
                return Ok(());
            };
            let increase = self.below_lower(xi);
            let mut pick: Option<usize> = None;
            for j in 0..self.n {
                let a = self.rows[r][j];
                if a.is_zero() || j == xi {
                    continue;
                }
                let ok = if increase == a.is_positive() {
                    self.can_increase(j)
                } else {
                    self.can_decrease(j)
                };
                if ok {
                    pick = Some(j);
                    break;
                }
            }
            match pick {
                Some(xj) => {
                    let target = if increase {
                        self.lower[xi].unwrap().value
                    } else {
                        self.upper[xi].unwrap().value
                    };
                    self.pivot_and_update(r, xj, target);
                }
                None => {
                    let mut expl = Vec::new();
                    if increase {
                        expl.push(self.lower[xi].unwrap().reason);
                    } else {
                        expl.push(self.upper[xi].unwrap().reason);
                    }
                    for j in 0..self.n {
                        let a = self.rows[r][j];
                        if a.is_zero() || j == xi {
                            continue;
                        }
                        let b = if increase == a.is_positive() {
                            self.upper[j]
                        } else {
                            self.lower[j]
                        };
                        expl.push(b.expect("blocking bound").reason);
                    }
                    return Err(expl);
                }
            }
        }
    }

    fn all_within_bounds(&self) -> bool {
        (0..self.n).all(|x| !self.below_lower(x) && !self.above_upper(x))
    }

    /// Moves nonbasic variables sitting on a strict bound onto a non-strict
    /// bound whenever that keeps every bound satisfied; yields vertex-like,
    /// infinitesimal-free models where possible.
    pub fn snap_strict(&mut self, vars: &[usize]) {
        for &x in vars {
            if self.row_of[x].is_some() || self.value[x].d.is_zero() {
                continue;
            }
            let old = self.value[x];
            let at_lower = self.lower[x].is_some_and(|l| l.value == old);
            let mut candidates = Vec::new();
            let up = self.upper[x].filter(|u| u.value.d.is_zero()).map(|u| u.value);
            let lo = self.lower[x].filter(|l| l.value.d.is_zero()).map(|l| l.value);
            if at_lower {
                candidates.extend(up);
                candidates.extend(lo);
            } else {
                candidates.extend(lo);
                candidates.extend(up);
            }
            for c in candidates {
                self.update_nonbasic(x, c);
                if self.all_within_bounds() {
                    break;
                }
                self.update_nonbasic(x, old);
            }
        }
    }

    /// A concrete `δ` small enough to satisfy every bound.
    pub fn concrete_delta(&self) -> Rat {
        let mut delta = Rat::one();
        for x in 0..self.n {
            let v = self.value[x];
            if let Some(l) = self.lower[x] {
                // l.r + l.d·δ ≤ v.r + v.d·δ
                if l.value.r < v.r && l.value.d > v.d {
                    delta = delta.min((v.r - l.value.r) / (l.value.d - v.d));
                }
            }
            if let Some(u) = self.upper[x] {
                if v.r < u.value.r && v.d > u.value.d {
                    delta = delta.min((u.value.r - v.r) / (v.d - u.value.d));
                }
            }
        }
        if delta.is_positive() {
            delta / Rat::from_integer(2)
        } else {
            Rat::one()
        }
    }

    pub fn concrete_value(&self, x: usize, delta: Rat) -> Rat {
        let v = self.value[x];
        v.r + v.d * delta
    }
}

impl Theory for Simplex {
    fn is_theory_var(&self, var: usize) -> bool {
        self.atoms.get(var).is_some_and(|a| a.is_some())
    }

    fn assert_lit(&mut self, lit: Lit) -> Result<(), Vec<Lit>> {
        let atom = self.atoms[lit.var()].expect("theory atom");
        if lit.positive() {
            self.assert_upper(atom.var, atom.bound, lit)
        } else {
            self.assert_lower(atom.var, atom.bound.bump(), lit)
        }
    }

    fn check(&mut self) -> Result<(), Vec<Lit>> {
        self.check_feasible()
    }

    fn push_level(&mut self) {
        self.level_marks.push(self.undo.len());
    }

    fn pop_to_level(&mut self, level: usize) {
        if level >= self.level_marks.len() {
            return;
        }
        let mark = self.level_marks[level];
        while self.undo.len() > mark {
            match self.undo.pop().unwrap() {
                Undo::Lower(x, b) => self.lower[x] = b,
                Undo::Upper(x, b) => self.upper[x] = b,
            }
        }
        self.level_marks.truncate(level);
    }
}
