//! Difference bound matrices over clocks `1..n` and the zero reference `0`.
//!
//! Entry `(i, j)` bounds `x_i - x_j`. Bounds are packed as `value << 1 | weak`
//! so that the integer order matches the bound order.

use std::fmt;

pub type Bound = i64;

pub const INF: Bound = i64::MAX;
pub const LE_ZERO: Bound = 1;
pub const LT_ZERO: Bound = 0;

pub fn le(v: i64) -> Bound {
    (v << 1) | 1
}

pub fn lt(v: i64) -> Bound {
    v << 1
}

pub fn value(b: Bound) -> i64 {
    b >> 1
}

pub fn is_weak(b: Bound) -> bool {
    b & 1 == 1
}

pub fn add(a: Bound, b: Bound) -> Bound {
    if a == INF || b == INF {
        INF
    } else {
        ((value(a) + value(b)) << 1) | (a & b & 1)
    }
}

/// The complement of `x_i - x_j ≺ b`, as a bound on `x_j - x_i`.
pub fn negate(b: Bound) -> Bound {
    debug_assert!(b != INF);
    ((-value(b)) << 1) | (1 - (b & 1))
}

fn fmt_bound(b: Bound) -> String {
    if b == INF {
        "<inf".into()
    } else {
        format!("{}{}", if is_weak(b) { "<=" } else { "<" }, value(b))
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dbm {
    dim: usize,
    m: Vec<Bound>,
}

impl fmt::Debug for Dbm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Dbm[{}]", self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim).map(|j| fmt_bound(self.get(i, j))).collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        Ok(())
    }
}

impl Dbm {
    /// All clocks equal to zero.
    pub fn zero(clocks: usize) -> Self {
        let dim = clocks + 1;
        Dbm {
            dim,
            m: vec![LE_ZERO; dim * dim],
        }
    }

    /// All nonnegative clock valuations.
    pub fn universe(clocks: usize) -> Self {
        let dim = clocks + 1;
        let mut m = vec![INF; dim * dim];
        for i in 0..dim {
            m[i * dim + i] = LE_ZERO;
            m[i] = LE_ZERO;
        }
        Dbm { dim, m }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Bound {
        self.m[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, b: Bound) {
        self.m[i * self.dim + j] = b;
    }

    /// Floyd–Warshall closure. Returns `false` if the zone is empty.
    pub fn canonicalize(&mut self) -> bool {
        let n = self.dim;
        for k in 0..n {
            for i in 0..n {
                let ik = self.m[i * n + k];
                if ik == INF {
                    continue;
                }
                for j in 0..n {
                    let c = add(ik, self.m[k * n + j]);
                    if c < self.m[i * n + j] {
                        self.m[i * n + j] = c;
                    }
                }
            }
        }
        !self.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        (0..self.dim).any(|i| self.get(i, i) < LE_ZERO)
    }

    /// Adds `x_i - x_j ≺ b` and re-closes. Returns `false` if the result is empty.
    pub fn constrain(&mut self, i: usize, j: usize, b: Bound) -> bool {
        if b >= self.get(i, j) {
            return !self.is_empty();
        }
        if add(b, self.get(j, i)) < LE_ZERO {
            self.set(i, i, LT_ZERO);
            return false;
        }
        self.set(i, j, b);
        let n = self.dim;
        // Only paths through the new edge can improve.
        for a in 0..n {
            let ai = self.get(a, i);
            if ai == INF {
                continue;
            }
            for c in 0..n {
                let via = add(add(ai, b), self.get(j, c));
                if via < self.get(a, c) {
                    self.set(a, c, via);
                }
            }
        }
        !self.is_empty()
    }

    /// Lets time elapse without bound.
    pub fn up(&mut self) {
        for i in 1..self.dim {
            self.set(i, 0, INF);
        }
    }

    /// All valuations from which some delay leads into the zone.
    pub fn down(&mut self) {
        for j in 1..self.dim {
            let mut b = LE_ZERO;
            for i in 1..self.dim {
                b = b.min(self.get(i, j));
            }
            self.set(0, j, b);
        }
    }

    pub fn reset(&mut self, x: usize) {
        for j in 0..self.dim {
            self.set(x, j, self.get(0, j));
            self.set(j, x, self.get(j, 0));
        }
        self.set(x, x, LE_ZERO);
    }

    /// `other ⊆ self`, for canonical matrices.
    pub fn includes(&self, other: &Dbm) -> bool {
        self.m.iter().zip(&other.m).all(|(a, b)| a >= b)
    }

    pub fn intersect(&mut self, other: &Dbm) -> bool {
        for i in 0..self.dim {
            for j in 0..self.dim {
                let b = other.get(i, j);
                if b < self.get(i, j) && !self.constrain(i, j, b) {
                    return false;
                }
            }
        }
        !self.is_empty()
    }

    /// Maximal-constant extrapolation; `k[0]` must be 0.
    pub fn extrapolate(&mut self, k: &[i64]) {
        let n = self.dim;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let b = self.get(i, j);
                if b == INF {
                    continue;
                }
                if i != 0 && b > le(k[i]) {
                    self.set(i, j, INF);
                } else if b < lt(-k[j]) {
                    self.set(i, j, lt(-k[j]));
                }
            }
        }
        self.canonicalize();
    }

    /// `self \ other` as a list of disjoint canonical zones.
    pub fn subtract(&self, other: &Dbm) -> Vec<Dbm> {
        let mut probe = self.clone();
        if !probe.intersect(other) {
            return vec![self.clone()];
        }
        let mut out = Vec::new();
        let mut rest = self.clone();
        for i in 0..self.dim {
            for j in 0..self.dim {
                let b = other.get(i, j);
                if i == j || b == INF || b >= rest.get(i, j) {
                    continue;
                }
                let mut piece = rest.clone();
                if piece.constrain(j, i, negate(b)) {
                    out.push(piece);
                }
                if !rest.constrain(i, j, b) {
                    return out;
                }
            }
        }
        out
    }

    /// Whether the zone contains the point `v` (clock values, index 0 is the reference).
    pub fn contains(&self, v: &[crate::rational::Rat]) -> bool {
        use crate::rational::Rat;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let b = self.get(i, j);
                if b == INF || i == j {
                    continue;
                }
                let d = v[i] - v[j];
                let k = Rat::from_integer(value(b) as i128);
                if d > k || (d == k && !is_weak(b)) {
                    return false;
                }
            }
        }
        true
    }

    /// Interval of clock `x`: lower bound, and upper bound if finite.
    pub fn range(&self, x: usize) -> (Bound, Bound) {
        (self.get(0, x), self.get(x, 0))
    }
}

/// `zone ⊆ ⋃ cover`.
pub fn covered(zone: &Dbm, cover: &[Dbm]) -> bool {
    let mut left = vec![zone.clone()];
    for c in cover {
        left = left.iter().flat_map(|z| z.subtract(c)).collect();
        if left.is_empty() {
            return true;
        }
    }
    left.is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_order() {
        assert!(lt(3) < le(3));
        assert!(le(2) < lt(3));
        assert_eq!(add(le(2), lt(3)), lt(5));
        assert_eq!(add(le(2), le(-3)), le(-1));
        assert_eq!(negate(le(3)), lt(-3));
        assert_eq!(negate(lt(3)), le(-3));
    }

    #[test]
    fn delay_and_guard() {
        let mut z = Dbm::zero(1);
        z.up();
        assert!(z.constrain(1, 0, le(1)));
        assert!(!z.clone().constrain(0, 1, le(-2)));
        assert!(z.constrain(0, 1, lt(0)));
        assert_eq!(z.range(1), (lt(0), le(1)));
    }

    #[test]
    fn reset_keeps_difference() {
        let mut z = Dbm::zero(2);
        z.up();
        z.constrain(0, 1, le(-3));
        z.reset(2);
        z.up();
        assert_eq!(z.get(1, 2), INF);
        assert_eq!(z.get(2, 1), le(-3));
        assert!(z.constrain(2, 0, le(1)));
        assert_eq!(z.get(1, 0), INF);
        assert_eq!(z.get(0, 1), le(-3));
    }

    #[test]
    fn subtraction_covers() {
        let mut a = Dbm::universe(1);
        a.constrain(1, 0, le(10));
        let mut lo = a.clone();
        lo.constrain(1, 0, le(4));
        let mut hi = a.clone();
        hi.constrain(0, 1, lt(-4));
        assert!(covered(&a, &[lo.clone(), hi.clone()]));
        let mut hi2 = a.clone();
        hi2.constrain(0, 1, le(-5));
        assert!(!covered(&a, &[lo, hi2]));
    }

    #[test]
    fn down_reaches_back() {
        let mut z = Dbm::universe(2);
        z.constrain(0, 1, le(-5));
        z.down();
        assert_eq!(z.get(0, 1), LE_ZERO);
    }
}
