//! LTL over an interaction alphabet: parsing, negation normal form and
//! translation to Büchi automata.

mod buchi;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub use buchi::{ltl_to_buchi, postprocess_alphabet, BuchiAutomaton, BuchiEdge, Label, HASH};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LtlError {
    #[error("LTL parse error at offset {pos}: {message}")]
    Parse { pos: usize, message: String },
    #[error("LTL atom {0} is not an interaction of the system")]
    UnknownAtom(String),
}

/// LTL formula. After [`Ltl::nnf`] only `True`, `False`, `Atom`, `Not(Atom)`,
/// `And`, `Or`, `Next`, `Until` and `Release` remain.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ltl {
    True,
    False,
    Atom(String),
    Not(Box<Ltl>),
    And(Box<Ltl>, Box<Ltl>),
    Or(Box<Ltl>, Box<Ltl>),
    Implies(Box<Ltl>, Box<Ltl>),
    Next(Box<Ltl>),
    Finally(Box<Ltl>),
    Globally(Box<Ltl>),
    Until(Box<Ltl>, Box<Ltl>),
    Release(Box<Ltl>, Box<Ltl>),
}

fn b(f: Ltl) -> Box<Ltl> {
    Box::new(f)
}

impl Ltl {
    pub fn atom(s: &str) -> Ltl {
        Ltl::Atom(s.to_string())
    }

    pub fn not(f: Ltl) -> Ltl {
        Ltl::Not(b(f))
    }

    pub fn and(x: Ltl, y: Ltl) -> Ltl {
        Ltl::And(b(x), b(y))
    }

    pub fn or(x: Ltl, y: Ltl) -> Ltl {
        Ltl::Or(b(x), b(y))
    }

    pub fn implies(x: Ltl, y: Ltl) -> Ltl {
        Ltl::Implies(b(x), b(y))
    }

    pub fn next(f: Ltl) -> Ltl {
        Ltl::Next(b(f))
    }

    pub fn finally(f: Ltl) -> Ltl {
        Ltl::Finally(b(f))
    }

    pub fn globally(f: Ltl) -> Ltl {
        Ltl::Globally(b(f))
    }

    pub fn until(x: Ltl, y: Ltl) -> Ltl {
        Ltl::Until(b(x), b(y))
    }

    pub fn release(x: Ltl, y: Ltl) -> Ltl {
        Ltl::Release(b(x), b(y))
    }

    /// Atom names, sorted.
    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Ltl::True | Ltl::False => {}
            Ltl::Atom(a) => {
                out.insert(a.clone());
            }
            Ltl::Not(f) | Ltl::Next(f) | Ltl::Finally(f) | Ltl::Globally(f) => f.collect_atoms(out),
            Ltl::And(x, y) | Ltl::Or(x, y) | Ltl::Implies(x, y) | Ltl::Until(x, y) | Ltl::Release(x, y) => {
                x.collect_atoms(out);
                y.collect_atoms(out);
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Ltl::True | Ltl::False | Ltl::Atom(_) => 1,
            Ltl::Not(f) | Ltl::Next(f) | Ltl::Finally(f) | Ltl::Globally(f) => 1 + f.size(),
            Ltl::And(x, y) | Ltl::Or(x, y) | Ltl::Implies(x, y) | Ltl::Until(x, y) | Ltl::Release(x, y) => {
                1 + x.size() + y.size()
            }
        }
    }

    /// Checks that every atom names one of `alphabet`.
    pub fn check_atoms<'a>(&self, alphabet: impl IntoIterator<Item = &'a str>) -> Result<(), LtlError> {
        let known: BTreeSet<&str> = alphabet.into_iter().collect();
        match self.atoms().into_iter().find(|a| !known.contains(a.as_str())) {
            Some(a) => Err(LtlError::UnknownAtom(a)),
            None => Ok(()),
        }
    }

    /// Negation normal form with `F`/`G` rewritten to `U`/`R`.
    pub fn nnf(&self) -> Ltl {
        simplify(&self.nnf_pol(true))
    }

    fn nnf_pol(&self, pos: bool) -> Ltl {
        match self {
            Ltl::True => if pos { Ltl::True } else { Ltl::False },
            Ltl::False => if pos { Ltl::False } else { Ltl::True },
            Ltl::Atom(_) => {
                if pos {
                    self.clone()
                } else {
                    Ltl::not(self.clone())
                }
            }
            Ltl::Not(f) => f.nnf_pol(!pos),
            Ltl::And(x, y) => {
                if pos {
                    Ltl::and(x.nnf_pol(true), y.nnf_pol(true))
                } else {
                    Ltl::or(x.nnf_pol(false), y.nnf_pol(false))
                }
            }
            Ltl::Or(x, y) => {
                if pos {
                    Ltl::or(x.nnf_pol(true), y.nnf_pol(true))
                } else {
                    Ltl::and(x.nnf_pol(false), y.nnf_pol(false))
                }
            }
            Ltl::Implies(x, y) => {
                if pos {
                    Ltl::or(x.nnf_pol(false), y.nnf_pol(true))
                } else {
                    Ltl::and(x.nnf_pol(true), y.nnf_pol(false))
                }
            }
            Ltl::Next(f) => Ltl::next(f.nnf_pol(pos)),
            Ltl::Finally(f) => {
                if pos {
                    Ltl::until(Ltl::True, f.nnf_pol(true))
                } else {
                    Ltl::release(Ltl::False, f.nnf_pol(false))
                }
            }
            Ltl::Globally(f) => {
                if pos {
                    Ltl::release(Ltl::False, f.nnf_pol(true))
                } else {
                    Ltl::until(Ltl::True, f.nnf_pol(false))
                }
            }
            Ltl::Until(x, y) => {
                if pos {
                    Ltl::until(x.nnf_pol(true), y.nnf_pol(true))
                } else {
                    Ltl::release(x.nnf_pol(false), y.nnf_pol(false))
                }
            }
            Ltl::Release(x, y) => {
                if pos {
                    Ltl::release(x.nnf_pol(true), y.nnf_pol(true))
                } else {
                    Ltl::until(x.nnf_pol(false), y.nnf_pol(false))
                }
            }
        }
    }
}

/// Merges `F x ∨ F y` into `F (x ∨ y)` and `G x ∧ G y` into `G (x ∧ y)`, and
/// folds Boolean constants.
fn simplify(f: &Ltl) -> Ltl {
    match f {
        Ltl::Or(x, y) => match (simplify(x), simplify(y)) {
            (Ltl::True, _) | (_, Ltl::True) => Ltl::True,
            (Ltl::False, o) | (o, Ltl::False) => o,
            (Ltl::Until(t1, a), Ltl::Until(t2, c)) if *t1 == Ltl::True && *t2 == Ltl::True => {
                Ltl::until(Ltl::True, simplify(&Ltl::or(*a, *c)))
            }
            (x, y) => Ltl::or(x, y),
        },
        Ltl::And(x, y) => match (simplify(x), simplify(y)) {
            (Ltl::False, _) | (_, Ltl::False) => Ltl::False,
            (Ltl::True, o) | (o, Ltl::True) => o,
            (Ltl::Release(f1, a), Ltl::Release(f2, c)) if *f1 == Ltl::False && *f2 == Ltl::False => {
                Ltl::release(Ltl::False, simplify(&Ltl::and(*a, *c)))
            }
            (x, y) => Ltl::and(x, y),
        },
        Ltl::Next(x) => Ltl::next(simplify(x)),
        Ltl::Until(x, y) => match simplify(y) {
            Ltl::True => Ltl::True,
            Ltl::False => Ltl::False,
            y => Ltl::until(simplify(x), y),
        },
        Ltl::Release(x, y) => match simplify(y) {
            Ltl::True => Ltl::True,
            Ltl::False => Ltl::False,
            y => Ltl::release(simplify(x), y),
        },
        other => other.clone(),
    }
}

impl fmt::Display for Ltl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ltl::True => f.write_str("true"),
            Ltl::False => f.write_str("false"),
            Ltl::Atom(a) => f.write_str(a),
            Ltl::Not(x) => write!(f, "!{x}"),
            Ltl::And(x, y) => write!(f, "({x} & {y})"),
            Ltl::Or(x, y) => write!(f, "({x} | {y})"),
            Ltl::Implies(x, y) => write!(f, "({x} -> {y})"),
            Ltl::Next(x) => write!(f, "X {x}"),
            Ltl::Finally(x) => write!(f, "F {x}"),
            Ltl::Globally(x) => write!(f, "G {x}"),
            Ltl::Until(x, y) => write!(f, "({x} U {y})"),
            Ltl::Release(x, y) => write!(f, "({x} R {y})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Not,
    And,
    Or,
    Implies,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, LtlError> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |pos: usize, message: String| LtlError::Parse { pos, message };
    while i < chars.len() {
        let (pos, c) = chars[i];
        let peek = chars.get(i + 1).map(|x| x.1);
        match c {
            c if c.is_whitespace() => i += 1,
            '(' => {
                out.push((pos, Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push((pos, Tok::RParen));
                i += 1;
            }
            '!' | '~' | '¬' => {
                out.push((pos, Tok::Not));
                i += 1;
            }
            '&' | '∧' => {
                out.push((pos, Tok::And));
                i += if peek == Some('&') { 2 } else { 1 };
            }
            '|' | '∨' => {
                out.push((pos, Tok::Or));
                i += if peek == Some('|') { 2 } else { 1 };
            }
            '→' => {
                out.push((pos, Tok::Implies));
                i += 1;
            }
            '-' if peek == Some('>') => {
                out.push((pos, Tok::Implies));
                i += 2;
            }
            c if c.is_alphanumeric() || c == '_' => {
                let start = i;
                while i < chars.len() {
                    let ch = chars[i].1;
                    let next = chars.get(i + 1).map(|x| x.1);
                    let ok = ch.is_alphanumeric()
                        || ch == '_'
                        || ch == '.'
                        || (ch == '-' && next != Some('>') && next.is_some_and(|n| n.is_alphanumeric()));
                    if !ok {
                        break;
                    }
                    i += 1;
                }
                let word: String = chars[start..i].iter().map(|x| x.1).collect();
                out.push((pos, Tok::Ident(word)));
            }
            other => return Err(err(pos, format!("unexpected character '{other}'"))),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.0).unwrap_or(self.end)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, LtlError> {
        Err(LtlError::Parse {
            pos: self.offset(),
            message: message.into(),
        })
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(w)) if w == kw)
    }

    fn implication(&mut self) -> Result<Ltl, LtlError> {
        let lhs = self.disjunction()?;
        if self.peek() == Some(&Tok::Implies) {
            self.pos += 1;
            let rhs = self.implication()?;
            return Ok(Ltl::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Ltl, LtlError> {
        let mut acc = self.conjunction()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            acc = Ltl::or(acc, self.conjunction()?);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Ltl, LtlError> {
        let mut acc = self.until()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            acc = Ltl::and(acc, self.until()?);
        }
        Ok(acc)
    }

    fn until(&mut self) -> Result<Ltl, LtlError> {
        let lhs = self.unary()?;
        if self.is_keyword("U") {
            self.pos += 1;
            return Ok(Ltl::until(lhs, self.until()?));
        }
        if self.is_keyword("R") {
            self.pos += 1;
            return Ok(Ltl::release(lhs, self.until()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Ltl, LtlError> {
        match self.peek().cloned() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(Ltl::not(self.unary()?))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.implication()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.error("expected ')'");
                }
                self.pos += 1;
                Ok(f)
            }
            Some(Tok::Ident(w)) => {
                self.pos += 1;
                match w.as_str() {
                    "X" => Ok(Ltl::next(self.unary()?)),
                    "F" => Ok(Ltl::finally(self.unary()?)),
                    "G" => Ok(Ltl::globally(self.unary()?)),
                    "true" => Ok(Ltl::True),
                    "false" => Ok(Ltl::False),
                    "U" | "R" => {
                        self.pos -= 1;
                        self.error(format!("binary operator {w} without left operand"))
                    }
                    _ => Ok(Ltl::Atom(w)),
                }
            }
            Some(t) => self.error(format!("unexpected token {t:?}")),
            None => self.error("unexpected end of formula"),
        }
    }
}

/// Parses an LTL formula. Precedence from tightest: `! X F G`, then `U`/`R`,
/// `&`, `|`, `->`; `->`, `U` and `R` associate to the right.
pub fn parse_ltl(text: &str) -> Result<Ltl, LtlError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
    };
    let f = p.implication()?;
    if p.pos != p.toks.len() {
        return p.error("trailing input");
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_prompt_property() {
        let f = parse_ltl("G(take1l -> X !take2l) & G(take2l -> X !take1l)").unwrap();
        let expected = Ltl::and(
            Ltl::globally(Ltl::implies(Ltl::atom("take1l"), Ltl::next(Ltl::not(Ltl::atom("take2l"))))),
            Ltl::globally(Ltl::implies(Ltl::atom("take2l"), Ltl::next(Ltl::not(Ltl::atom("take1l"))))),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn until_binds_tighter_than_and() {
        assert_eq!(parse_ltl("a U b").unwrap(), Ltl::until(Ltl::atom("a"), Ltl::atom("b")));
        assert_eq!(
            parse_ltl("a & b U c").unwrap(),
            Ltl::and(Ltl::atom("a"), Ltl::until(Ltl::atom("b"), Ltl::atom("c")))
        );
        assert_eq!(
            parse_ltl("a U b U c").unwrap(),
            Ltl::until(Ltl::atom("a"), Ltl::until(Ltl::atom("b"), Ltl::atom("c")))
        );
        assert_eq!(
            parse_ltl("a -> b -> c").unwrap(),
            Ltl::implies(Ltl::atom("a"), Ltl::implies(Ltl::atom("b"), Ltl::atom("c")))
        );
    }

    #[test]
    fn parses_packaging_property() {
        let f = parse_ltl("G(stackfull -> (!ship U stackavailable))").unwrap();
        assert_eq!(
            f,
            Ltl::globally(Ltl::implies(
                Ltl::atom("stackfull"),
                Ltl::until(Ltl::not(Ltl::atom("ship")), Ltl::atom("stackavailable"))
            ))
        );
    }

    #[test]
    fn hyphenated_identifiers() {
        assert_eq!(parse_ltl("occupy1-l->b").unwrap(), Ltl::implies(Ltl::atom("occupy1-l"), Ltl::atom("b")));
    }

    #[test]
    fn errors_carry_position() {
        match parse_ltl("a & (b | c") {
            Err(LtlError::Parse { pos, .. }) => assert_eq!(pos, 10),
            other => panic!("{other:?}"),
        }
        assert!(parse_ltl("U a").is_err());
        assert!(parse_ltl("a $ b").is_err());
    }

    #[test]
    fn nnf_merges_eventualities() {
        let f = parse_ltl("!(G(a -> X !b) & G(b -> X !a))").unwrap().nnf();
        let body = Ltl::or(
            Ltl::and(Ltl::atom("a"), Ltl::next(Ltl::atom("b"))),
            Ltl::and(Ltl::atom("b"), Ltl::next(Ltl::atom("a"))),
        );
        assert_eq!(f, Ltl::until(Ltl::True, body));
    }
}
