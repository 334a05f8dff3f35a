//! Parser for state properties, parameter constraints and objectives.
//!
//! ```text
//! prop  := imp
//! imp   := or ("->" imp)?
//! or    := and (("|" | "||") and)*
//! and   := unary (("&" | "&&") unary)*
//! unary := "!" unary | "(" prop ")" | "true" | "false" | cmp | flag
//! cmp   := expr rel expr        rel ∈ <= < >= > = ==
//! expr  := ["-"] term (("+" | "-") term)*
//! term  := num ["*" ident] | ident
//! ```
//!
//! Identifiers name clocks, parameters, location flags (`Comp.loc`, or a
//! bare location name when unique) and other declared variables.

use std::str::FromStr;

use super::formula::{Formula, LinExpr, Rel, VarId, VarKind};
use super::{ConstraintError, Ctx};
use crate::rational::Rat;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rat),
    Ident(String),
    Op(&'static str),
}

const OPS: [&str; 16] = [
    "->", "&&", "||", "<=", ">=", "==", "!", "&", "|", "(", ")", "<", ">", "=", "+", "-",
];

fn lex(text: &str) -> Result<Vec<Tok>, String> {
    let mut out = Vec::new();
    let b = text.as_bytes();
    let mut i = 0;
    'outer: while i < b.len() {
        let c = b[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
                i += 1;
            }
            out.push(Tok::Num(parse_decimal(&text[start..i])?));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_' || b[i] == b'.') {
                i += 1;
            }
            out.push(Tok::Ident(text[start..i].to_string()));
            continue;
        }
        if c == '*' {
            out.push(Tok::Op("*"));
            i += 1;
            continue;
        }
        for op in OPS {
            if text[i..].starts_with(op) {
                out.push(Tok::Op(op));
                i += op.len();
                continue 'outer;
            }
        }
        return Err(format!("unexpected character '{c}'"));
    }
    Ok(out)
}

fn parse_decimal(s: &str) -> Result<Rat, String> {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    let bad = || format!("bad number '{s}'");
    let mut v = Rat::from_integer(i128::from_str(int).map_err(|_| bad())?);
    if !frac.is_empty() {
        let digits = i128::from_str(frac).map_err(|_| bad())?;
        let den = 10i128.checked_pow(frac.len() as u32).ok_or_else(bad)?;
        v += Rat::new(digits, den);
    }
    Ok(v)
}

#[derive(Clone, Copy, PartialEq)]
enum Scope {
    State,
    Params,
}

struct Parser<'c, 'a> {
    ctx: &'c Ctx<'a>,
    toks: Vec<Tok>,
    pos: usize,
    scope: Scope,
}

enum Operand {
    Expr(LinExpr),
    Flag(VarId),
}

impl Parser<'_, '_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, op: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Op(o)) if *o == op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: &str) -> Result<(), String> {
        if self.eat(op) {
            Ok(())
        } else {
            Err(format!("expected '{op}'"))
        }
    }

    fn resolve(&self, name: &str) -> Result<Operand, String> {
        let vars = &self.ctx.vars;
        if let Some(id) = vars.id(name) {
            return match (self.scope, vars.kind(id)) {
                (_, VarKind::Param { .. }) => Ok(Operand::Expr(LinExpr::var(id))),
                (Scope::Params, _) => Err(format!("'{name}' is not a parameter")),
                (_, k) if k.is_bool() => Ok(Operand::Flag(id)),
                _ => Ok(Operand::Expr(LinExpr::var(id))),
            };
        }
        if self.scope == Scope::State {
            let hits: Vec<VarId> = vars
                .iter()
                .filter(|(_, info)| matches!(&info.kind, VarKind::LocFlag { location, .. } if location == name))
                .map(|(id, _)| id)
                .collect();
            match hits.len() {
                1 => return Ok(Operand::Flag(hits[0])),
                n if n > 1 => return Err(format!("location '{name}' is ambiguous; qualify it as Component.{name}")),
                _ => {}
            }
        }
        Err(format!("unknown name '{name}'"))
    }

    fn imp(&mut self) -> Result<Formula, String> {
        let lhs = self.or()?;
        if self.eat("->") {
            Ok(Formula::implies(lhs, self.imp()?))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<Formula, String> {
        let mut parts = vec![self.and()?];
        while self.eat("||") || self.eat("|") {
            parts.push(self.and()?);
        }
        Ok(Formula::or(parts))
    }

    fn and(&mut self) -> Result<Formula, String> {
        let mut parts = vec![self.unary()?];
        while self.eat("&&") || self.eat("&") {
            parts.push(self.unary()?);
        }
        Ok(Formula::and(parts))
    }

    fn unary(&mut self) -> Result<Formula, String> {
        if self.eat("!") {
            return Ok(Formula::not(self.unary()?));
        }
        if self.eat("(") {
            // A parenthesized expression may start a comparison: try the
            // proposition first, fall back to an arithmetic operand.
            let save = self.pos;
            if let Ok(f) = self.imp() {
                if self.eat(")") && !self.at_rel() {
                    return Ok(f);
                }
            }
            self.pos = save - 1;
            return self.cmp();
        }
        match self.peek() {
            Some(Tok::Ident(s)) if s == "true" => {
                self.pos += 1;
                Ok(Formula::True)
            }
            Some(Tok::Ident(s)) if s == "false" => {
                self.pos += 1;
                Ok(Formula::False)
            }
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                if let Ok(Operand::Flag(id)) = self.resolve(&s) {
                    self.pos += 1;
                    return Ok(Formula::var(id));
                }
                self.cmp()
            }
            _ => self.cmp(),
        }
    }

    fn at_rel(&self) -> bool {
        matches!(self.peek(), Some(Tok::Op(o)) if ["<=", "<", ">=", ">", "=", "=="].contains(o))
    }

    fn cmp(&mut self) -> Result<Formula, String> {
        let lhs = self.expr()?;
        let rel = match self.peek() {
            Some(Tok::Op("<=")) => Rel::Le,
            Some(Tok::Op("<")) => Rel::Lt,
            Some(Tok::Op(">=")) => Rel::Ge,
            Some(Tok::Op(">")) => Rel::Gt,
            Some(Tok::Op("=")) | Some(Tok::Op("==")) => Rel::Eq,
            _ => return Err("expected a comparison".into()),
        };
        self.pos += 1;
        let rhs = self.expr()?;
        Ok(Formula::atom(lhs, rel, rhs))
    }

    fn expr(&mut self) -> Result<LinExpr, String> {
        let mut e = if self.eat("-") { -self.term()? } else { self.term()? };
        loop {
            if self.eat("+") {
                e = e + self.term()?;
            } else if self.eat("-") {
                e = e - self.term()?;
            } else {
                return Ok(e);
            }
        }
    }

    fn term(&mut self) -> Result<LinExpr, String> {
        if self.eat("(") {
            let e = self.expr()?;
            self.expect(")")?;
            return Ok(e);
        }
        match self.peek().cloned() {
            Some(Tok::Num(k)) => {
                self.pos += 1;
                if self.eat("*") {
                    Ok(self.ident_expr()?.scale(k))
                } else {
                    Ok(LinExpr::constant(k))
                }
            }
            Some(Tok::Ident(_)) => self.ident_expr(),
            _ => Err("expected a number or a name".into()),
        }
    }

    fn ident_expr(&mut self) -> Result<LinExpr, String> {
        let Some(Tok::Ident(s)) = self.peek().cloned() else {
            return Err("expected a name".into());
        };
        self.pos += 1;
        match self.resolve(&s)? {
            Operand::Expr(e) => Ok(e),
            Operand::Flag(_) => Err(format!("'{s}' is a location, not a number")),
        }
    }

    fn finish<T>(&self, v: T) -> Result<T, String> {
        if self.pos == self.toks.len() {
            Ok(v)
        } else {
            Err(format!("unexpected trailing input at token {}", self.pos + 1))
        }
    }
}

fn run<T>(
    ctx: &Ctx,
    text: &str,
    scope: Scope,
    f: impl FnOnce(&mut Parser) -> Result<T, String>,
) -> Result<T, ConstraintError> {
    let err = |message: String| ConstraintError::Parse {
        text: text.to_string(),
        message,
    };
    let toks = lex(text).map_err(err)?;
    if toks.is_empty() {
        return Err(err("empty input".into()));
    }
    let mut p = Parser { ctx, toks, pos: 0, scope };
    let v = f(&mut p).map_err(err)?;
    p.finish(v).map_err(err)
}

/// A proposition over clocks, location flags and parameters.
pub fn parse_state(ctx: &Ctx, text: &str) -> Result<Formula, ConstraintError> {
    run(ctx, text, Scope::State, |p| p.imp())
}

/// A proposition over parameters only.
pub fn parse_param_constraint(ctx: &Ctx, text: &str) -> Result<Formula, ConstraintError> {
    run(ctx, text, Scope::Params, |p| p.imp())
}

/// A linear expression over parameters.
pub fn parse_param_expr(ctx: &Ctx, text: &str) -> Result<LinExpr, ConstraintError> {
    run(ctx, text, Scope::Params, |p| p.expr())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals() {
        assert_eq!(parse_decimal("2.5").unwrap(), Rat::new(5, 2));
        assert_eq!(parse_decimal("7").unwrap(), Rat::from_integer(7));
        assert!(parse_decimal("1.2.3").is_err());
    }

    #[test]
    fn lexing() {
        let t = lex("!(a.b <= 3*x) -> y>=1").unwrap();
        assert_eq!(t[0], Tok::Op("!"));
        assert_eq!(t[2], Tok::Ident("a.b".into()));
        assert!(t.contains(&Tok::Op("->")));
        assert!(lex("x # 1").is_err());
    }
}
