//! SMT-LIB v2 rendering of formulas and parsing of solver models.

use std::collections::BTreeSet;
use std::fmt::Write;

use num_traits::{One, Signed, Zero};

use crate::constraints::EfQuery;
use crate::constraints::formula::{Formula, Rel, Val, VarId, VarKind, Vars};
use crate::rational::{parse_rat, Rat};

fn symbol(name: &str) -> String {
    let plain = !name.is_empty()
        && !name.starts_with(|c: char| c.is_ascii_digit())
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c));
    if plain {
        name.to_string()
    } else {
        format!("|{}|", name.replace('|', "_"))
    }
}

fn number(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("(/ {} {})", r.numer(), r.denom())
    }
}

fn term(name: &str, mag: &Rat) -> String {
    if mag.is_one() {
        name.to_string()
    } else {
        format!("(* {} {})", number(mag), name)
    }
}

/// Renders `Σ terms + constant` as a difference of positive parts.
fn sum(terms: &[(String, Rat)], constant: Rat) -> String {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (n, c) in terms {
        if c.is_negative() {
            neg.push(term(n, &-*c));
        } else {
            pos.push(term(n, c));
        }
    }
    if constant.is_positive() {
        pos.push(number(&constant));
    } else if constant.is_negative() {
        neg.push(number(&-constant));
    }
    let head = match pos.len() {
        0 => "0".to_string(),
        1 => pos.pop().unwrap(),
        _ => format!("(+ {})", pos.join(" ")),
    };
    if neg.is_empty() {
        head
    } else {
        format!("(- {} {})", head, neg.join(" "))
    }
}

fn rel_op(r: Rel) -> &'static str {
    match r {
        Rel::Le => "<=",
        Rel::Lt => "<",
        Rel::Eq => "=",
        Rel::Ge => ">=",
        Rel::Gt => ">",
    }
}

/// Renders one formula as an SMT-LIB term. Atoms keep real variables on the
/// left and parameters with the constant on the right.
pub fn render(f: &Formula, vars: &Vars) -> String {
    match f {
        Formula::True => "true".into(),
        Formula::False => "false".into(),
        Formula::Bool(v) => symbol(vars.name(*v)),
        Formula::Atom(a) => {
            let real = |v: VarId| vars.kind(v).is_real();
            let any_real = a.expr.vars().any(real);
            let mut lhs = Vec::new();
            let mut rhs = Vec::new();
            for (v, c) in &a.expr.coeffs {
                let name = symbol(vars.name(*v));
                if real(*v) || !any_real {
                    lhs.push((name, *c));
                } else {
                    rhs.push((name, -*c));
                }
            }
            format!(
                "({} {} {})",
                rel_op(a.rel),
                sum(&lhs, Rat::zero()),
                sum(&rhs, -a.expr.constant)
            )
        }
        Formula::Not(g) => format!("(not {})", render(g, vars)),
        Formula::And(gs) | Formula::Or(gs) => {
            let op = if matches!(f, Formula::And(_)) { "and" } else { "or" };
            let mut s = format!("({op}");
            for g in gs {
                s.push(' ');
                s.push_str(&render(g, vars));
            }
            s.push(')');
            s
        }
        Formula::Implies(a, b) => format!("(=> {} {})", render(a, vars), render(b, vars)),
    }
}

/// Complete script asserting `f` with `check-sat` and `get-model`.
pub fn script(f: &Formula, vars: &Vars) -> String {
    let free: BTreeSet<VarId> = f.free_vars();
    let has_int = free.iter().any(|v| vars.kind(*v).is_int());
    let mut out = String::new();
    out.push_str("(set-option :produce-models true)\n");
    let logic = if has_int { "QF_LIRA" } else { "QF_LRA" };
    let _ = writeln!(out, "(set-logic {logic})");
    for v in &free {
        let _ = writeln!(out, "(declare-const {} {})", symbol(vars.name(*v)), sort(vars.kind(*v)));
    }
    for c in f.conjuncts() {
        let _ = writeln!(out, "(assert {})", render(c, vars));
    }
    out.push_str("(check-sat)\n(get-model)\n(exit)\n");
    out
}

fn sort(kind: &VarKind) -> &'static str {
    match kind {
        VarKind::Param { .. } => "Int",
        k if k.is_bool() => "Bool",
        _ => "Real",
    }
}

/// The named sections of `q` as assertions over declared constants, one
/// commented block per section. No `check-sat`.
pub fn sections_script(q: &EfQuery) -> String {
    let mut free = BTreeSet::new();
    for (_, f) in &q.sections {
        free.extend(f.free_vars());
    }
    let mut out = String::new();
    for v in &free {
        let _ = writeln!(out, "(declare-const {} {})", symbol(q.vars.name(*v)), sort(q.vars.kind(*v)));
    }
    for (name, f) in &q.sections {
        let _ = writeln!(out, "; {name}");
        for c in f.conjuncts() {
            let _ = writeln!(out, "(assert {})", render(c, &q.vars));
        }
    }
    out
}

/// The whole ∃∀ query: parameters as constants with their ranges, universal
/// variables bound by one `forall`.
pub fn query_script(q: &EfQuery) -> String {
    let mut out = String::from("(set-option :produce-models true)\n");
    for (v, (lo, hi)) in q.exists.iter().zip(q.ranges()) {
        let name = symbol(q.vars.name(*v));
        let _ = writeln!(out, "(declare-const {name} Int)");
        let _ = writeln!(out, "(assert (and (<= {lo} {name}) (<= {name} {hi})))");
    }
    if !q.side.is_true() {
        let _ = writeln!(out, "(assert {})", render(&q.side, &q.vars));
    }
    let matrix = render(&q.matrix(), &q.vars);
    if q.forall.is_empty() {
        let _ = writeln!(out, "(assert {matrix})");
    } else {
        out.push_str("(assert (forall (");
        for v in &q.forall {
            let _ = write!(out, "\n    ({} {})", symbol(q.vars.name(*v)), sort(q.vars.kind(*v)));
        }
        let _ = writeln!(out, ")\n  {matrix}))");
    }
    out.push_str("(check-sat)\n(get-model)\n(exit)\n");
    out
}

/// Minimal s-expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

/// Parses every top-level s-expression in `text`.
pub fn parse_sexps(text: &str) -> Result<Vec<Sexp>, String> {
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '(' => stack.push(Vec::new()),
            ')' => {
                let done = stack.pop().ok_or("unbalanced ')'")?;
                stack
                    .last_mut()
                    .ok_or("unbalanced ')'")?
                    .push(Sexp::List(done));
            }
            ';' => {
                for d in chars.by_ref() {
                    if d == '\n' {
                        break;
                    }
                }
            }
            '|' => {
                let mut s = String::new();
                for d in chars.by_ref() {
                    if d == '|' {
                        break;
                    }
                    s.push(d);
                }
                stack.last_mut().unwrap().push(Sexp::Atom(s));
            }
            '"' => {
                let mut s = String::new();
                for d in chars.by_ref() {
                    if d == '"' {
                        break;
                    }
                    s.push(d);
                }
                stack.last_mut().unwrap().push(Sexp::Atom(s));
            }
            c if c.is_whitespace() => {}
            c => {
                let mut s = String::from(c);
                while let Some(&d) = chars.peek() {
                    if d.is_whitespace() || d == '(' || d == ')' {
                        break;
                    }
                    s.push(d);
                    chars.next();
                }
                stack.last_mut().unwrap().push(Sexp::Atom(s));
            }
        }
    }
    if stack.len() != 1 {
        return Err("unbalanced '('".into());
    }
    Ok(stack.pop().unwrap())
}

fn value(e: &Sexp) -> Option<Val> {
    match e {
        Sexp::Atom(a) if a == "true" => Some(Val::Bool(true)),
        Sexp::Atom(a) if a == "false" => Some(Val::Bool(false)),
        Sexp::Atom(a) => parse_rat(a).map(Val::Num),
        Sexp::List(xs) => match xs.as_slice() {
            [Sexp::Atom(op), x] if op == "-" => Some(Val::Num(-value(x)?.num()?)),
            [Sexp::Atom(op), x, y] if op == "/" => {
                let d = value(y)?.num()?;
                if d.is_zero() {
                    return None;
                }
                Some(Val::Num(value(x)?.num()? / d))
            }
            [Sexp::Atom(op), x] if op == "to_real" => value(x),
            _ => None,
        },
    }
}

/// Extracts `(define-fun name () Sort value)` entries from a model.
pub fn parse_model(model: &Sexp) -> Result<Vec<(String, Val)>, String> {
    let Sexp::List(items) = model else {
        return Err("model is not a list".into());
    };
    let mut out = Vec::new();
    for it in items {
        match it {
            Sexp::List(xs) if matches!(xs.first(), Some(Sexp::Atom(h)) if h == "define-fun") => {
                if let [_, Sexp::Atom(name), Sexp::List(args), _sort, v] = xs.as_slice() {
                    if !args.is_empty() {
                        continue;
                    }
                    let val = value(v).ok_or_else(|| format!("cannot read value of {name}"))?;
                    out.push((name.clone(), val));
                }
            }
            Sexp::Atom(a) if a == "model" => {}
            _ => {}
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::formula::LinExpr;
    use crate::rational::int;

    #[test]
    fn renders_clock_difference_against_parameter() {
        let mut vars = Vars::new();
        let t1 = vars.declare("t1", VarKind::Clock);
        let ts1 = vars.declare("ts1", VarKind::Clock);
        let eta1 = vars.declare("eta1", VarKind::Param { lo: 0, hi: 30 });
        let f = Formula::atom(
            LinExpr::var(t1) - LinExpr::var(ts1),
            Rel::Le,
            -LinExpr::var(eta1),
        );
        assert_eq!(render(&f, &vars), "(<= (- t1 ts1) (- 0 eta1))");
        let s = script(&f, &vars);
        assert!(s.contains("(set-logic QF_LIRA)"));
        assert!(s.contains("(declare-const eta1 Int)"));
        assert!(s.contains("(assert (<= (- t1 ts1) (- 0 eta1)))"));
    }

    #[test]
    fn odd_names_are_quoted() {
        assert_eq!(symbol("Robot1.p10"), "Robot1.p10");
        assert_eq!(symbol("prev1_take{1}l"), "|prev1_take{1}l|");
        assert_eq!(symbol("1x"), "|1x|");
    }

    #[test]
    fn parses_z3_style_model() {
        let text = "sat\n(\n  (define-fun y () Real\n    (/ 1.0 2.0))\n  (define-fun z () Real (- 3.5))\n  (define-fun b () Bool true)\n  (define-fun n () Int 7)\n)";
        let parsed = parse_sexps(text).unwrap();
        assert_eq!(parsed[0], Sexp::Atom("sat".into()));
        let m = parse_model(&parsed[1]).unwrap();
        assert_eq!(m[0], ("y".into(), Val::Num(Rat::new(1, 2))));
        assert_eq!(m[1], ("z".into(), Val::Num(Rat::new(-7, 2))));
        assert_eq!(m[2], ("b".into(), Val::Bool(true)));
        assert_eq!(m[3], ("n".into(), Val::Num(int(7))));
    }
}
