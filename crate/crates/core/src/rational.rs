//! Exact rational numbers used throughout the solving path.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

/// Exact rational over `i128`. Overflow traps (release builds keep overflow checks on).
pub type Rat = Ratio<i128>;

pub fn int(v: i64) -> Rat {
    Rat::from_integer(v as i128)
}

pub fn floor(r: &Rat) -> i128 {
    r.floor().to_integer()
}

pub fn ceil(r: &Rat) -> i128 {
    r.ceil().to_integer()
}

pub fn is_integer(r: &Rat) -> bool {
    r.denom().is_one()
}

/// Renders a rational as `p` or `p/q`.
pub fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p`, `-p`, `p/q` or a decimal `1.25`.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i128 = n.trim().parse().ok()?;
        let d: i128 = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rat::new(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.starts_with('-');
        let ip = ip.trim_start_matches('-');
        let ipv: i128 = if ip.is_empty() { 0 } else { ip.parse().ok()? };
        let fp = fp.trim_end_matches('0');
        if !fp.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let den = 10i128.checked_pow(fp.len() as u32)?;
        let fpv: i128 = if fp.is_empty() { 0 } else { fp.parse().ok()? };
        let v = Rat::new(ipv * den + fpv, den);
        return Some(if neg { -v } else { v });
    }
    s.parse::<i128>().ok().map(Rat::from_integer)
}

/// Greatest common divisor of the numerators, least common multiple of the denominators.
pub fn content(vals: impl IntoIterator<Item = Rat>) -> Rat {
    let mut g = 0i128;
    let mut l = 1i128;
    for v in vals {
        g = g.gcd(v.numer());
        l = l.lcm(v.denom());
    }
    if g.is_zero() {
        Rat::one()
    } else {
        Rat::new(g.abs(), l)
    }
}

pub fn abs(r: &Rat) -> Rat {
    r.abs()
}
