//! Exact-when-possible scalars and extended exponents.
//!
//! Exponents typed as `"3/2"` or `"0.25"` are kept as exact rationals so that
//! knife-edge equalities such as `s0 - s1 = d/p0 - d/p1` are decided without
//! rounding. Anything that does not fit an `i64` ratio falls back to `f64`,
//! and comparisons involving a float use a relative tolerance of `1e-12`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{LabError, Result};

/// Relative tolerance for comparisons that involve a floating operand.
pub const FLOAT_TOL: f64 = 1e-12;

type Q = Ratio<i64>;

/// A real number that remembers whether it is exact.
#[derive(Clone, Copy, Debug)]
pub enum Num {
    Exact(Q),
    Approx(f64),
}

impl Num {
    pub fn int(n: i64) -> Self {
        Num::Exact(Q::from_integer(n))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Num::Exact(Q::new(num, den))
    }

    /// Wraps a float; comparisons against it become tolerant.
    pub fn float(x: f64) -> Self {
        Num::Approx(x)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Num::Exact(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Num::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            Num::Approx(x) => *x,
        }
    }

    fn lift(
        self,
        other: Num,
        exact: impl Fn(&Q, &Q) -> Option<Q>,
        approx: impl Fn(f64, f64) -> f64,
    ) -> Num {
        if let (Num::Exact(a), Num::Exact(b)) = (self, other) {
            if let Some(c) = exact(&a, &b) {
                return Num::Exact(c);
            }
        }
        Num::Approx(approx(self.to_f64(), other.to_f64()))
    }

    /// Total order that is exact for two rationals and tolerant otherwise.
    pub fn cmp_tol(&self, other: &Num) -> Ordering {
        match (self, other) {
            (Num::Exact(a), Num::Exact(b)) => a.cmp(b),
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                let scale = a.abs().max(b.abs()).max(1.0);
                if (a - b).abs() <= FLOAT_TOL * scale {
                    Ordering::Equal
                } else if a < b {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Num::Exact(q) => *q > Q::zero(),
            Num::Approx(x) => *x > 0.0 && x.is_finite(),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Num::Exact(_) => true,
            Num::Approx(x) => x.is_finite(),
        }
    }
}

impl PartialEq for Num {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_tol(other) == Ordering::Equal
    }
}

impl PartialOrd for Num {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_tol(other))
    }
}

impl std::ops::Add for Num {
    type Output = Num;
    fn add(self, o: Num) -> Num {
        self.lift(o, |a, b| a.checked_add(b), |a, b| a + b)
    }
}

impl std::ops::Sub for Num {
    type Output = Num;
    fn sub(self, o: Num) -> Num {
        self.lift(o, |a, b| a.checked_sub(b), |a, b| a - b)
    }
}

impl std::ops::Mul for Num {
    type Output = Num;
    fn mul(self, o: Num) -> Num {
        self.lift(o, |a, b| a.checked_mul(b), |a, b| a * b)
    }
}

/// Division; an exact zero divisor degrades to a float infinity.
impl std::ops::Div for Num {
    type Output = Num;
    fn div(self, o: Num) -> Num {
        self.lift(
            o,
            |a, b| if b.is_zero() { None } else { a.checked_div(b) },
            |a, b| a / b,
        )
    }
}

impl From<i64> for Num {
    fn from(n: i64) -> Self {
        Num::int(n)
    }
}

impl From<i32> for Num {
    fn from(n: i32) -> Self {
        Num::int(n.into())
    }
}

impl From<f64> for Num {
    fn from(x: f64) -> Self {
        Num::float(x)
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::Exact(q) if *q.denom() == 1 => write!(f, "{}", q.numer()),
            Num::Exact(q) => write!(f, "{}/{}", q.numer(), q.denom()),
            Num::Approx(x) => write!(f, "{x}"),
        }
    }
}

/// Parses a plain decimal such as `-12.0625` into an exact ratio when it fits.
fn parse_decimal(s: &str) -> Option<Q> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let digits = digits.trim_start_matches('0');
    if digits.len() > 18 || frac_part.len() > 18 {
        return None;
    }
    let numer: i64 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
    let denom = 10i64.checked_pow(frac_part.len() as u32)?;
    let q = Q::new(numer, denom);
    Some(if neg { -q } else { q })
}

impl FromStr for Num {
    type Err = LabError;

    fn from_str(raw: &str) -> Result<Self> {
        let s = raw.trim();
        let bad = || LabError::Parse(format!("cannot read {raw:?} as a number"));
        if s.is_empty() {
            return Err(bad());
        }
        if let Some((a, b)) = s.split_once('/') {
            let a = a.trim().parse::<Num>()?;
            let b = b.trim().parse::<Num>()?;
            if b.to_f64() == 0.0 {
                return Err(LabError::Parse(format!("zero denominator in {raw:?}")));
            }
            let q = a / b;
            return if q.is_finite() { Ok(q) } else { Err(bad()) };
        }
        if let Some(q) = parse_decimal(s) {
            return Ok(Num::Exact(q));
        }
        match s.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(Num::Approx(x)),
            _ => Err(bad()),
        }
    }
}

/// An exponent in `(0, ∞]`, where `∞` sits above every real.
#[derive(Clone, Copy, Debug)]
pub enum Ext {
    Fin(Num),
    Inf,
}

impl Ext {
    pub fn fin(n: impl Into<Num>) -> Self {
        Ext::Fin(n.into())
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Ext::Fin(Num::ratio(num, den))
    }

    pub fn is_inf(&self) -> bool {
        matches!(self, Ext::Inf)
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Ext::Fin(n) => n.to_f64(),
            Ext::Inf => f64::INFINITY,
        }
    }

    pub fn cmp_tol(&self, other: &Ext) -> Ordering {
        match (self, other) {
            (Ext::Inf, Ext::Inf) => Ordering::Equal,
            (Ext::Inf, _) => Ordering::Greater,
            (_, Ext::Inf) => Ordering::Less,
            (Ext::Fin(a), Ext::Fin(b)) => a.cmp_tol(b),
        }
    }

    pub fn min(self, other: Ext) -> Ext {
        if self.cmp_tol(&other) == Ordering::Greater {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Ext) -> Ext {
        if self.cmp_tol(&other) == Ordering::Less {
            other
        } else {
            self
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Ext::Inf => true,
            Ext::Fin(n) => n.is_positive(),
        }
    }

    /// `true` when the value came from exact input (∞ counts as exact).
    pub fn is_exact(&self) -> bool {
        match self {
            Ext::Inf => true,
            Ext::Fin(n) => n.is_exact(),
        }
    }
}

impl PartialEq for Ext {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_tol(other) == Ordering::Equal
    }
}

impl PartialOrd for Ext {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_tol(other))
    }
}

impl From<Num> for Ext {
    fn from(n: Num) -> Self {
        Ext::Fin(n)
    }
}

impl From<i64> for Ext {
    fn from(n: i64) -> Self {
        Ext::Fin(Num::int(n))
    }
}

impl From<i32> for Ext {
    fn from(n: i32) -> Self {
        Ext::Fin(Num::from(n))
    }
}

impl From<f64> for Ext {
    fn from(x: f64) -> Self {
        if x == f64::INFINITY {
            Ext::Inf
        } else {
            Ext::Fin(Num::float(x))
        }
    }
}

impl fmt::Display for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ext::Fin(n) => n.fmt(f),
            Ext::Inf => f.write_str("inf"),
        }
    }
}

impl FromStr for Ext {
    type Err = LabError;

    fn from_str(raw: &str) -> Result<Self> {
        let s = raw.trim();
        if ["inf", "infinity", "+inf", "∞"].iter().any(|w| s.eq_ignore_ascii_case(w)) {
            return Ok(Ext::Inf);
        }
        s.parse::<Num>().map(Ext::Fin)
    }
}

/// Parses an exponent that must lie in `(0, ∞]`.
pub fn parse_positive_exponent(raw: &str) -> Result<Ext> {
    let e: Ext = raw.parse()?;
    if e.is_positive() {
        Ok(e)
    } else {
        Err(LabError::InvalidExponent(format!("{raw:?} is not positive")))
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl Serialize for Ext {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawNumber {
    Int(i64),
    Float(f64),
    Text(String),
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match RawNumber::deserialize(d)? {
            RawNumber::Int(n) => Ok(Num::int(n)),
            RawNumber::Float(x) => Ok(Num::float(x)),
            RawNumber::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl<'de> Deserialize<'de> for Ext {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match RawNumber::deserialize(d)? {
            RawNumber::Int(n) => Ok(Ext::from(n)),
            RawNumber::Float(x) => Ok(Ext::from(x)),
            RawNumber::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals_exactly() {
        let a: Num = "1/3".parse().unwrap();
        let b: Num = "2/6".parse().unwrap();
        assert!(a.is_exact() && a == b);
        let c: Num = "0.25".parse().unwrap();
        assert!(matches!(c, Num::Exact(q) if q == Q::new(1, 4)));
        let neg: Num = "-1.5".parse().unwrap();
        assert_eq!(neg.to_f64(), -1.5);
        let sci: Num = "1e-3".parse().unwrap();
        assert!(!sci.is_exact());
    }

    #[test]
    fn infinity_tops_everything() {
        let inf: Ext = "inf".parse().unwrap();
        assert!(inf.is_inf());
        assert!(Ext::from(1_000_000) < inf);
        assert_eq!(Ext::from(3).min(inf), Ext::from(3));
        assert!("INF".parse::<Ext>().unwrap().is_inf());
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "abc", "1/0", "1//2", "nan", "--1", "."] {
            assert!(s.parse::<Ext>().is_err(), "{s}");
        }
        assert!(parse_positive_exponent("0").is_err());
        assert!(parse_positive_exponent("-2").is_err());
    }

    #[test]
    fn exact_critical_line_has_no_rounding() {
        // 1/3 - 1/6 = 1/6 exactly, which floats would only approximate.
        let lhs = Num::ratio(1, 3) - Num::ratio(1, 6);
        assert!(matches!(lhs, Num::Exact(q) if q == Q::new(1, 6)));
    }

    #[test]
    fn overflow_falls_back_to_float() {
        let big = Num::int(i64::MAX / 2);
        let prod = big * big;
        assert!(!prod.is_exact());
        assert!(prod.to_f64() > 1e36);
    }

    #[test]
    fn float_comparison_uses_tolerance() {
        let a = Num::float(0.1 + 0.2);
        let b = Num::ratio(3, 10);
        assert_eq!(a.cmp_tol(&b), Ordering::Equal);
    }

    #[test]
    fn serde_round_trip() {
        let e: Ext = serde_json::from_str("\"3/2\"").unwrap();
        assert_eq!(serde_json::to_string(&e).unwrap(), "\"3/2\"");
        let f: Ext = serde_json::from_str("2").unwrap();
        assert_eq!(f, Ext::from(2));
        let g: Ext = serde_json::from_str("\"inf\"").unwrap();
        assert!(g.is_inf());
    }
}
