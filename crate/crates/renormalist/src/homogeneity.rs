//! Exact two-component homogeneities `a + b·κ`, where κ is a formal positive
//! infinitesimal, and the extended grading used for second homogeneities.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A homogeneity `rational + kappa·κ` with κ a formal infinitesimal.
///
/// Ordering is lexicographic: the rational part dominates and the κ
/// coefficient only breaks ties.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Homogeneity {
    pub rational: Rational64,
    pub kappa: Rational64,
}

impl Homogeneity {
    pub const ZERO: Homogeneity = Homogeneity {
        rational: Rational64::new_raw(0, 1),
        kappa: Rational64::new_raw(0, 1),
    };

    pub fn new(rational: Rational64, kappa: Rational64) -> Self {
        Homogeneity { rational, kappa }
    }

    /// Pure rational `p/q`.
    pub fn rat(p: i64, q: i64) -> Self {
        Homogeneity::new(Rational64::new(p, q), Rational64::zero())
    }

    pub fn int(n: i64) -> Self {
        Homogeneity::rat(n, 1)
    }

    /// `c·κ` with rational coefficient `p/q`.
    pub fn kappa(p: i64, q: i64) -> Self {
        Homogeneity::new(Rational64::zero(), Rational64::new(p, q))
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.kappa.is_zero()
    }

    /// True iff the value is a natural number (κ part zero, rational part in ℕ).
    pub fn is_natural(&self) -> bool {
        self.kappa.is_zero() && self.rational.is_integer() && !self.rational.is_negative()
    }

    pub fn is_negative(&self) -> bool {
        *self < Homogeneity::ZERO
    }

    pub fn is_positive(&self) -> bool {
        *self > Homogeneity::ZERO
    }

    /// Numeric value after substituting a concrete κ.
    pub fn to_f64(&self, kappa: f64) -> f64 {
        self.rational.to_f64().unwrap_or(f64::NAN) + kappa * self.kappa.to_f64().unwrap_or(f64::NAN)
    }

    /// Substitute a concrete rational κ, yielding a pure rational homogeneity.
    pub fn substitute(&self, kappa: Rational64) -> Homogeneity {
        Homogeneity::new(self.rational + self.kappa * kappa, Rational64::zero())
    }

    pub fn min(self, other: Self) -> Self {
        std::cmp::min(self, other)
    }
}

impl Add for Homogeneity {
    type Output = Homogeneity;
    fn add(self, o: Homogeneity) -> Homogeneity {
        Homogeneity::new(self.rational + o.rational, self.kappa + o.kappa)
    }
}

impl AddAssign for Homogeneity {
    fn add_assign(&mut self, o: Homogeneity) {
        *self = *self + o;
    }
}

impl Sub for Homogeneity {
    type Output = Homogeneity;
    fn sub(self, o: Homogeneity) -> Homogeneity {
        Homogeneity::new(self.rational - o.rational, self.kappa - o.kappa)
    }
}

impl Neg for Homogeneity {
    type Output = Homogeneity;
    fn neg(self) -> Homogeneity {
        Homogeneity::new(-self.rational, -self.kappa)
    }
}

impl Mul<i64> for Homogeneity {
    type Output = Homogeneity;
    fn mul(self, k: i64) -> Homogeneity {
        Homogeneity::new(self.rational * k, self.kappa * k)
    }
}

impl std::iter::Sum for Homogeneity {
    fn sum<I: Iterator<Item = Homogeneity>>(iter: I) -> Homogeneity {
        iter.fold(Homogeneity::ZERO, |a, b| a + b)
    }
}

fn fmt_rational(r: &Rational64) -> String {
    if r.is_integer() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Homogeneity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        if !self.rational.is_zero() || self.kappa.is_zero() {
            out.push_str(&fmt_rational(&self.rational));
        }
        if !self.kappa.is_zero() {
            let neg = self.kappa.is_negative();
            let mag = self.kappa.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push(if neg { '-' } else { '+' });
            }
            if mag != Rational64::from_integer(1) {
                out.push_str(&fmt_rational(&mag));
                out.push('*');
            }
            out.push_str("kappa");
        }
        f.write_str(&out)
    }
}

/// Parse an exact rational `p`, `p/q` or a finite decimal such as `0.25`.
pub fn parse_rational(s: &str) -> Result<Rational64> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational '{s}'"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Rational64::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) || frac.len() > 15 {
            return Err(bad());
        }
        let neg = int.trim_start().starts_with('-');
        let int_part: i64 = if int.is_empty() || int == "-" || int == "+" {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        let den = 10i64.pow(frac.len() as u32);
        let f: i64 = frac.parse().map_err(|_| bad())?;
        let mag = Rational64::from_integer(int_part.abs()) + Rational64::new(f, den);
        return Ok(if neg { -mag } else { mag });
    }
    let n: i64 = s.parse().map_err(|_| bad())?;
    Ok(Rational64::from_integer(n))
}

impl FromStr for Homogeneity {
    type Err = Error;

    /// Accepts sums of signed terms, each a rational or `[c*]kappa`, e.g.
    /// `2-kappa`, `-5/2-kappa`, `1/2-16*kappa`, `kappa`, `0`.
    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(Error::Parse("empty homogeneity".into()));
        }
        let mut terms: Vec<(bool, String)> = Vec::new();
        let mut cur = String::new();
        let mut neg = false;
        for (i, c) in compact.chars().enumerate() {
            if c == '+' || c == '-' {
                if i == 0 {
                    neg = c == '-';
                    continue;
                }
                if cur.is_empty() {
                    return Err(Error::Parse(format!("invalid homogeneity '{s}'")));
                }
                terms.push((neg, std::mem::take(&mut cur)));
                neg = c == '-';
            } else {
                cur.push(c);
            }
        }
        if cur.is_empty() {
            return Err(Error::Parse(format!("invalid homogeneity '{s}'")));
        }
        terms.push((neg, cur));
        let mut h = Homogeneity::ZERO;
        for (neg, body) in terms {
            let sign = if neg { -1 } else { 1 };
            if let Some(coef) = body.strip_suffix("kappa") {
                let coef = coef.strip_suffix('*').unwrap_or(coef);
                let c = if coef.is_empty() {
                    Rational64::from_integer(1)
                } else {
                    parse_rational(coef)?
                };
                h.kappa += c * sign;
            } else {
                h.rational += parse_rational(&body)? * sign;
            }
        }
        Ok(h)
    }
}

impl Serialize for Homogeneity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Homogeneity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A homogeneity extended by `+∞`, used for second homogeneities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Grade {
    Finite(Homogeneity),
    Infinite,
}

impl Grade {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Grade::Infinite)
    }

    pub fn finite(&self) -> Option<Homogeneity> {
        match self {
            Grade::Finite(h) => Some(*h),
            Grade::Infinite => None,
        }
    }

    pub fn min(self, other: Grade) -> Grade {
        std::cmp::min(self, other)
    }
}

impl PartialOrd for Grade {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Grade {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Grade::Finite(a), Grade::Finite(b)) => a.cmp(b),
            (Grade::Finite(_), Grade::Infinite) => Ordering::Less,
            (Grade::Infinite, Grade::Finite(_)) => Ordering::Greater,
            (Grade::Infinite, Grade::Infinite) => Ordering::Equal,
        }
    }
}

impl Add<Homogeneity> for Grade {
    type Output = Grade;
    fn add(self, h: Homogeneity) -> Grade {
        match self {
            Grade::Finite(a) => Grade::Finite(a + h),
            Grade::Infinite => Grade::Infinite,
        }
    }
}

impl From<Homogeneity> for Grade {
    fn from(h: Homogeneity) -> Grade {
        Grade::Finite(h)
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Grade::Finite(h) => write!(f, "{h}"),
            Grade::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Grade {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["2-kappa", "-5/2-kappa", "1/2-16*kappa", "kappa", "0", "-1", "3/2", "-kappa"] {
            let h: Homogeneity = s.parse().unwrap();
            assert_eq!(h.to_string(), s);
            assert_eq!(h.to_string().parse::<Homogeneity>().unwrap(), h);
        }
        let h: Homogeneity = "-5/2 - kappa".parse().unwrap();
        assert_eq!(h, Homogeneity::rat(-5, 2) + Homogeneity::kappa(-1, 1));
        assert_eq!("0.25".parse::<Homogeneity>().unwrap(), Homogeneity::rat(1, 4));
        assert!("2--kappa".parse::<Homogeneity>().is_err());
        assert!("".parse::<Homogeneity>().is_err());
        assert!("kapa".parse::<Homogeneity>().is_err());
    }

    #[test]
    fn lexicographic_order() {
        let a: Homogeneity = "1-kappa".parse().unwrap();
        let b: Homogeneity = "1".parse().unwrap();
        let c: Homogeneity = "1/2+100*kappa".parse().unwrap();
        assert!(c < a && a < b);
        assert!(Grade::Finite(b) < Grade::Infinite);
    }

    #[test]
    fn naturality() {
        assert!(Homogeneity::int(3).is_natural());
        assert!(!Homogeneity::int(-1).is_natural());
        assert!(!(Homogeneity::int(1) + Homogeneity::kappa(1, 1)).is_natural());
        assert!(!Homogeneity::rat(1, 2).is_natural());
    }
}
