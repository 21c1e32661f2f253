//! Exact multivariate polynomials over ℚ in three kinds of atoms: named
//! constants (`C`, `C'`, `trA`), indeterminates (`u`, `Du`, `xi`) and
//! derivatives of declared smooth coefficient functions (`f(u)`, `f'(u)`).

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    /// An indeterminate that can be differentiated.
    Var(String),
    /// A smooth function `name^(order)(arg)` of an indeterminate.
    Func { name: String, order: u32, arg: String },
    /// A named constant or coefficient symbol.
    Sym(String),
}

impl Atom {
    fn render(&self) -> String {
        match self {
            Atom::Var(v) | Atom::Sym(v) => v.clone(),
            Atom::Func { name, order, arg } => {
                format!("{}{}({})", name, "'".repeat(*order as usize), arg)
            }
        }
    }
}

/// A monomial: sorted list of atoms with positive powers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial(Vec<(Atom, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn atom(a: Atom) -> Self {
        Monomial(vec![(a, 1)])
    }

    pub fn factors(&self) -> &[(Atom, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut map: BTreeMap<Atom, u32> = BTreeMap::new();
        for (a, p) in self.0.iter().chain(other.0.iter()) {
            *map.entry(a.clone()).or_insert(0) += p;
        }
        Monomial(map.into_iter().collect())
    }

    /// Power of a given atom (0 if absent).
    pub fn power(&self, atom: &Atom) -> u32 {
        self.0.iter().find(|(a, _)| a == atom).map(|(_, p)| *p).unwrap_or(0)
    }

    /// Total degree in indeterminates (functions and symbols excluded).
    pub fn var_degree(&self) -> u32 {
        self.0.iter().filter(|(a, _)| matches!(a, Atom::Var(_))).map(|(_, p)| p).sum()
    }

    fn render(&self) -> String {
        self.0
            .iter()
            .map(|(a, p)| if *p == 1 { a.render() } else { format!("{}^{}", a.render(), p) })
            .collect::<Vec<_>>()
            .join("*")
    }
}

/// Exact polynomial with rational coefficients; zero coefficients are pruned.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Poly::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn int(n: i64) -> Self {
        Poly::constant(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn rational(p: i64, q: i64) -> Self {
        Poly::constant(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn sym(name: &str) -> Self {
        Poly::monomial(Monomial::atom(Atom::Sym(name.to_string())))
    }

    pub fn var(name: &str) -> Self {
        Poly::monomial(Monomial::atom(Atom::Var(name.to_string())))
    }

    pub fn func(name: &str, order: u32, arg: &str) -> Self {
        Poly::monomial(Monomial::atom(Atom::Func {
            name: name.to_string(),
            order,
            arg: arg.to_string(),
        }))
    }

    fn monomial(m: Monomial) -> Self {
        let mut p = Poly::zero();
        p.add_term(m, BigRational::one());
        p
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m.clone()).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self.terms.get(&Monomial::one()).map(|c| c.is_one()).unwrap_or(false)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Coefficient of an exact monomial.
    pub fn coefficient(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        let mut out = Poly::zero();
        for (m, k) in &self.terms {
            out.add_term(m.clone(), k * c);
        }
        out
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut out = Poly::one();
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Formal partial derivative with respect to the indeterminate `x`.
    /// Functions whose argument is `x` are differentiated by raising their
    /// order (chain rule with inner derivative 1).
    pub fn derivative(&self, x: &str) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            for (i, (atom, p)) in m.0.iter().enumerate() {
                let replacement = match atom {
                    Atom::Var(v) if v == x => None,
                    Atom::Func { name, order, arg } if arg == x => Some(Atom::Func {
                        name: name.clone(),
                        order: order + 1,
                        arg: arg.clone(),
                    }),
                    _ => continue,
                };
                let mut rest: Vec<(Atom, u32)> = m.0.clone();
                if *p == 1 {
                    rest.remove(i);
                } else {
                    rest[i].1 -= 1;
                }
                let mut mono = Monomial(rest);
                if let Some(r) = replacement {
                    mono = mono.mul(&Monomial::atom(r));
                }
                out.add_term(mono, c * BigRational::from_integer(BigInt::from(*p)));
            }
        }
        out
    }

    /// Iterated derivative `D^σ` along the listed indeterminates.
    pub fn derivative_multi(&self, vars: &[String]) -> Poly {
        vars.iter().fold(self.clone(), |p, v| p.derivative(v))
    }

    /// Replace every occurrence of the product `a·b` of two symbols by the
    /// symbol `c` (one contraction per occurrence pair).
    pub fn contract(&self, a: &str, b: &str, c: &str) -> Poly {
        let sa = Atom::Sym(a.to_string());
        let sb = Atom::Sym(b.to_string());
        let sc = Atom::Sym(c.to_string());
        let mut out = Poly::zero();
        for (m, k) in &self.terms {
            let n = m.power(&sa).min(m.power(&sb));
            if n == 0 {
                out.add_term(m.clone(), k.clone());
                continue;
            }
            let mut map: BTreeMap<Atom, u32> = m.0.iter().cloned().collect();
            for s in [&sa, &sb] {
                let e = map.get_mut(s).expect("present");
                *e -= n;
                if *e == 0 {
                    map.remove(s);
                }
            }
            *map.entry(sc.clone()).or_insert(0) += n;
            out.add_term(Monomial(map.into_iter().collect()), k.clone());
        }
        out
    }

    /// All indeterminates occurring (directly or as function arguments).
    pub fn variables(&self) -> Vec<String> {
        let mut vs: Vec<String> = Vec::new();
        for m in self.terms.keys() {
            for (a, _) in &m.0 {
                let v = match a {
                    Atom::Var(v) => v,
                    Atom::Func { arg, .. } => arg,
                    Atom::Sym(_) => continue,
                };
                if !vs.contains(v) {
                    vs.push(v.clone());
                }
            }
        }
        vs.sort();
        vs
    }

    /// Maximal power of `x` over all monomials.
    pub fn degree_in(&self, x: &str) -> u32 {
        let a = Atom::Var(x.to_string());
        self.terms.keys().map(|m| m.power(&a)).max().unwrap_or(0)
    }

    /// Set the listed indeterminates to zero.
    pub fn eval_zero(&self, vars: &[String]) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            if m.0.iter().any(|(a, _)| matches!(a, Atom::Var(v) if vars.contains(v))) {
                continue;
            }
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    /// Parse an expression. Identifiers listed in `vars` become
    /// indeterminates, `name(arg)` / `name'(arg)` become function atoms and
    /// every other identifier is a named symbol.
    pub fn parse(src: &str, vars: &[String]) -> Result<Poly> {
        let mut p = Parser { chars: src.chars().collect(), pos: 0, vars };
        let out = p.expr()?;
        p.skip_ws();
        if p.pos != p.chars.len() {
            return Err(Error::Parse(format!(
                "unexpected '{}' at offset {} in '{}'",
                p.chars[p.pos], p.pos, src
            )));
        }
        Ok(out)
    }

    /// Numeric evaluation with a symbol/variable assignment (functions are
    /// not supported and yield an error).
    pub fn eval_f64(&self, env: &BTreeMap<String, f64>) -> Result<f64> {
        let mut total = 0.0;
        for (m, c) in &self.terms {
            let mut v = c.to_f64().unwrap_or(f64::NAN);
            for (a, p) in &m.0 {
                let x = match a {
                    Atom::Var(n) | Atom::Sym(n) => {
                        *env.get(n).ok_or_else(|| Error::Unknown(n.clone()))?
                    }
                    Atom::Func { .. } => {
                        return Err(Error::Invalid("cannot evaluate function atoms".into()))
                    }
                };
                v *= x.powi(*p as i32);
            }
            total += v;
        }
        Ok(total)
    }

    /// Term list as (coefficient, monomial) strings for machine output.
    pub fn term_list(&self) -> Vec<(String, String)> {
        self.ordered_terms()
            .into_iter()
            .map(|(m, c)| (c.to_string(), if m.is_one() { "1".into() } else { m.render() }))
            .collect()
    }

    /// Deterministic display order: higher indeterminate degree first, then
    /// by monomial.
    fn ordered_terms(&self) -> Vec<(&Monomial, &BigRational)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|(a, _), (b, _)| b.var_degree().cmp(&a.var_degree()).then(a.cmp(b)));
        v
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (m, c) in self.ordered_terms() {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            if m.is_one() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                f.write_str(&m.render())?;
            } else {
                write!(f, "{}*{}", mag, m.render())?;
            }
        }
        Ok(())
    }
}

impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Poly {
    /// Deserialisation treats every identifier as a symbol; use
    /// [`Poly::parse`] with an indeterminate list for equations.
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Poly::parse(&s, &[]).map_err(serde::de::Error::custom)
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, o: Poly) -> Poly {
        &self + &o
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, o: Poly) -> Poly {
        &self - &o
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, o: Poly) -> Poly {
        &self * &o
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-BigRational::one())
    }
}

impl std::iter::Sum for Poly {
    fn sum<I: Iterator<Item = Poly>>(iter: I) -> Poly {
        iter.fold(Poly::zero(), |a, b| &a + &b)
    }
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    vars: &'a [String],
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn err(&self, what: &str) -> Error {
        let s: String = self.chars.iter().collect();
        Error::Parse(format!("{what} at offset {} in '{s}'", self.pos))
    }

    fn expr(&mut self) -> Result<Poly> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some('-') => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Some('/') => {
                    self.pos += 1;
                    let d = self.unary()?;
                    if d.terms.len() != 1 || !d.terms.contains_key(&Monomial::one()) {
                        return Err(self.err("division only by nonzero rational constants"));
                    }
                    let c = d.coefficient(&Monomial::one());
                    acc = acc.scale(&c.recip());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Poly> {
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Poly> {
        let base = self.primary()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.err("expected exponent"));
            }
            let n: u32 = self.chars[start..self.pos]
                .iter()
                .collect::<String>()
                .parse()
                .map_err(|_| self.err("bad exponent"))?;
            return Ok(base.pow(n));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Poly> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let s: String = self.chars[start..self.pos].iter().collect();
                let n: BigInt = s.parse().map_err(|_| self.err("bad integer"))?;
                Ok(Poly::constant(BigRational::from_integer(n)))
            }
            Some(c) if c.is_alphabetic() || c == '_' => {
                let start = self.pos;
                while self.pos < self.chars.len()
                    && (self.chars[self.pos].is_alphanumeric() || self.chars[self.pos] == '_')
                {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().collect();
                let mut primes = 0u32;
                while self.pos < self.chars.len() && self.chars[self.pos] == '\'' {
                    primes += 1;
                    self.pos += 1;
                }
                if self.pos < self.chars.len() && self.chars[self.pos] == '(' {
                    self.pos += 1;
                    self.skip_ws();
                    let astart = self.pos;
                    while self.pos < self.chars.len()
                        && (self.chars[self.pos].is_alphanumeric() || self.chars[self.pos] == '_')
                    {
                        self.pos += 1;
                    }
                    let arg: String = self.chars[astart..self.pos].iter().collect();
                    if arg.is_empty() {
                        return Err(self.err("expected function argument"));
                    }
                    if self.peek() != Some(')') {
                        return Err(self.err("expected ')' after function argument"));
                    }
                    self.pos += 1;
                    return Ok(Poly::func(&name, primes, &arg));
                }
                if primes > 0 {
                    let full = format!("{}{}", name, "'".repeat(primes as usize));
                    return Ok(Poly::sym(&full));
                }
                if self.vars.contains(&name) {
                    Ok(Poly::var(&name))
                } else {
                    Ok(Poly::sym(&name))
                }
            }
            _ => Err(self.err("expected a number, identifier or '('")),
        }
    }
}
