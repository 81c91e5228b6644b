//! Sparse homogeneous multivariate polynomials with exact coefficients.
//!
//! Monomials are packed into a single `u128` key whose natural integer order
//! is the graded reverse lexicographic order, so term lists are plain sorted
//! vectors and comparisons are one machine word wide. The packing is
//!
//! ```text
//! bits 64..72   total degree
//! bits 8i..8i+8 0xFF − e_i   (variable i, i = 0..7)
//! ```
//!
//! Degree compares first; within a degree the complement trick makes the
//! *rightmost* differing variable decide, with the smaller exponent winning,
//! exactly grevlex. At most 8 variables and exponents up to 255 are
//! supported, which covers every group in the catalog (rank ≤ 8, top degree
//! 30, Jacobian determinants up to degree 36).
//!
//! Term lists are kept strictly descending (leading term first) with no zero
//! coefficients, which makes serialization order deterministic and addition a
//! linear merge. Coefficients are either `Rational` or `FieldElement` through
//! the [`Coeff`] trait; construction code picks the cheapest type that is
//! exact for the group at hand.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde_json::{json, Value};

use crate::exactnum::{FieldElement, Rational};
use crate::{Error, Result};

/// Hard cap on variables, set by the largest group rank (E8).
pub const MAX_VARS: usize = 8;

// ---------------------------------------------------------------------------
// Key packing
// ---------------------------------------------------------------------------

/// Packs exponents (length ≤ 8, missing entries zero) and their total degree.
#[inline]
pub fn pack_key(exps: &[u8]) -> u128 {
    debug_assert!(exps.len() <= MAX_VARS);
    let mut deg: u32 = 0;
    // Start from "all exponents zero": every complement byte is 0xFF.
    let mut key: u128 = 0xFFFF_FFFF_FFFF_FFFF;
    for (i, &e) in exps.iter().enumerate() {
        deg += e as u32;
        key -= (e as u128) << (8 * i);
    }
    debug_assert!(deg <= 255, "total degree exceeds 255");
    key | ((deg as u128) << 64)
}

/// Inverse of [`pack_key`]; always returns all 8 slots.
#[inline]
pub fn unpack_key(key: u128) -> ([u8; MAX_VARS], u8) {
    let mut exps = [0u8; MAX_VARS];
    for (i, e) in exps.iter_mut().enumerate() {
        *e = 0xFF - ((key >> (8 * i)) as u8);
    }
    (exps, (key >> 64) as u8)
}

#[inline]
pub fn key_degree(key: u128) -> u8 {
    (key >> 64) as u8
}

/// Key of the product monomial (exponent-wise sum).
#[inline]
pub fn key_mul(k1: u128, k2: u128) -> u128 {
    let (e1, _) = unpack_key(k1);
    let (e2, _) = unpack_key(k2);
    let mut e = [0u8; MAX_VARS];
    let mut deg: u32 = 0;
    for i in 0..MAX_VARS {
        let s = e1[i] as u32 + e2[i] as u32;
        assert!(s <= 255, "exponent overflow in monomial product");
        e[i] = s as u8;
        deg += s;
    }
    assert!(deg <= 255, "degree overflow in monomial product");
    pack_key(&e)
}

/// Componentwise e1 ≥ e2 (i.e. monomial k2 divides monomial k1).
#[inline]
pub fn key_divides(k2: u128, k1: u128) -> bool {
    let (e1, _) = unpack_key(k1);
    let (e2, _) = unpack_key(k2);
    (0..MAX_VARS).all(|i| e1[i] >= e2[i])
}

/// Key of the quotient monomial e1 − e2; caller guarantees divisibility.
#[inline]
pub fn key_div(k1: u128, k2: u128) -> u128 {
    let (e1, _) = unpack_key(k1);
    let (e2, _) = unpack_key(k2);
    let mut e = [0u8; MAX_VARS];
    for i in 0..MAX_VARS {
        debug_assert!(e1[i] >= e2[i]);
        e[i] = e1[i] - e2[i];
    }
    pack_key(&e)
}

/// A monomial with its cached total degree (the degree byte of the key).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Monomial {
    pub exps: [u8; MAX_VARS],
    pub degree: u8,
}

impl Monomial {
    pub fn from_key(key: u128) -> Self {
        let (exps, degree) = unpack_key(key);
        Monomial { exps, degree }
    }

    pub fn key(&self) -> u128 {
        pack_key(&self.exps)
    }
}

// ---------------------------------------------------------------------------
// Coefficient trait
// ---------------------------------------------------------------------------

/// Exact coefficient arithmetic shared by `Rational` and `FieldElement`.
pub trait Coeff: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync + 'static {
    /// True for the plain-rational coefficient type; lets callers assert the
    /// cheap representation where it is known to suffice.
    const RATIONAL_ONLY: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn mul_bigint(&self, k: &BigInt) -> Self;
    fn inv(&self) -> Result<Self>;
    fn from_rational(r: Rational) -> Self;
    /// Some(r) when the value is rational.
    fn as_rational(&self) -> Option<&Rational>;
    /// The four rational components along (1, √2, √3, √6); None means zero.
    fn component(&self, i: usize) -> Option<&Rational>;
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self>;
    /// Wraps a polynomial over this coefficient type into [`AnyPoly`].
    fn wrap_poly(p: Polynomial<Self>) -> AnyPoly;
}

impl Coeff for Rational {
    const RATIONAL_ONLY: bool = true;

    fn zero() -> Self {
        Rational::zero()
    }
    fn one() -> Self {
        Rational::one()
    }
    fn is_zero(&self) -> bool {
        Rational::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        Rational::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Rational::sub(self, o)
    }
    fn neg(&self) -> Self {
        Rational::neg(self)
    }
    fn mul(&self, o: &Self) -> Self {
        Rational::mul(self, o)
    }
    fn mul_bigint(&self, k: &BigInt) -> Self {
        Rational::mul_bigint(self, k)
    }
    fn inv(&self) -> Result<Self> {
        Rational::inv(self)
    }
    fn from_rational(r: Rational) -> Self {
        r
    }
    fn as_rational(&self) -> Option<&Rational> {
        Some(self)
    }
    fn component(&self, i: usize) -> Option<&Rational> {
        (i == 0 && !self.is_zero()).then_some(self)
    }
    fn to_json(&self) -> Value {
        Value::String(self.to_string())
    }
    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => Rational::from_str(s),
            Value::Number(n) => Rational::from_str(&n.to_string()),
            _ => Err(Error::InvalidData(format!("expected rational coefficient, got {v}"))),
        }
    }
    fn wrap_poly(p: Polynomial<Self>) -> AnyPoly {
        AnyPoly::Q(p)
    }
}

impl Coeff for FieldElement {
    const RATIONAL_ONLY: bool = false;

    fn zero() -> Self {
        FieldElement::zero()
    }
    fn one() -> Self {
        FieldElement::one()
    }
    fn is_zero(&self) -> bool {
        FieldElement::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        FieldElement::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        FieldElement::sub(self, o)
    }
    fn neg(&self) -> Self {
        FieldElement::neg(self)
    }
    fn mul(&self, o: &Self) -> Self {
        FieldElement::mul(self, o)
    }
    fn mul_bigint(&self, k: &BigInt) -> Self {
        FieldElement::mul_bigint(self, k)
    }
    fn inv(&self) -> Result<Self> {
        FieldElement::inv(self)
    }
    fn from_rational(r: Rational) -> Self {
        FieldElement::from_rational(r)
    }
    fn as_rational(&self) -> Option<&Rational> {
        FieldElement::as_rational(self)
    }
    fn component(&self, i: usize) -> Option<&Rational> {
        let c = self.components()[i];
        (!c.is_zero()).then_some(c)
    }
    fn to_json(&self) -> Value {
        Value::Array(self.components().iter().map(|r| Value::String(r.to_string())).collect())
    }
    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => Ok(FieldElement::from_rational(Rational::from_str(s)?)),
            Value::Number(n) => Ok(FieldElement::from_rational(Rational::from_str(&n.to_string())?)),
            Value::Array(parts) if parts.len() == 4 => {
                let mut comps = Vec::with_capacity(4);
                for p in parts {
                    match p {
                        Value::String(s) => comps.push(Rational::from_str(s)?),
                        Value::Number(n) => comps.push(Rational::from_str(&n.to_string())?),
                        _ => return Err(Error::InvalidData(format!("bad field component {p}"))),
                    }
                }
                let d = comps.pop().unwrap();
                let c = comps.pop().unwrap();
                let b = comps.pop().unwrap();
                let a = comps.pop().unwrap();
                Ok(FieldElement::new(a, b, c, d))
            }
            _ => Err(Error::InvalidData(format!("expected field coefficient, got {v}"))),
        }
    }
    fn wrap_poly(p: Polynomial<Self>) -> AnyPoly {
        AnyPoly::F(p)
    }
}

// ---------------------------------------------------------------------------
// Polynomial
// ---------------------------------------------------------------------------

#[derive(Clone, PartialEq, Debug)]
pub struct Term<C> {
    pub key: u128,
    pub coeff: C,
}

/// Sparse polynomial; `terms` is strictly descending by key with no zeros.
#[derive(Clone, PartialEq)]
pub struct Polynomial<C: Coeff> {
    nvars: u8,
    terms: Vec<Term<C>>,
}

pub type PolyQ = Polynomial<Rational>;
pub type PolyF = Polynomial<FieldElement>;

impl<C: Coeff> Polynomial<C> {
    pub fn zero(nvars: u8) -> Self {
        assert!(nvars as usize <= MAX_VARS && nvars > 0);
        Polynomial { nvars, terms: Vec::new() }
    }

    pub fn constant(nvars: u8, c: C) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.push(Term { key: pack_key(&[]), coeff: c });
        }
        p
    }

    pub fn one(nvars: u8) -> Self {
        Self::constant(nvars, C::one())
    }

    /// The monomial c·x_i (0-based variable index).
    pub fn variable(nvars: u8, i: usize, c: C) -> Result<Self> {
        if i >= nvars as usize {
            return Err(Error::VarIndex(i, nvars));
        }
        let mut e = [0u8; MAX_VARS];
        e[i] = 1;
        Ok(Self::from_terms(nvars, vec![(pack_key(&e), c)]))
    }

    /// c·x^e for explicit exponents (length ≤ nvars).
    pub fn monomial(nvars: u8, exps: &[u8], c: C) -> Self {
        assert!(exps.len() <= nvars as usize);
        Self::from_terms(nvars, vec![(pack_key(exps), c)])
    }

    /// Builds from arbitrary (key, coeff) pairs: sorts, merges duplicates,
    /// drops zeros.
    pub fn from_terms(nvars: u8, mut raw: Vec<(u128, C)>) -> Self {
        assert!(nvars as usize <= MAX_VARS && nvars > 0);
        raw.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        let mut terms: Vec<Term<C>> = Vec::with_capacity(raw.len());
        for (key, coeff) in raw {
            if let Some(last) = terms.last_mut() {
                if last.key == key {
                    last.coeff = last.coeff.add(&coeff);
                    if last.coeff.is_zero() {
                        terms.pop();
                    }
                    continue;
                }
            }
            if !coeff.is_zero() {
                terms.push(Term { key, coeff });
            }
        }
        Polynomial { nvars, terms }
    }

    pub fn nvars(&self) -> u8 {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[Term<C>] {
        &self.terms
    }

    /// Leading (grevlex-largest) term.
    pub fn leading(&self) -> Option<&Term<C>> {
        self.terms.first()
    }

    /// Degree of the leading term (the maximum degree present).
    pub fn degree(&self) -> Option<u8> {
        self.terms.first().map(|t| key_degree(t.key))
    }

    /// Some(d) when all terms share total degree d; zero counts as
    /// homogeneous of any degree and reports None.
    pub fn homogeneous_degree(&self) -> Option<u8> {
        let d = key_degree(self.terms.first()?.key);
        self.terms.iter().all(|t| key_degree(t.key) == d).then_some(d)
    }

    /// Coefficient lookup by key (binary search; list is descending).
    pub fn get(&self, key: u128) -> Option<&C> {
        self.terms
            .binary_search_by(|t| t.key.cmp(&key).reverse())
            .ok()
            .map(|i| &self.terms[i].coeff)
    }

    fn check_nvars(&self, o: &Self) -> Result<()> {
        if self.nvars != o.nvars {
            return Err(Error::NvarsMismatch(self.nvars, o.nvars));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check_nvars(o)?;
        let mut terms = Vec::with_capacity(self.terms.len() + o.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < o.terms.len() {
            let (a, b) = (&self.terms[i], &o.terms[j]);
            match a.key.cmp(&b.key) {
                std::cmp::Ordering::Greater => {
                    terms.push(a.clone());
                    i += 1;
                }
                std::cmp::Ordering::Less => {
                    terms.push(b.clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = a.coeff.add(&b.coeff);
                    if !c.is_zero() {
                        terms.push(Term { key: a.key, coeff: c });
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        terms.extend_from_slice(&self.terms[i..]);
        terms.extend(o.terms[j..].iter().cloned());
        Ok(Polynomial { nvars: self.nvars, terms })
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|t| Term { key: t.key, coeff: t.coeff.neg() }).collect(),
        }
    }

    pub fn mul_scalar(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|t| Term { key: t.key, coeff: t.coeff.mul(c) })
                .filter(|t| !t.coeff.is_zero())
                .collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.check_nvars(o)?;
        if self.is_zero() || o.is_zero() {
            return Ok(Self::zero(self.nvars));
        }
        // Iterate the shorter operand outermost so the accumulator stays hot.
        let (small, large) = if self.terms.len() <= o.terms.len() { (self, o) } else { (o, self) };
        let mut acc: HashMap<u128, C> = HashMap::with_capacity(large.terms.len() * 2);
        for ts in &small.terms {
            for tl in &large.terms {
                let key = key_mul(ts.key, tl.key);
                let prod = ts.coeff.mul(&tl.coeff);
                match acc.entry(key) {
                    std::collections::hash_map::Entry::Occupied(mut e) => {
                        let v = e.get().add(&prod);
                        if v.is_zero() {
                            e.remove();
                        } else {
                            *e.get_mut() = v;
                        }
                    }
                    std::collections::hash_map::Entry::Vacant(e) => {
                        if !prod.is_zero() {
                            e.insert(prod);
                        }
                    }
                }
            }
        }
        let mut terms: Vec<Term<C>> = acc.into_iter().map(|(key, coeff)| Term { key, coeff }).collect();
        terms.sort_unstable_by(|a, b| b.key.cmp(&a.key));
        Ok(Polynomial { nvars: self.nvars, terms })
    }

    /// Binary exponentiation; p^0 = 1.
    pub fn pow(&self, k: u32) -> Result<Self> {
        if k == 0 {
            return Ok(Self::one(self.nvars));
        }
        let mut base = self.clone();
        let mut exp = k;
        let mut acc: Option<Self> = None;
        loop {
            if exp & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul(&base)?,
                });
            }
            exp >>= 1;
            if exp == 0 {
                break;
            }
            base = base.mul(&base)?;
        }
        Ok(acc.unwrap())
    }

    /// Exact ∂/∂x_i (0-based index).
    pub fn derivative(&self, i: usize) -> Result<Self> {
        if i >= self.nvars as usize {
            return Err(Error::VarIndex(i, self.nvars));
        }
        let mut terms = Vec::new();
        for t in &self.terms {
            let (mut e, _) = unpack_key(t.key);
            if e[i] == 0 {
                continue;
            }
            let factor = BigInt::from(e[i]);
            e[i] -= 1;
            terms.push(Term { key: pack_key(&e), coeff: t.coeff.mul_bigint(&factor) });
        }
        // Lowering one exponent does not preserve grevlex order in general.
        terms.sort_unstable_by(|a, b| b.key.cmp(&a.key));
        Ok(Polynomial { nvars: self.nvars, terms })
    }

    /// Exact evaluation at a point (length must equal nvars).
    pub fn eval(&self, point: &[C]) -> Result<C> {
        if point.len() != self.nvars as usize {
            return Err(Error::PointLength(point.len(), self.nvars));
        }
        // Per-variable power tables up to the max exponent present.
        let mut max_e = [0u8; MAX_VARS];
        for t in &self.terms {
            let (e, _) = unpack_key(t.key);
            for i in 0..self.nvars as usize {
                max_e[i] = max_e[i].max(e[i]);
            }
        }
        let mut powers: Vec<Vec<C>> = Vec::with_capacity(self.nvars as usize);
        for i in 0..self.nvars as usize {
            let mut row = Vec::with_capacity(max_e[i] as usize + 1);
            row.push(C::one());
            for k in 1..=max_e[i] as usize {
                let next = row[k - 1].mul(&point[i]);
                row.push(next);
            }
            powers.push(row);
        }
        let mut total = C::zero();
        for t in &self.terms {
            let (e, _) = unpack_key(t.key);
            let mut v = t.coeff.clone();
            for i in 0..self.nvars as usize {
                if e[i] > 0 {
                    v = v.mul(&powers[i][e[i] as usize]);
                }
            }
            total = total.add(&v);
        }
        Ok(total)
    }

    /// Splits p = s·q with q having coprime integer coefficients and positive
    /// leading coefficient. Requires all-rational coefficients.
    pub fn content_primitive(&self) -> Result<(Rational, Self)> {
        use num_integer::Integer;
        use num_traits::{One, Zero};
        if self.is_zero() {
            return Err(Error::InvalidData("content of the zero polynomial".into()));
        }
        let mut gcd_num = num_bigint::BigInt::zero();
        let mut lcm_den = num_bigint::BigInt::one();
        for t in &self.terms {
            let r = t.coeff.as_rational().ok_or_else(|| {
                Error::IrrationalCoefficient(format!(
                    "monomial {:?} has coefficient {:?}",
                    Monomial::from_key(t.key).exps,
                    t.coeff
                ))
            })?;
            gcd_num = gcd_num.gcd(r.numerator());
            lcm_den = lcm_den.lcm(r.denominator());
        }
        let mut content = Rational::new(gcd_num, lcm_den);
        let leading = self.terms[0].coeff.as_rational().expect("checked above");
        if leading.is_negative() {
            content = content.neg();
        }
        let inv = content.inv()?;
        let prim = self.mul_scalar(&C::from_rational(inv));
        Ok((content, prim))
    }

    /// Applies a map to every coefficient, dropping zeros (order unchanged).
    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Polynomial<D> {
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|t| Term { key: t.key, coeff: f(&t.coeff) })
                .filter(|t| !t.coeff.is_zero())
                .collect(),
        }
    }

    /// JSON per the interchange schema. Degree is the homogeneous degree
    /// (0 for the zero polynomial); mixed-degree polynomials are not
    /// exported by this crate.
    pub fn to_json(&self) -> Value {
        let degree = self.homogeneous_degree().or(self.degree()).unwrap_or(0);
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|t| {
                let (e, _) = unpack_key(t.key);
                json!({
                    "e": e[..self.nvars as usize].to_vec(),
                    "c": t.coeff.to_json(),
                })
            })
            .collect();
        json!({ "nvars": self.nvars, "degree": degree, "terms": terms })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| Error::InvalidData("polynomial must be an object".into()))?;
        let nvars = obj
            .get("nvars")
            .and_then(Value::as_u64)
            .filter(|&n| n >= 1 && n <= MAX_VARS as u64)
            .ok_or_else(|| Error::InvalidData("bad nvars".into()))? as u8;
        let terms_v = obj
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::InvalidData("missing terms".into()))?;
        let mut raw = Vec::with_capacity(terms_v.len());
        for tv in terms_v {
            let e_v = tv
                .get("e")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::InvalidData("term missing exponents".into()))?;
            if e_v.len() != nvars as usize {
                return Err(Error::InvalidData(format!(
                    "exponent tuple has length {}, expected {}",
                    e_v.len(),
                    nvars
                )));
            }
            let mut e = [0u8; MAX_VARS];
            for (i, x) in e_v.iter().enumerate() {
                let n = x
                    .as_u64()
                    .filter(|&n| n <= 255)
                    .ok_or_else(|| Error::InvalidData(format!("bad exponent {x}")))?;
                e[i] = n as u8;
            }
            let c = C::from_json(tv.get("c").ok_or_else(|| Error::InvalidData("term missing coefficient".into()))?)?;
            raw.push((pack_key(&e[..nvars as usize]), c));
        }
        let p = Self::from_terms(nvars, raw);
        if let Some(d) = obj.get("degree").and_then(Value::as_u64) {
            if !p.is_zero() && p.homogeneous_degree() != Some(d as u8) {
                return Err(Error::InvalidData(format!("declared degree {d} does not match terms")));
            }
        }
        Ok(p)
    }

    /// Plain-text rendering: one term per line, exponent tuple then
    /// coefficient, in grevlex order.
    pub fn render_text(&self, out: &mut String) {
        use fmt::Write;
        for t in &self.terms {
            let (e, _) = unpack_key(t.key);
            let exps: Vec<String> = e[..self.nvars as usize].iter().map(|x| x.to_string()).collect();
            writeln!(out, "  [{}] {}", exps.join(" "), t.coeff).unwrap();
        }
    }
}

impl<C: Coeff> fmt::Debug for Polynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for t in self.terms.iter().take(12) {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let (e, _) = unpack_key(t.key);
            write!(f, "({})x^{:?}", t.coeff, &e[..self.nvars as usize])?;
        }
        if self.terms.len() > 12 {
            write!(f, " + ... ({} terms)", self.terms.len())?;
        }
        Ok(())
    }
}

/// Converts a rational polynomial into the field representation.
pub fn to_field_poly(p: &PolyQ) -> PolyF {
    p.map_coeffs(|c| FieldElement::from_rational(c.clone()))
}

/// Converts a field polynomial to rational coefficients; errors if any
/// coefficient has a nonzero irrational component.
pub fn to_rational_poly(p: &PolyF) -> Result<PolyQ> {
    let mut raw = Vec::with_capacity(p.num_terms());
    for t in p.terms() {
        let r = t.coeff.as_rational().ok_or_else(|| {
            Error::IrrationalCoefficient(format!(
                "monomial {:?} has coefficient {}",
                Monomial::from_key(t.key).exps,
                t.coeff
            ))
        })?;
        raw.push((t.key, r.clone()));
    }
    Ok(PolyQ::from_terms(p.nvars(), raw))
}

/// Either coefficient representation behind one type, for module boundaries
/// and serialization. Rational is the fast path; the field representation is
/// required only where √2/√3 coefficients genuinely occur (E6).
#[derive(Clone, PartialEq, Debug)]
pub enum AnyPoly {
    Q(PolyQ),
    F(PolyF),
}

impl AnyPoly {
    pub fn nvars(&self) -> u8 {
        match self {
            AnyPoly::Q(p) => p.nvars(),
            AnyPoly::F(p) => p.nvars(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            AnyPoly::Q(p) => p.is_zero(),
            AnyPoly::F(p) => p.is_zero(),
        }
    }

    pub fn num_terms(&self) -> usize {
        match self {
            AnyPoly::Q(p) => p.num_terms(),
            AnyPoly::F(p) => p.num_terms(),
        }
    }

    pub fn homogeneous_degree(&self) -> Option<u8> {
        match self {
            AnyPoly::Q(p) => p.homogeneous_degree(),
            AnyPoly::F(p) => p.homogeneous_degree(),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            AnyPoly::Q(p) => p.to_json(),
            AnyPoly::F(p) => p.to_json(),
        }
    }

    /// Sniffs the coefficient shape: 4-tuples mean field coefficients.
    pub fn from_json(v: &Value) -> Result<Self> {
        let is_field = v
            .get("terms")
            .and_then(Value::as_array)
            .map(|ts| ts.iter().any(|t| t.get("c").map(Value::is_array).unwrap_or(false)))
            .unwrap_or(false);
        if is_field {
            Ok(AnyPoly::F(PolyF::from_json(v)?))
        } else {
            Ok(AnyPoly::Q(PolyQ::from_json(v)?))
        }
    }

    pub fn as_field(&self) -> PolyF {
        match self {
            AnyPoly::Q(p) => to_field_poly(p),
            AnyPoly::F(p) => p.clone(),
        }
    }

    pub fn render_text(&self, out: &mut String) {
        match self {
            AnyPoly::Q(p) => p.render_text(out),
            AnyPoly::F(p) => p.render_text(out),
        }
    }
}
