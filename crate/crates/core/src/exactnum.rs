//! Exact scalar arithmetic: arbitrary-precision rationals, the real quartic
//! field Q(√2, √3), and square-root radicals kept in lowest form.
//!
//! `Rational` is always stored canonically (coprime numerator/denominator,
//! positive denominator). `FieldElement` represents a + b√2 + c√3 + d√6 with
//! canonical rational components, which makes equality and zero tests
//! component-wise. `Radical` represents s·√r with r a positive square-free
//! integer, the shape in which normalization factors are reported; radicals
//! are never expanded into `FieldElement`s.
//!
//! All values are immutable in spirit: every operation returns a fresh
//! canonical value, and everything is `Send + Sync`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Rational
// ---------------------------------------------------------------------------

/// Arbitrary-precision rational in lowest terms with positive denominator.
/// Zero is represented as 0/1.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rational {
    num: BigInt,
    den: BigInt,
}

impl Rational {
    /// Builds `num/den` in canonical form. Panics if `den` is zero; a zero
    /// denominator is a programming error, not recoverable input.
    pub fn new(num: BigInt, den: BigInt) -> Self {
        assert!(!den.is_zero(), "rational with zero denominator");
        let mut r = Rational { num, den };
        r.reduce();
        r
    }

    pub fn from_int(n: i64) -> Self {
        Rational { num: BigInt::from(n), den: BigInt::one() }
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Rational { num: n, den: BigInt::one() }
    }

    /// `n/d` from machine integers; `d` must be nonzero.
    pub fn ratio(n: i64, d: i64) -> Self {
        Self::new(BigInt::from(n), BigInt::from(d))
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    fn reduce(&mut self) {
        if self.den.is_negative() {
            self.num = -std::mem::take(&mut self.num);
            self.den = -std::mem::take(&mut self.den);
        }
        if self.num.is_zero() {
            self.den = BigInt::one();
            return;
        }
        if !self.den.is_one() {
            let g = self.num.gcd(&self.den);
            if !g.is_one() {
                self.num /= &g;
                self.den /= &g;
            }
        }
    }

    pub fn numerator(&self) -> &BigInt {
        &self.num
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num.is_one()
    }

    pub fn is_integer(&self) -> bool {
        self.den.is_one()
    }

    pub fn is_negative(&self) -> bool {
        self.num.is_negative()
    }

    /// -1, 0, or +1.
    pub fn signum(&self) -> i8 {
        match self.num.sign() {
            num_bigint::Sign::Minus => -1,
            num_bigint::Sign::NoSign => 0,
            num_bigint::Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Self {
        Rational { num: self.num.abs(), den: self.den.clone() }
    }

    pub fn neg(&self) -> Self {
        Rational { num: -&self.num, den: self.den.clone() }
    }

    pub fn add(&self, other: &Self) -> Self {
        // den == 1 on both sides is by far the hottest case (integer
        // coefficient streams); it needs no gcd at all.
        if self.den.is_one() && other.den.is_one() {
            return Rational { num: &self.num + &other.num, den: BigInt::one() };
        }
        Self::new(&self.num * &other.den + &other.num * &self.den, &self.den * &other.den)
    }

    pub fn sub(&self, other: &Self) -> Self {
        if self.den.is_one() && other.den.is_one() {
            return Rational { num: &self.num - &other.num, den: BigInt::one() };
        }
        Self::new(&self.num * &other.den - &other.num * &self.den, &self.den * &other.den)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.num.is_zero() || other.num.is_zero() {
            return Self::zero();
        }
        if self.den.is_one() && other.den.is_one() {
            return Rational { num: &self.num * &other.num, den: BigInt::one() };
        }
        // Cross-reduce before multiplying to keep intermediates small.
        let g1 = self.num.gcd(&other.den);
        let g2 = other.num.gcd(&self.den);
        let num = (&self.num / &g1) * (&other.num / &g2);
        let den = (&self.den / &g2) * (&other.den / &g1);
        debug_assert!(!den.is_negative());
        Rational { num, den }
    }

    /// Multiplies by an integer, reducing against the denominator only.
    pub fn mul_bigint(&self, k: &BigInt) -> Self {
        if self.num.is_zero() || k.is_zero() {
            return Self::zero();
        }
        if self.den.is_one() {
            return Rational { num: &self.num * k, den: BigInt::one() };
        }
        let g = k.gcd(&self.den);
        Self::new((k / &g) * &self.num, &self.den / &g)
    }

    pub fn inv(&self) -> Result<Self> {
        if self.num.is_zero() {
            return Err(Error::DivisionByZero("rational inverse"));
        }
        let mut r = Rational { num: self.den.clone(), den: self.num.clone() };
        if r.den.is_negative() {
            r.num = -r.num;
            r.den = -r.den;
        }
        Ok(r)
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, exp: u32) -> Self {
        // Components are already coprime, so powers need no reduction.
        Rational { num: self.num.pow(exp), den: self.den.pow(exp) }
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        // Denominators are positive, so cross-multiplication preserves order.
        (&self.num * &other.den).cmp(&(&other.num * &self.den))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidData(format!("malformed rational {s:?}"));
        match s.split_once('/') {
            None => Ok(Rational::from_bigint(BigInt::from_str(s.trim()).map_err(|_| bad())?)),
            Some((n, d)) => {
                let num = BigInt::from_str(n.trim()).map_err(|_| bad())?;
                let den = BigInt::from_str(d.trim()).map_err(|_| bad())?;
                if den.is_zero() {
                    return Err(bad());
                }
                Ok(Rational::new(num, den))
            }
        }
    }
}

impl serde::Serialize for Rational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Rational {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Rational::from_str(&s).map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// FieldElement: a + b√2 + c√3 + d√6
// ---------------------------------------------------------------------------

/// Element of Q(√2, √3) as a + b√2 + c√3 + d√6 with canonical rational
/// components. The representation is unique, so equality is component-wise.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldElement {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub d: Rational,
}

impl FieldElement {
    pub fn new(a: Rational, b: Rational, c: Rational, d: Rational) -> Self {
        FieldElement { a, b, c, d }
    }

    pub fn from_rational(a: Rational) -> Self {
        FieldElement { a, b: Rational::zero(), c: Rational::zero(), d: Rational::zero() }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(Rational::from_int(n))
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    /// r·√2
    pub fn sqrt2(r: Rational) -> Self {
        FieldElement { a: Rational::zero(), b: r, c: Rational::zero(), d: Rational::zero() }
    }

    /// r·√3
    pub fn sqrt3(r: Rational) -> Self {
        FieldElement { a: Rational::zero(), b: Rational::zero(), c: r, d: Rational::zero() }
    }

    /// r·√6
    pub fn sqrt6(r: Rational) -> Self {
        FieldElement { a: Rational::zero(), b: Rational::zero(), c: Rational::zero(), d: r }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero() && self.d.is_zero()
    }

    /// Some(&a) when the element is rational (b = c = d = 0).
    pub fn as_rational(&self) -> Option<&Rational> {
        if self.b.is_zero() && self.c.is_zero() && self.d.is_zero() {
            Some(&self.a)
        } else {
            None
        }
    }

    /// Components in basis order (1, √2, √3, √6).
    pub fn components(&self) -> [&Rational; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn add(&self, o: &Self) -> Self {
        FieldElement {
            a: self.a.add(&o.a),
            b: self.b.add(&o.b),
            c: self.c.add(&o.c),
            d: self.d.add(&o.d),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        FieldElement {
            a: self.a.sub(&o.a),
            b: self.b.sub(&o.b),
            c: self.c.sub(&o.c),
            d: self.d.sub(&o.d),
        }
    }

    pub fn neg(&self) -> Self {
        FieldElement { a: self.a.neg(), b: self.b.neg(), c: self.c.neg(), d: self.d.neg() }
    }

    pub fn mul_rational(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        FieldElement {
            a: self.a.mul(r),
            b: self.b.mul(r),
            c: self.c.mul(r),
            d: self.d.mul(r),
        }
    }

    pub fn mul_bigint(&self, k: &BigInt) -> Self {
        FieldElement {
            a: self.a.mul_bigint(k),
            b: self.b.mul_bigint(k),
            c: self.c.mul_bigint(k),
            d: self.d.mul_bigint(k),
        }
    }

    /// Product under √2·√3 = √6, (√2)² = 2, (√3)² = 3, (√6)² = 6.
    pub fn mul(&self, o: &Self) -> Self {
        // Rational operands short-circuit to a component scale; most
        // coefficients in practice live in a single component.
        if let Some(r) = self.as_rational() {
            return o.mul_rational(r);
        }
        if let Some(r) = o.as_rational() {
            return self.mul_rational(r);
        }
        let two = Rational::from_int(2);
        let three = Rational::from_int(3);
        let six = Rational::from_int(6);
        let (a1, b1, c1, d1) = (&self.a, &self.b, &self.c, &self.d);
        let (a2, b2, c2, d2) = (&o.a, &o.b, &o.c, &o.d);
        let a = a1.mul(a2).add(&two.mul(&b1.mul(b2))).add(&three.mul(&c1.mul(c2))).add(&six.mul(&d1.mul(d2)));
        let b = a1.mul(b2).add(&b1.mul(a2)).add(&three.mul(&c1.mul(d2).add(&d1.mul(c2))));
        let c = a1.mul(c2).add(&c1.mul(a2)).add(&two.mul(&b1.mul(d2).add(&d1.mul(b2))));
        let d = a1.mul(d2).add(&d1.mul(a2)).add(&b1.mul(c2)).add(&c1.mul(b2));
        FieldElement { a, b, c, d }
    }

    /// Multiplicative inverse via the tower Q ⊂ Q(√2) ⊂ Q(√2)(√3):
    /// with x = u + v√3 and u, v ∈ Q(√2), x⁻¹ = (u − v√3)/(u² − 3v²), and the
    /// remaining Q(√2) inverse uses the same conjugate trick one level down.
    /// This is the product-of-Galois-conjugates route in closed form.
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero("field inverse"));
        }
        // u = a + b√2, v = c + d√2 (so x = u + v√3).
        let (a, b, c, d) = (&self.a, &self.b, &self.c, &self.d);
        let three = Rational::from_int(3);
        // n = u² − 3v² = s + t√2 ∈ Q(√2).
        let two = Rational::from_int(2);
        let s = a.mul(a).add(&two.mul(&b.mul(b))).sub(&three.mul(&c.mul(c).add(&two.mul(&d.mul(d)))));
        let t = two.mul(&a.mul(b)).sub(&three.mul(&two.mul(&c.mul(d))));
        // m = s² − 2t² ∈ Q is the norm of n down to Q; nonzero since x ≠ 0.
        let m = s.mul(&s).sub(&two.mul(&t.mul(&t)));
        if m.is_zero() {
            return Err(Error::Internal("vanishing field norm for nonzero element".into()));
        }
        let m_inv = m.inv()?;
        // n⁻¹ = (s − t√2)/m.
        let ns = s.mul(&m_inv);
        let nt = t.neg().mul(&m_inv);
        // x⁻¹ = (u − v√3)·n⁻¹ = (a + b√2 − c√3 − d√6)(ns + nt√2).
        let conj = FieldElement { a: a.clone(), b: b.clone(), c: c.neg(), d: d.neg() };
        let ninv = FieldElement {
            a: ns,
            b: nt,
            c: Rational::zero(),
            d: Rational::zero(),
        };
        Ok(conj.mul(&ninv))
    }

    /// Exact sign (-1, 0, +1) of the real number this element denotes,
    /// via rational comparisons down the quadratic tower. For x = u + v√3
    /// with u, v ∈ Q(√2) of opposite signs, sign(x) = sign(u)·sign(u² − 3v²).
    pub fn signum(&self) -> i8 {
        fn sign_q2(s: &Rational, t: &Rational) -> i8 {
            // sign of s + t√2
            let ss = s.signum();
            let st = t.signum();
            if st == 0 {
                return ss;
            }
            if ss == 0 {
                return st;
            }
            if ss == st {
                return ss;
            }
            let s2 = s.mul(s);
            let t2 = t.mul(t).mul(&Rational::from_int(2));
            match s2.cmp(&t2) {
                Ordering::Greater => ss,
                Ordering::Less => st,
                Ordering::Equal => unreachable!("√2 is irrational"),
            }
        }
        let su = sign_q2(&self.a, &self.b);
        let sv = sign_q2(&self.c, &self.d);
        if sv == 0 {
            return su;
        }
        if su == 0 {
            return sv;
        }
        if su == sv {
            return su;
        }
        // u² and 3v² in Q(√2): u² = (a² + 2b²) + 2ab√2, v² = (c² + 6d²·... )
        let two = Rational::from_int(2);
        let three = Rational::from_int(3);
        let u2_s = self.a.mul(&self.a).add(&two.mul(&self.b.mul(&self.b)));
        let u2_t = two.mul(&self.a.mul(&self.b));
        let v2_s = self.c.mul(&self.c).add(&two.mul(&self.d.mul(&self.d)));
        let v2_t = two.mul(&self.c.mul(&self.d));
        let diff_s = u2_s.sub(&three.mul(&v2_s));
        let diff_t = u2_t.sub(&three.mul(&v2_t));
        let e = sign_q2(&diff_s, &diff_t);
        assert!(e != 0, "√3 is not in Q(√2)");
        if e > 0 {
            su
        } else {
            sv
        }
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (r, tag) in [(&self.a, ""), (&self.b, "*sqrt(2)"), (&self.c, "*sqrt(3)"), (&self.d, "*sqrt(6)")] {
            if r.is_zero() {
                continue;
            }
            if !first {
                write!(f, " {} ", if r.is_negative() { "-" } else { "+" })?;
                write!(f, "{}{}", r.abs(), tag)?;
            } else {
                write!(f, "{}{}", r, tag)?;
                first = false;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl serde::Serialize for FieldElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(4))?;
        for c in self.components() {
            seq.serialize_element(&c.to_string())?;
        }
        seq.end()
    }
}

impl<'de> serde::Deserialize<'de> for FieldElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let parts = <[String; 4]>::deserialize(d)?;
        let mut vals = parts.iter().map(|p| Rational::from_str(p));
        let mut next = || vals.next().unwrap().map_err(serde::de::Error::custom);
        Ok(FieldElement { a: next()?, b: next()?, c: next()?, d: next()? })
    }
}

// ---------------------------------------------------------------------------
// Radical: scale·√radicand
// ---------------------------------------------------------------------------

/// s·√r with r a positive square-free integer. r = 1 iff the value is
/// rational. Used for normalization factors, which are reported symbolically
/// rather than expanded into the number field.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Radical {
    scale: Rational,
    radicand: BigUint,
}

impl Radical {
    /// Canonicalizes s·√n by extracting the largest square factor of n into
    /// the scale. Errors when n is zero (radicands must be positive).
    pub fn simplify(scale: Rational, radicand: BigUint) -> Result<Self> {
        if radicand.is_zero() {
            return Err(Error::NonPositiveRadicand);
        }
        let (sq, rad) = square_free_split(&radicand);
        Ok(Radical {
            scale: scale.mul_bigint(&BigInt::from(sq)),
            radicand: rad,
        })
    }

    pub fn rational(scale: Rational) -> Self {
        Radical { scale, radicand: BigUint::one() }
    }

    pub fn one() -> Self {
        Self::rational(Rational::one())
    }

    /// √q for a positive rational q: √(n/d) = √(n·d)/d.
    pub fn sqrt_of_rational(q: &Rational) -> Result<Self> {
        if q.signum() <= 0 {
            return Err(Error::NonPositiveRadicand);
        }
        let n = q.numerator().to_biguint().expect("positive");
        let d = q.denominator().to_biguint().expect("positive");
        Self::simplify(Rational::new(BigInt::one(), q.denominator().clone()), n * d)
    }

    pub fn scale(&self) -> &Rational {
        &self.scale
    }

    pub fn radicand(&self) -> &BigUint {
        &self.radicand
    }

    pub fn is_zero(&self) -> bool {
        self.scale.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.radicand.is_one()
    }

    /// (s·√r)² = s²·r.
    pub fn square(&self) -> Rational {
        self.scale.pow(2).mul_bigint(&BigInt::from(self.radicand.clone()))
    }

    /// 1/(s√r) = (1/(s·r))·√r.
    pub fn inv(&self) -> Result<Self> {
        if self.scale.is_zero() {
            return Err(Error::DivisionByZero("radical inverse"));
        }
        let scale = self.scale.mul_bigint(&BigInt::from(self.radicand.clone())).inv()?;
        Ok(Radical { scale, radicand: self.radicand.clone() })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        Self::simplify(self.scale.mul(&other.scale), &self.radicand * &other.radicand)
    }

    pub fn mul_rational(&self, r: &Rational) -> Self {
        Radical { scale: self.scale.mul(r), radicand: self.radicand.clone() }
    }
}

impl fmt::Display for Radical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.radicand.is_one() || self.scale.is_zero() {
            write!(f, "{}", self.scale)
        } else if self.scale.is_one() {
            write!(f, "sqrt({})", self.radicand)
        } else {
            write!(f, "{}*sqrt({})", self.scale, self.radicand)
        }
    }
}

#[derive(serde::Serialize, serde::Deserialize)]
struct RadicalRepr {
    scale: String,
    radicand: String,
}

impl serde::Serialize for Radical {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RadicalRepr { scale: self.scale.to_string(), radicand: self.radicand.to_string() }.serialize(s)
    }
}

impl<'de> serde::Deserialize<'de> for Radical {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = RadicalRepr::deserialize(d)?;
        let scale = Rational::from_str(&repr.scale).map_err(serde::de::Error::custom)?;
        let radicand = BigUint::from_str(&repr.radicand)
            .map_err(|_| serde::de::Error::custom(format!("malformed radicand {:?}", repr.radicand)))?;
        if radicand.is_zero() {
            return Err(serde::de::Error::custom("radicand must be positive"));
        }
        Ok(Radical { scale, radicand })
    }
}

// ---------------------------------------------------------------------------
// Square-free decomposition
// ---------------------------------------------------------------------------

fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        const LIMIT: usize = 1 << 16;
        let mut sieve = vec![true; LIMIT];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i < LIMIT {
            if sieve[i] {
                let mut j = i * i;
                while j < LIMIT {
                    sieve[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        (0..LIMIT).filter(|&i| sieve[i]).map(|i| i as u32).collect()
    })
}

/// Deterministic Miller-Rabin. The witness set {2, 3, 5, ..., 37} is proven
/// complete below 3.3·10²⁴, which covers every cofactor this crate can
/// produce after trial division; larger inputs fall back to the same fixed
/// witnesses as a strong probabilistic test.
pub(crate) fn is_probable_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if n < &two {
        return false;
    }
    const WITNESSES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for w in WITNESSES {
        if n == &BigUint::from(w) {
            return true;
        }
        if (n % BigUint::from(w)).is_zero() {
            return false;
        }
    }
    let n_minus_1 = n - BigUint::one();
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for w in WITNESSES {
        let mut x = BigUint::from(w).modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Brent-cycle Pollard rho; returns a nontrivial factor of an odd composite.
/// Deterministic: polynomial offsets are tried in order 1, 2, 3, ...
fn pollard_brent(n: &BigUint) -> BigUint {
    let one = BigUint::one();
    let abs_diff = |a: &BigUint, b: &BigUint| if a > b { a - b } else { b - a };
    for c in 1u64..128 {
        let cc = BigUint::from(c);
        let f = |x: &BigUint| (x * x + &cc) % n;
        let mut y = BigUint::from(2u32);
        let mut r: usize = 1;
        let mut g = BigUint::one();
        let mut x = y.clone();
        let mut ys = y.clone();
        'cycle: while g.is_one() {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0usize;
            while k < r {
                ys = y.clone();
                let batch = 128.min(r - k);
                let mut q = BigUint::one();
                for _ in 0..batch {
                    y = f(&y);
                    q = (q * abs_diff(&x, &y)) % n;
                }
                g = q.gcd(n);
                k += batch;
                if !g.is_one() {
                    break 'cycle;
                }
            }
            r *= 2;
            if r > 1 << 24 {
                break;
            }
        }
        if g == *n {
            // The batch collapsed several factors at once; replay stepwise.
            loop {
                ys = f(&ys);
                let d = abs_diff(&x, &ys);
                if d.is_zero() {
                    break; // true cycle; try the next offset
                }
                g = d.gcd(n);
                if !g.is_one() {
                    break;
                }
            }
        }
        if g > one && &g < n {
            return g;
        }
    }
    panic!("pollard rho failed to split a composite; offsets exhausted");
}

fn factor_rec(n: BigUint, out: &mut Vec<BigUint>) {
    if n.is_one() {
        return;
    }
    if is_probable_prime(&n) {
        out.push(n);
        return;
    }
    // Perfect powers of primes show up often (square parts); peel squares
    // cheaply before running rho.
    let r = n.sqrt();
    if &r * &r == n {
        factor_rec(r.clone(), out);
        factor_rec(r, out);
        return;
    }
    let d = pollard_brent(&n);
    factor_rec(&n / &d, out);
    factor_rec(d, out);
}

/// Splits positive n as n = s²·r with r square-free; returns (s, r).
pub fn square_free_split(n: &BigUint) -> (BigUint, BigUint) {
    assert!(!n.is_zero(), "square-free split of zero");
    let mut cofactor = n.clone();
    let mut s = BigUint::one();
    let mut r = BigUint::one();
    for &p in small_primes() {
        let pp = BigUint::from(p);
        if &pp * &pp > cofactor {
            break;
        }
        let mut mult = 0u32;
        while (&cofactor % &pp).is_zero() {
            cofactor /= &pp;
            mult += 1;
        }
        if mult > 0 {
            s *= pp.pow(mult / 2);
            if mult % 2 == 1 {
                r *= &pp;
            }
        }
    }
    if !cofactor.is_one() {
        let mut large = Vec::new();
        factor_rec(cofactor, &mut large);
        large.sort();
        let mut i = 0;
        while i < large.len() {
            let mut j = i;
            while j < large.len() && large[j] == large[i] {
                j += 1;
            }
            let mult = (j - i) as u32;
            s *= large[i].pow(mult / 2);
            if mult % 2 == 1 {
                r *= &large[i];
            }
            i = j;
        }
    }
    (s, r)
}

/// Convenience: u64 view of a BigUint when it fits (used by tests).
pub fn to_u64(n: &BigUint) -> Option<u64> {
    n.to_u64()
}
