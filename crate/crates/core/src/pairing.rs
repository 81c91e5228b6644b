//! The differential pairing p(∂)q on homogeneous polynomials.
//!
//! Substituting ∂/∂x_i for x_i in p and applying the resulting constant-
//! coefficient operator to q gives a bilinear map that drops degree by
//! deg p. For equal degrees it is a scalar product under which distinct
//! monomials are orthogonal and ⟨x^α, x^α⟩ = α!; that diagonal form makes
//! norms cheap, and the canonical-basis construction is a sequence of
//! orthogonality conditions in this pairing.
//!
//! The kernel here is *result-major*: it enumerates every monomial γ the
//! result could contain and accumulates its coefficient with binary-search
//! lookups into the operand,
//!
//! ```text
//! coeff(γ) = Σ_α  p[α] · q[α+γ] · Π_i (α_i+γ_i)(α_i+γ_i−1)⋯(γ_i+1)
//! ```
//!
//! which visits candidates in one deterministic sorted pass and never
//! rehashes intermediate terms. When both inputs have a uniform per-variable
//! exponent parity (true for every group here except E6), the parity of γ is
//! forced and the candidate set shrinks by a factor of ~2^rank, which is what
//! makes the largest E8 systems tractable.
//!
//! All falling factorials stay inside `u128`: every product that appears is
//! bounded by (deg q)! ≤ 30! < 2^128.

use std::sync::OnceLock;

use num_bigint::BigInt;

use crate::poly::{key_mul, pack_key, unpack_key, Coeff, Polynomial, MAX_VARS};
use crate::{Error, Result};

/// Largest single value n for which falling factorials are tabulated.
pub const MAX_FALL: usize = 30;

/// FALL[n][k] = n·(n−1)⋯(n−k+1); FALL[n][0] = 1.
fn fall_table() -> &'static Vec<[u128; MAX_FALL + 1]> {
    static TABLE: OnceLock<Vec<[u128; MAX_FALL + 1]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = vec![[0u128; MAX_FALL + 1]; MAX_FALL + 1];
        for n in 0..=MAX_FALL {
            t[n][0] = 1;
            for k in 1..=n {
                t[n][k] = t[n][k - 1] * (n - k + 1) as u128;
            }
        }
        t
    })
}

/// n·(n−1)⋯(n−k+1) as u128; zero when k > n. Panics past [`MAX_FALL`].
#[inline]
pub fn falling(n: u8, k: u8) -> u128 {
    if k > n {
        return 0;
    }
    fall_table()[n as usize][k as usize]
}

/// α! = Π α_i! for a packed monomial key; fits u128 for total degree ≤ 30.
#[inline]
pub fn monomial_factorial(key: u128) -> u128 {
    let (e, _) = unpack_key(key);
    let mut f: u128 = 1;
    for x in e {
        f *= falling(x, x).max(1);
    }
    f
}

/// Per-variable exponent parity when it is uniform across all terms.
pub fn parity_signature<C: Coeff>(p: &Polynomial<C>) -> Option<[u8; MAX_VARS]> {
    let first = p.terms().first()?;
    let (e0, _) = unpack_key(first.key);
    let mut sig = [0u8; MAX_VARS];
    for i in 0..MAX_VARS {
        sig[i] = e0[i] & 1;
    }
    for t in &p.terms()[1..] {
        let (e, _) = unpack_key(t.key);
        for i in 0..MAX_VARS {
            if e[i] & 1 != sig[i] {
                return None;
            }
        }
    }
    Some(sig)
}

/// All packed monomial keys of the given total degree, descending (grevlex
/// order), optionally restricted to a fixed per-variable parity.
pub fn monomials_of_degree(nvars: u8, degree: u8, parity: Option<[u8; MAX_VARS]>) -> Vec<u128> {
    let n = nvars as usize;
    let mut out = Vec::new();
    let mut exps = [0u8; MAX_VARS];
    fn rec(
        i: usize,
        n: usize,
        rem: u16,
        exps: &mut [u8; MAX_VARS],
        parity: &Option<[u8; MAX_VARS]>,
        out: &mut Vec<u128>,
    ) {
        if i == n - 1 {
            if rem <= 255 {
                let ok = match parity {
                    Some(sig) => rem as u8 & 1 == sig[i],
                    None => true,
                };
                if ok {
                    exps[i] = rem as u8;
                    out.push(pack_key(&exps[..n]));
                    exps[i] = 0;
                }
            }
            return;
        }
        let start = match parity {
            Some(sig) => sig[i] as u16,
            None => 0,
        };
        let step = if parity.is_some() { 2 } else { 1 };
        let mut e = start;
        while e <= rem {
            exps[i] = e as u8;
            rec(i + 1, n, rem - e, exps, parity, out);
            e += step;
        }
        exps[i] = 0;
    }
    rec(0, n, degree as u16, &mut exps, &parity, &mut out);
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

/// Parity that γ must have so that α + γ can land in the operand's support.
pub fn gamma_parity(
    op_sig: Option<[u8; MAX_VARS]>,
    f_sig: Option<[u8; MAX_VARS]>,
) -> Option<[u8; MAX_VARS]> {
    let (a, b) = (op_sig?, f_sig?);
    let mut g = [0u8; MAX_VARS];
    for i in 0..MAX_VARS {
        g[i] = (a[i] + b[i]) & 1;
    }
    Some(g)
}

/// Applies op(∂) to f. Both inputs must be homogeneous; the result is
/// homogeneous of degree deg f − deg op (zero when deg op > deg f).
pub fn apply_diff_op<C: Coeff>(op: &Polynomial<C>, f: &Polynomial<C>) -> Result<Polynomial<C>> {
    if op.nvars() != f.nvars() {
        return Err(Error::NvarsMismatch(op.nvars(), f.nvars()));
    }
    if op.is_zero() || f.is_zero() {
        return Ok(Polynomial::zero(f.nvars()));
    }
    let d_op = op
        .homogeneous_degree()
        .ok_or_else(|| Error::InvalidData("differential operator must be homogeneous".into()))?;
    let d_f = f
        .homogeneous_degree()
        .ok_or_else(|| Error::InvalidData("operand must be homogeneous".into()))?;
    if d_op > d_f {
        return Ok(Polynomial::zero(f.nvars()));
    }
    let parity = gamma_parity(parity_signature(op), parity_signature(f));
    let candidates = monomials_of_degree(f.nvars(), d_f - d_op, parity);

    // Unpack operator exponents once.
    let op_terms: Vec<([u8; MAX_VARS], &C)> = op
        .terms()
        .iter()
        .map(|t| {
            let (e, _) = unpack_key(t.key);
            (e, &t.coeff)
        })
        .collect();

    let mut raw: Vec<(u128, C)> = Vec::new();
    for &gamma in &candidates {
        let (ge, _) = unpack_key(gamma);
        let mut s = C::zero();
        let mut any = false;
        for (ae, c) in &op_terms {
            let target = key_mul(pack_key(ae), gamma);
            if let Some(cf) = f.get(target) {
                let mut ff: u128 = 1;
                for i in 0..MAX_VARS {
                    if ae[i] > 0 {
                        ff *= falling(ae[i] + ge[i], ae[i]);
                    }
                }
                s = s.add(&c.mul(cf).mul_bigint(&BigInt::from(ff)));
                any = true;
            }
        }
        if any && !s.is_zero() {
            raw.push((gamma, s));
        }
    }
    Ok(Polynomial::from_terms(f.nvars(), raw))
}

/// Coefficient of the single monomial γ in op(∂)f, without materializing the
/// whole result. Exactly the inner sum of [`apply_diff_op`].
pub fn apply_diff_entry<C: Coeff>(op: &Polynomial<C>, f: &Polynomial<C>, gamma: u128) -> C {
    let (ge, _) = unpack_key(gamma);
    let mut s = C::zero();
    for t in op.terms() {
        let (ae, _) = unpack_key(t.key);
        let target = key_mul(t.key, gamma);
        if let Some(cf) = f.get(target) {
            let mut ff: u128 = 1;
            for i in 0..MAX_VARS {
                if ae[i] > 0 {
                    ff *= falling(ae[i] + ge[i], ae[i]);
                }
            }
            s = s.add(&t.coeff.mul(cf).mul_bigint(&BigInt::from(ff)));
        }
    }
    s
}

/// The scalar pairing of two homogeneous polynomials of equal degree:
/// Σ_α p[α]·q[α]·α!. Distinct monomials are orthogonal, so this is a single
/// sorted merge over the two term lists.
pub fn pairing_scalar<C: Coeff>(p: &Polynomial<C>, q: &Polynomial<C>) -> Result<C> {
    if p.nvars() != q.nvars() {
        return Err(Error::NvarsMismatch(p.nvars(), q.nvars()));
    }
    if p.is_zero() || q.is_zero() {
        return Ok(C::zero());
    }
    let dp = p
        .homogeneous_degree()
        .ok_or_else(|| Error::InvalidData("pairing requires homogeneous inputs".into()))?;
    let dq = q
        .homogeneous_degree()
        .ok_or_else(|| Error::InvalidData("pairing requires homogeneous inputs".into()))?;
    if dp != dq {
        return Err(Error::DegreeMismatch(dp, dq));
    }
    let (mut i, mut j) = (0, 0);
    let (pt, qt) = (p.terms(), q.terms());
    let mut total = C::zero();
    while i < pt.len() && j < qt.len() {
        match pt[i].key.cmp(&qt[j].key) {
            std::cmp::Ordering::Greater => i += 1,
            std::cmp::Ordering::Less => j += 1,
            std::cmp::Ordering::Equal => {
                let f = BigInt::from(monomial_factorial(pt[i].key));
                total = total.add(&pt[i].coeff.mul(&qt[j].coeff).mul_bigint(&f));
                i += 1;
                j += 1;
            }
        }
    }
    Ok(total)
}

/// ‖p‖² = Σ_α p[α]²·α! in the differential pairing.
pub fn norm_sq<C: Coeff>(p: &Polynomial<C>) -> C {
    let mut total = C::zero();
    for t in p.terms() {
        let f = BigInt::from(monomial_factorial(t.key));
        total = total.add(&t.coeff.mul(&t.coeff).mul_bigint(&f));
    }
    total
}

/// Reference implementation of op(∂)f by literally iterating single
/// derivatives; quadratic and slow, kept as an independent cross-check.
pub fn naive_diff_op<C: Coeff>(op: &Polynomial<C>, f: &Polynomial<C>) -> Result<Polynomial<C>> {
    if op.nvars() != f.nvars() {
        return Err(Error::NvarsMismatch(op.nvars(), f.nvars()));
    }
    let mut total = Polynomial::zero(f.nvars());
    for t in op.terms() {
        let (e, _) = unpack_key(t.key);
        let mut g = f.clone();
        for (i, &ei) in e.iter().enumerate() {
            for _ in 0..ei {
                g = g.derivative(i)?;
            }
        }
        total = total.add(&g.mul_scalar(&t.coeff))?;
    }
    Ok(total)
}
