//! Canonical bases of invariant polynomials via differential conditions.
//!
//! For each basic degree d_a the canonical invariant h_a is the weighted
//! combination h_a = Σ_m z_m q^(m) of products of the rescaled basic
//! invariants that every lower-degree basic invariant annihilates as a
//! differential operator: q_c(∂) h_a = 0 whenever d_c < d_a. Expanding each
//! identity monomial by monomial gives a linear system for z whose null space
//! has dimension equal to the multiplicity of d_a among the basic degrees
//! (one everywhere except the tied degree-4 pair of D4). Rows are eliminated
//! fraction-free over the integers, so every intermediate stays exact.
//!
//! The two largest systems (E8 at degrees 24 and 30) are first triaged modulo
//! a 63-bit prime: the modular pass picks a maximal independent subset of
//! rows, only those rows are recomputed exactly, and every condition that was
//! not fully enforced exactly is re-checked on the final h by an exact
//! application of q_c(∂). Independence mod p implies independence over Q, so
//! an unlucky prime can shrink the selected set (detected and retried with
//! the next prime) but never smuggle in a wrong answer.

use std::collections::HashMap;
use std::rc::Rc;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::exactnum::{Radical, Rational};
use crate::groups::{build_p_basis, rescale_to_q, BasisSet, GroupName, GroupSpec};
use crate::pairing::{
    apply_diff_entry, apply_diff_op, falling, gamma_parity, monomials_of_degree, norm_sq,
    pairing_scalar, parity_signature,
};
use crate::poly::{pack_key, unpack_key, AnyPoly, Coeff, PolyF, Polynomial, MAX_VARS};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Ansatz
// ---------------------------------------------------------------------------

/// The monomial scaffold for one target degree: every multiset of basic
/// degrees summing to it, as multiplicity vectors over the basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Ansatz {
    pub degree: u8,
    /// Multiplicity vectors m with Σ m_a d_a = degree, one entry per basic
    /// invariant. Ordered ascending lexicographically on the reversed vector,
    /// which places the pure term of the highest participating degree last.
    pub monomials: Vec<Vec<u8>>,
}

impl Ansatz {
    pub fn new(degrees: &[u8], degree: u8) -> Self {
        Ansatz {
            degree,
            monomials: weighted_monomials(degrees, degree),
        }
    }
}

/// All multiplicity vectors m ≥ 0 with Σ m_a degrees[a] = d, in ascending
/// lexicographic order of the reversed vector (m_n, ..., m_1).
pub fn weighted_monomials(degrees: &[u8], d: u8) -> Vec<Vec<u8>> {
    fn rec(degrees: &[u8], idx: usize, rem: u8, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if idx == 0 {
            let d0 = degrees[0];
            if rem % d0 == 0 {
                cur[0] = rem / d0;
                out.push(cur.clone());
                cur[0] = 0;
            }
            return;
        }
        let da = degrees[idx];
        for m in 0..=(rem / da) {
            cur[idx] = m;
            rec(degrees, idx - 1, rem - m * da, cur, out);
        }
        cur[idx] = 0;
    }
    let mut out = Vec::new();
    let mut cur = vec![0u8; degrees.len()];
    rec(degrees, degrees.len() - 1, d, &mut cur, &mut out);
    out
}

// ---------------------------------------------------------------------------
// Product cache
// ---------------------------------------------------------------------------

/// Memoized products q^(m) = Π q_a^{m_a}, shared across target degrees so the
/// power chains (q1, q1², ...) are each expanded once.
pub struct ProductCache<C: Coeff> {
    q: Vec<Polynomial<C>>,
    memo: HashMap<Vec<u8>, Rc<Polynomial<C>>>,
}

impl<C: Coeff> ProductCache<C> {
    pub fn new(q: Vec<Polynomial<C>>) -> Self {
        ProductCache {
            q,
            memo: HashMap::new(),
        }
    }

    pub fn q_basis(&self) -> &[Polynomial<C>] {
        &self.q
    }

    pub fn product(&mut self, m: &[u8]) -> Result<Rc<Polynomial<C>>> {
        if let Some(p) = self.memo.get(m) {
            return Ok(p.clone());
        }
        let nv = self.q[0].nvars();
        let prod = match m.iter().rposition(|&e| e > 0) {
            None => Rc::new(Polynomial::one(nv)),
            Some(hi) => {
                let mut rest = m.to_vec();
                rest[hi] -= 1;
                let base = self.product(&rest)?;
                Rc::new(base.mul(&self.q[hi])?)
            }
        };
        self.memo.insert(m.to_vec(), prod.clone());
        Ok(prod)
    }
}

// ---------------------------------------------------------------------------
// Incremental fraction-free elimination
// ---------------------------------------------------------------------------

/// Row-echelon accumulator over the integers. Rows arrive one at a time, are
/// reduced against the existing pivots by cross-multiplication, stripped to
/// primitive form, and kept only if they grow the rank, so memory stays
/// proportional to the rank rather than the row count.
pub struct EliminationState {
    ncols: usize,
    /// Sorted by ascending pivot column; entries left of a row's pivot are 0.
    rows: Vec<EchelonRow>,
}

struct EchelonRow {
    pivot: usize,
    entries: Vec<BigInt>,
}

fn strip_content(row: &mut [BigInt]) {
    let mut g = BigInt::zero();
    for x in row.iter() {
        if !x.is_zero() {
            g = g.gcd(x);
            if g.is_one() {
                return;
            }
        }
    }
    if g.is_zero() || g.is_one() {
        return;
    }
    for x in row.iter_mut() {
        *x = &*x / &g;
    }
}

impl EliminationState {
    pub fn new(ncols: usize) -> Self {
        EliminationState {
            ncols,
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Clears denominators and feeds the row in; true if the rank grew.
    pub fn add_rational_row(&mut self, row: &[Rational]) -> bool {
        let mut l = BigInt::one();
        for x in row {
            l = l.lcm(x.denominator());
        }
        let ints = row
            .iter()
            .map(|x| x.numerator() * (&l / x.denominator()))
            .collect();
        self.add_integer_row(ints)
    }

    pub fn add_integer_row(&mut self, mut row: Vec<BigInt>) -> bool {
        debug_assert_eq!(row.len(), self.ncols);
        for er in &self.rows {
            let f = row[er.pivot].clone();
            if f.is_zero() {
                continue;
            }
            let pv = er.entries[er.pivot].clone();
            for j in 0..self.ncols {
                row[j] = &row[j] * &pv - &er.entries[j] * &f;
            }
            strip_content(&mut row);
        }
        let pivot = match row.iter().position(|x| !x.is_zero()) {
            None => return false,
            Some(j) => j,
        };
        if row[pivot].is_negative() {
            for x in &mut row {
                *x = -&*x;
            }
        }
        let at = self.rows.partition_point(|er| er.pivot < pivot);
        self.rows.insert(at, EchelonRow { pivot, entries: row });
        true
    }

    /// Basis of the solution set, one vector per free column: that coordinate
    /// is 1, the other free coordinates 0, pivots solved by back-substitution.
    pub fn null_space(&self) -> Vec<Vec<Rational>> {
        let pivots: Vec<usize> = self.rows.iter().map(|r| r.pivot).collect();
        let mut out = Vec::new();
        for f in 0..self.ncols {
            if pivots.binary_search(&f).is_ok() {
                continue;
            }
            let mut z = vec![Rational::zero(); self.ncols];
            z[f] = Rational::one();
            for er in self.rows.iter().rev() {
                let mut s = Rational::zero();
                for j in (er.pivot + 1)..self.ncols {
                    if !z[j].is_zero() && !er.entries[j].is_zero() {
                        s = s.add(&z[j].mul_bigint(&er.entries[j]));
                    }
                }
                if !s.is_zero() {
                    let pv = Rational::from_bigint(er.entries[er.pivot].clone());
                    z[er.pivot] = s.neg().div(&pv).expect("pivot entries are nonzero");
                }
            }
            out.push(z);
        }
        out
    }
}

/// Reference null-space computation: dense Gauss-Jordan over the rationals on
/// the full matrix. Slow and allocation-happy; exists to cross-check
/// [`EliminationState`], which must produce the identical basis (free-column
/// pivots are a property of the row space, not of elimination order).
pub fn null_space_dense(rows: &[Vec<Rational>], ncols: usize) -> Vec<Vec<Rational>> {
    let mut m: Vec<Vec<Rational>> = rows
        .iter()
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .cloned()
        .collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0usize;
    for c in 0..ncols {
        let hit = (r..m.len()).find(|&i| !m[i][c].is_zero());
        let Some(i) = hit else { continue };
        m.swap(r, i);
        let inv = m[r][c].inv().expect("pivot is nonzero");
        for x in &mut m[r] {
            *x = x.mul(&inv);
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..ncols {
                    let t = m[r][j].mul(&f);
                    m[i][j] = m[i][j].sub(&t);
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    let mut out = Vec::new();
    for f in 0..ncols {
        if pivots.contains(&f) {
            continue;
        }
        let mut z = vec![Rational::zero(); ncols];
        z[f] = Rational::one();
        for (ri, &pc) in pivots.iter().enumerate() {
            z[pc] = m[ri][f].neg();
        }
        out.push(z);
    }
    out
}

// ---------------------------------------------------------------------------
// Modular prefilter
// ---------------------------------------------------------------------------

/// The five largest primes below 2^63: products of two residues fit in u128,
/// and five retries are far more than the dependent-minor probability needs.
pub const SOLVER_PRIMES: [u64; 5] = [
    9_223_372_036_854_775_783,
    9_223_372_036_854_775_643,
    9_223_372_036_854_775_549,
    9_223_372_036_854_775_507,
    9_223_372_036_854_775_433,
];

/// Exact entry evaluation count above which a degree is triaged mod p first.
const PREFILTER_THRESHOLD: u128 = 40_000_000;

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn addmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 + b as u128) % p as u128) as u64
}

fn powmod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc: u64 = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, b, p);
        }
        b = mulmod(b, b, p);
        e >>= 1;
    }
    acc
}

fn inv_mod(a: u64, p: u64) -> u64 {
    powmod(a, p - 2, p)
}

fn bigint_mod(n: &BigInt, p: u64) -> u64 {
    n.mod_floor(&BigInt::from(p))
        .to_u64()
        .expect("residue fits in u64")
}

/// None when the denominator vanishes mod p, making the prime unusable.
fn rational_mod(r: &Rational, p: u64) -> Option<u64> {
    let den = bigint_mod(r.denominator(), p);
    if den == 0 {
        return None;
    }
    Some(mulmod(bigint_mod(r.numerator(), p), inv_mod(den, p), p))
}

/// Differential operator reduced mod p: exponents plus residue coefficients.
struct ModOp {
    terms: Vec<([u8; MAX_VARS], u64)>,
}

/// Operand reduced mod p: descending keys for binary-search lookup.
struct ModPoly {
    terms: Vec<(u128, u64)>,
}

fn reduce_op<C: Coeff>(p: &Polynomial<C>, prime: u64) -> Option<ModOp> {
    let mut terms = Vec::with_capacity(p.num_terms());
    for t in p.terms() {
        let c = rational_mod(t.coeff.as_rational()?, prime)?;
        if c != 0 {
            let (e, _) = unpack_key(t.key);
            terms.push((e, c));
        }
    }
    Some(ModOp { terms })
}

fn reduce_poly<C: Coeff>(p: &Polynomial<C>, prime: u64) -> Option<ModPoly> {
    let mut terms = Vec::with_capacity(p.num_terms());
    for t in p.terms() {
        let c = rational_mod(t.coeff.as_rational()?, prime)?;
        if c != 0 {
            terms.push((t.key, c));
        }
    }
    Some(ModPoly { terms })
}

/// Coefficient of γ in op(∂)f mod p; mirrors [`apply_diff_entry`].
fn diff_entry_mod(op: &ModOp, f: &ModPoly, ge: &[u8; MAX_VARS], nv: usize, p: u64) -> u64 {
    let mut acc: u64 = 0;
    for (ae, ac) in &op.terms {
        let mut te = [0u8; MAX_VARS];
        for i in 0..nv {
            te[i] = ae[i] + ge[i];
        }
        let target = pack_key(&te[..nv]);
        if let Ok(ix) = f.terms.binary_search_by(|(k, _)| k.cmp(&target).reverse()) {
            let mut ff: u128 = 1;
            for i in 0..nv {
                if ae[i] > 0 {
                    ff *= falling(te[i], ae[i]);
                }
            }
            let ffm = (ff % p as u128) as u64;
            acc = addmod(acc, mulmod(mulmod(*ac, f.terms[ix].1, p), ffm, p), p);
        }
    }
    acc
}

/// Row-echelon rank tracker mod p, same shape as [`EliminationState`].
struct ModRref {
    p: u64,
    ncols: usize,
    rows: Vec<(usize, Vec<u64>)>,
}

impl ModRref {
    fn new(ncols: usize, p: u64) -> Self {
        ModRref {
            p,
            ncols,
            rows: Vec::new(),
        }
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    fn add_row(&mut self, mut row: Vec<u64>) -> bool {
        let p = self.p;
        for (piv, ent) in &self.rows {
            let f = row[*piv];
            if f == 0 {
                continue;
            }
            let pv = ent[*piv];
            for j in 0..self.ncols {
                let a = mulmod(row[j], pv, p);
                let b = mulmod(ent[j], f, p);
                row[j] = if a >= b { a - b } else { a + p - b };
            }
        }
        let pivot = match row.iter().position(|&x| x != 0) {
            None => return false,
            Some(j) => j,
        };
        let at = self.rows.partition_point(|(pv, _)| *pv < pivot);
        self.rows.insert(at, (pivot, row));
        true
    }
}

// ---------------------------------------------------------------------------
// Degree solver
// ---------------------------------------------------------------------------

struct SolveOutcome {
    null: Vec<Vec<Rational>>,
    /// Condition indices not fully enforced during elimination (early rank
    /// stop or modular triage); re-verified exactly on the finished h.
    deferred: Vec<usize>,
}

/// Result-monomial keys that op(∂) applied to any of the products can reach,
/// parity-filtered when every operand pair pins the same parity.
fn candidate_keys<C: Coeff>(
    op: &Polynomial<C>,
    prods: &[Rc<Polynomial<C>>],
    nv: u8,
    delta: u8,
) -> Vec<u128> {
    let so = parity_signature(op);
    let mut common: Option<[u8; MAX_VARS]> = None;
    let mut uniform = so.is_some();
    if uniform {
        for pr in prods {
            match gamma_parity(so, parity_signature(pr)) {
                Some(g) => match &common {
                    None => common = Some(g),
                    Some(prev) if *prev == g => {}
                    _ => {
                        uniform = false;
                        break;
                    }
                },
                None => {
                    uniform = false;
                    break;
                }
            }
        }
    }
    monomials_of_degree(nv, delta, if uniform { common } else { None })
}

fn add_component_rows<C: Coeff>(state: &mut EliminationState, row: &[C]) {
    let ncomp = if C::RATIONAL_ONLY { 1 } else { 4 };
    for k in 0..ncomp {
        let mut any = false;
        let r: Vec<Rational> = row
            .iter()
            .map(|e| match e.component(k) {
                Some(x) => {
                    any = true;
                    x.clone()
                }
                None => Rational::zero(),
            })
            .collect();
        if any {
            state.add_rational_row(&r);
        }
    }
}

fn solve_degree<C: Coeff>(
    g: &GroupSpec,
    q: &[Polynomial<C>],
    products: &[Rc<Polynomial<C>>],
    degree: u8,
    expected_dim: usize,
    progress: &mut dyn FnMut(&str),
) -> Result<SolveOutcome> {
    let nv = g.rank;
    let ncols = products.len();
    if ncols < expected_dim {
        return Err(Error::NullSpaceDim {
            degree,
            got: ncols,
            expected: expected_dim,
        });
    }
    let target = ncols - expected_dim;
    let conds: Vec<usize> = (0..q.len()).filter(|&c| g.degrees[c] < degree).collect();
    let cands: Vec<Vec<u128>> = conds
        .iter()
        .map(|&c| candidate_keys(&q[c], products, nv, degree - g.degrees[c]))
        .collect();
    let est: u128 = conds
        .iter()
        .zip(&cands)
        .map(|(&c, ks)| q[c].num_terms() as u128 * ks.len() as u128 * ncols as u128)
        .sum();

    if C::RATIONAL_ONLY && target > 0 && est > PREFILTER_THRESHOLD {
        progress(&format!(
            "degree {degree}: {ncols} ansatz terms, est {est} exact entries, triaging mod p"
        ));
        return solve_prefiltered(g, q, products, degree, target, &conds, &cands, progress);
    }

    let mut state = EliminationState::new(ncols);
    let mut deferred: Vec<usize> = Vec::new();
    'conds: for (ci, &c) in conds.iter().enumerate() {
        if state.rank() == target {
            deferred.extend_from_slice(&conds[ci..]);
            break 'conds;
        }
        for &gk in &cands[ci] {
            let row: Vec<C> = products
                .iter()
                .map(|pr| apply_diff_entry(&q[c], pr, gk))
                .collect();
            add_component_rows(&mut state, &row);
            if state.rank() == target {
                deferred.extend_from_slice(&conds[ci..]);
                break 'conds;
            }
        }
    }
    let got = ncols - state.rank();
    if got != expected_dim {
        return Err(Error::NullSpaceDim {
            degree,
            got,
            expected: expected_dim,
        });
    }
    progress(&format!(
        "degree {degree}: rank {} of {ncols}, null dimension {got}",
        state.rank()
    ));
    Ok(SolveOutcome {
        null: state.null_space(),
        deferred,
    })
}

#[allow(clippy::too_many_arguments)]
fn solve_prefiltered<C: Coeff>(
    g: &GroupSpec,
    q: &[Polynomial<C>],
    products: &[Rc<Polynomial<C>>],
    degree: u8,
    target: usize,
    conds: &[usize],
    cands: &[Vec<u128>],
    progress: &mut dyn FnMut(&str),
) -> Result<SolveOutcome> {
    let nv = g.rank as usize;
    let ncols = products.len();
    'primes: for &prime in SOLVER_PRIMES.iter() {
        let mut qmod = Vec::with_capacity(conds.len());
        for &c in conds {
            match reduce_op(&q[c], prime) {
                Some(m) => qmod.push(m),
                None => continue 'primes,
            }
        }
        let mut pmod = Vec::with_capacity(ncols);
        for pr in products {
            match reduce_poly(pr, prime) {
                Some(m) => pmod.push(m),
                None => continue 'primes,
            }
        }

        let mut rref = ModRref::new(ncols, prime);
        let mut selected: Vec<(usize, u128)> = Vec::new();
        'scan: for ci in 0..conds.len() {
            for &gk in &cands[ci] {
                let (ge, _) = unpack_key(gk);
                let row: Vec<u64> = pmod
                    .iter()
                    .map(|f| diff_entry_mod(&qmod[ci], f, &ge, nv, prime))
                    .collect();
                if row.iter().all(|&x| x == 0) {
                    continue;
                }
                if rref.add_row(row) {
                    selected.push((ci, gk));
                    if rref.rank() == target {
                        break 'scan;
                    }
                }
            }
        }
        if rref.rank() < target {
            progress(&format!(
                "degree {degree}: prime {prime} reached rank {} < {target}, retrying",
                rref.rank()
            ));
            continue 'primes;
        }

        // Independence mod p implies independence over Q: recomputing just the
        // selected rows exactly spans the full system's row space.
        let mut state = EliminationState::new(ncols);
        for &(ci, gk) in &selected {
            let c = conds[ci];
            let row: Vec<C> = products
                .iter()
                .map(|pr| apply_diff_entry(&q[c], pr, gk))
                .collect();
            add_component_rows(&mut state, &row);
        }
        if state.rank() != target {
            return Err(Error::Internal(format!(
                "modular prefilter at degree {degree} selected rows of exact rank {} (wanted {target})",
                state.rank()
            )));
        }
        progress(&format!(
            "degree {degree}: prefilter kept {} of {} candidate rows (prime {prime})",
            selected.len(),
            cands.iter().map(Vec::len).sum::<usize>()
        ));
        return Ok(SolveOutcome {
            null: state.null_space(),
            deferred: conds.to_vec(),
        });
    }
    Err(Error::PrimesExhausted)
}

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

/// Everything needed to reproduce and verify one canonical invariant: the
/// ansatz, its primitive integer coordinates, the squared pairing norm, and
/// the expanded polynomial itself.
#[derive(Clone, Debug)]
pub struct TransformRecord {
    /// 1-based position of the basic invariant this record canonicalizes.
    pub a: usize,
    pub degree: u8,
    /// Ansatz monomials in solver order; z is indexed the same way.
    pub monomials: Vec<Vec<u8>>,
    /// Primitive integer coordinates of h, positive on the pure term.
    pub z: Vec<Rational>,
    /// ⟨h, h⟩ under the differential pairing.
    pub norm_sq: Rational,
    /// 1/√norm_sq as an exact radical; h · norm_factor has unit norm.
    pub norm_factor: Radical,
    pub h_poly: AnyPoly,
}

/// Bookkeeping for the tied-degree pair of D4: how the two records sit inside
/// the 2-dimensional solution space, and their (diagonal) pairing Gram matrix.
#[derive(Clone, Debug)]
pub struct DnPairInfo {
    /// 1-based indices of the paired records.
    pub indices: (usize, usize),
    /// h_i = Σ_j mixing[i][j] · (Σ_m v_j[m] q^(m)) over the raw null basis v.
    pub mixing: [[Rational; 2]; 2],
    /// Pairing Gram matrix of the two records; off-diagonal verified zero.
    pub gram: [[Rational; 2]; 2],
}

#[derive(Clone, Debug)]
pub struct CanonicalBasis {
    pub group: GroupName,
    pub records: Vec<TransformRecord>,
    pub dn_pair: Option<DnPairInfo>,
}

/// The normalizing factor 1/√⟨h,h⟩ as an exact radical.
pub fn normalization_factor(norm_sq: &Rational) -> Result<Radical> {
    Radical::sqrt_of_rational(norm_sq)?.inv()
}

fn scalar<C: Coeff>(x: &C) -> Result<Rational> {
    x.as_rational()
        .cloned()
        .ok_or_else(|| Error::Internal("pairing value escaped the rationals".into()))
}

/// Rescales a null vector to primitive integers (positive on the pure term),
/// expands h, and packages the record. Also returns the raw h over C and the
/// scale factor that was applied.
fn build_record<C: Coeff>(
    a0: usize,
    ansatz: &Ansatz,
    v: &[Rational],
    products: &[Rc<Polynomial<C>>],
) -> Result<(TransformRecord, Polynomial<C>, Rational)> {
    let pure = ansatz
        .monomials
        .iter()
        .position(|m| m.iter().enumerate().all(|(i, &e)| e == u8::from(i == a0)))
        .ok_or_else(|| {
            Error::Internal(format!(
                "no pure term for invariant {} at degree {}",
                a0 + 1,
                ansatz.degree
            ))
        })?;
    if v[pure].is_zero() {
        return Err(Error::ZeroPureCoefficient((a0 + 1) as u8));
    }
    let mut num_gcd = BigInt::zero();
    let mut den_lcm = BigInt::one();
    for x in v {
        if !x.is_zero() {
            num_gcd = num_gcd.gcd(x.numerator());
            den_lcm = den_lcm.lcm(x.denominator());
        }
    }
    let mut factor = Rational::new(den_lcm, num_gcd);
    if v[pure].mul(&factor).is_negative() {
        factor = factor.neg();
    }
    let z: Vec<Rational> = v.iter().map(|x| x.mul(&factor)).collect();

    let nv = products[0].nvars();
    let mut h = Polynomial::<C>::zero(nv);
    for (pm, zm) in products.iter().zip(&z) {
        if !zm.is_zero() {
            h = h.add(&pm.mul_scalar(&C::from_rational(zm.clone())))?;
        }
    }
    let ns = scalar(&norm_sq(&h))?;
    if ns.signum() <= 0 {
        return Err(Error::Internal(format!(
            "pairing norm not positive at degree {}",
            ansatz.degree
        )));
    }
    let norm_factor = normalization_factor(&ns)?;
    let record = TransformRecord {
        a: a0 + 1,
        degree: ansatz.degree,
        monomials: ansatz.monomials.clone(),
        z,
        norm_sq: ns,
        norm_factor,
        h_poly: C::wrap_poly(h.clone()),
    };
    Ok((record, h, factor))
}

/// Splits the 2-dimensional solution space of a tied degree into two
/// pairing-orthogonal records: the first record keeps the first null vector's
/// direction, the second is Gram-Schmidt-corrected against it. The rotation
/// freedom of the tied pair is not canonical; the mixing matrix records the
/// choice made.
fn dn_even_branch<C: Coeff>(
    g: &GroupSpec,
    a: usize,
    ansatz: &Ansatz,
    null: &[Vec<Rational>],
    products: &[Rc<Polynomial<C>>],
) -> Result<(
    TransformRecord,
    TransformRecord,
    DnPairInfo,
    Polynomial<C>,
    Polynomial<C>,
)> {
    debug_assert!(g.dn_even);
    let combine = |v: &[Rational]| -> Result<Polynomial<C>> {
        let mut h = Polynomial::zero(products[0].nvars());
        for (pm, c) in products.iter().zip(v) {
            if !c.is_zero() {
                h = h.add(&pm.mul_scalar(&C::from_rational(c.clone())))?;
            }
        }
        Ok(h)
    };
    let h1 = combine(&null[0])?;
    let h2 = combine(&null[1])?;
    let g11 = scalar(&pairing_scalar(&h1, &h1)?)?;
    let g12 = scalar(&pairing_scalar(&h1, &h2)?)?;
    if g11.is_zero() {
        return Err(Error::Internal(
            "degenerate Gram block in tied-degree branch".into(),
        ));
    }
    let lambda = g12.div(&g11)?;
    let v2: Vec<Rational> = null[1]
        .iter()
        .zip(&null[0])
        .map(|(b, a_)| b.sub(&lambda.mul(a_)))
        .collect();
    let (rec1, hr1, s1) = build_record(a, ansatz, &null[0], products)?;
    let (rec2, hr2, s2) = build_record(a + 1, ansatz, &v2, products)?;
    let cross = scalar(&pairing_scalar(&hr1, &hr2)?)?;
    if !cross.is_zero() {
        return Err(Error::Internal(
            "tied-degree records are not pairing-orthogonal".into(),
        ));
    }
    let info = DnPairInfo {
        indices: (a + 1, a + 2),
        mixing: [
            [s1.clone(), Rational::zero()],
            [s2.mul(&lambda).neg(), s2.clone()],
        ],
        gram: [
            [rec1.norm_sq.clone(), Rational::zero()],
            [Rational::zero(), rec2.norm_sq.clone()],
        ],
    };
    Ok((rec1, rec2, info, hr1, hr2))
}

// ---------------------------------------------------------------------------
// Drivers
// ---------------------------------------------------------------------------

/// Builds the power-sum basis, rescales it, and canonicalizes every degree.
pub fn canonicalize_all(
    g: &GroupSpec,
    progress: &mut dyn FnMut(&str),
) -> Result<CanonicalBasis> {
    let p = build_p_basis(g);
    let q = rescale_to_q(g, &p)?;
    canonicalize_from_q(g, &q, progress)
}

/// Canonicalizes starting from an explicit q basis. The basis does not have
/// to be the standard rescaling: any set of generators with the right degrees
/// works, and the resulting h, norms, and normalizing factors are identical
/// (the integer coordinate vectors z absorb the difference).
pub fn canonicalize_from_q(
    g: &GroupSpec,
    q: &BasisSet,
    progress: &mut dyn FnMut(&str),
) -> Result<CanonicalBasis> {
    if q.polys.len() != g.degrees.len() {
        return Err(Error::InvalidData(format!(
            "expected {} basis polynomials, got {}",
            g.degrees.len(),
            q.polys.len()
        )));
    }
    for (i, p) in q.polys.iter().enumerate() {
        if p.homogeneous_degree() != Some(g.degrees[i]) {
            return Err(Error::InvalidData(format!(
                "basis entry {} is not homogeneous of degree {}",
                i + 1,
                g.degrees[i]
            )));
        }
    }
    if q.polys.iter().all(|p| matches!(p, AnyPoly::Q(_))) {
        let qs: Vec<Polynomial<Rational>> = q
            .polys
            .iter()
            .map(|p| match p {
                AnyPoly::Q(x) => x.clone(),
                AnyPoly::F(_) => unreachable!(),
            })
            .collect();
        canonicalize_generic(g, qs, progress)
    } else {
        let qs: Vec<PolyF> = q.polys.iter().map(|p| p.as_field()).collect();
        canonicalize_generic(g, qs, progress)
    }
}

fn canonicalize_generic<C: Coeff>(
    g: &GroupSpec,
    qs: Vec<Polynomial<C>>,
    progress: &mut dyn FnMut(&str),
) -> Result<CanonicalBasis> {
    let n = g.degrees.len();
    let mut cache = ProductCache::new(qs);
    let mut records: Vec<TransformRecord> = Vec::with_capacity(n);
    let mut dn_pair = None;
    let mut a = 0usize;
    while a < n {
        let d = g.degrees[a];
        let mult = g.degrees.iter().filter(|&&x| x == d).count();
        if mult > 2 {
            return Err(Error::Internal(format!(
                "degree {d} has multiplicity {mult}; only single and paired degrees are handled"
            )));
        }
        let ansatz = Ansatz::new(&g.degrees, d);
        let products: Vec<Rc<Polynomial<C>>> = ansatz
            .monomials
            .iter()
            .map(|m| cache.product(m))
            .collect::<Result<_>>()?;
        let outcome = solve_degree(g, cache.q_basis(), &products, d, mult, progress)?;

        let mut new_raw: Vec<(usize, Polynomial<C>)> = Vec::new();
        if mult == 1 {
            let (rec, h, _) = build_record(a, &ansatz, &outcome.null[0], &products)?;
            progress(&format!(
                "degree {d}: h_{} fixed, {} monomial terms",
                a + 1,
                h.num_terms()
            ));
            records.push(rec);
            new_raw.push((a, h));
            a += 1;
        } else {
            let (r1, r2, info, h1, h2) = dn_even_branch(g, a, &ansatz, &outcome.null, &products)?;
            progress(&format!(
                "degree {d}: tied pair h_{} / h_{} split and orthogonalized",
                a + 1,
                a + 2
            ));
            records.push(r1);
            records.push(r2);
            new_raw.push((a, h1));
            new_raw.push((a + 1, h2));
            dn_pair = Some(info);
            a += 2;
        }

        if !outcome.deferred.is_empty() {
            for (a0, h) in &new_raw {
                for &c in &outcome.deferred {
                    let r = apply_diff_op(&cache.q_basis()[c], h)?;
                    if !r.is_zero() {
                        return Err(Error::Internal(format!(
                            "deferred condition failed: q_{} applied to h_{} is nonzero",
                            c + 1,
                            a0 + 1
                        )));
                    }
                }
            }
            progress(&format!(
                "degree {d}: {} deferred conditions re-verified exactly",
                outcome.deferred.len()
            ));
        }
    }
    Ok(CanonicalBasis {
        group: g.name,
        records,
        dn_pair,
    })
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

fn rational_json(x: &Rational) -> Value {
    Value::String(x.to_string())
}

fn rational_from_json(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => Rational::from_str(s),
        Value::Number(n) => Rational::from_str(&n.to_string()),
        _ => Err(Error::InvalidData(format!("expected rational, got {v}"))),
    }
}

fn record_json(r: &TransformRecord) -> Value {
    json!({
        "a": r.a,
        "degree": r.degree,
        "monomials": r.monomials,
        "z": r.z.iter().map(rational_json).collect::<Vec<_>>(),
        "norm_sq": rational_json(&r.norm_sq),
        "norm_factor": serde_json::to_value(&r.norm_factor).expect("radical serializes"),
        "h_poly": r.h_poly.to_json(),
    })
}

fn field<'a>(v: &'a Value, k: &str) -> Result<&'a Value> {
    v.get(k)
        .ok_or_else(|| Error::InvalidData(format!("missing field '{k}'")))
}

fn record_from_json(v: &Value) -> Result<TransformRecord> {
    let a = field(v, "a")?
        .as_u64()
        .ok_or_else(|| Error::InvalidData("'a' must be an integer".into()))? as usize;
    let degree = field(v, "degree")?
        .as_u64()
        .ok_or_else(|| Error::InvalidData("'degree' must be an integer".into()))?
        as u8;
    let monomials: Vec<Vec<u8>> = serde_json::from_value(field(v, "monomials")?.clone())?;
    let z = field(v, "z")?
        .as_array()
        .ok_or_else(|| Error::InvalidData("'z' must be an array".into()))?
        .iter()
        .map(rational_from_json)
        .collect::<Result<Vec<_>>>()?;
    if z.len() != monomials.len() {
        return Err(Error::InvalidData(format!(
            "record {a}: {} coordinates for {} monomials",
            z.len(),
            monomials.len()
        )));
    }
    let norm_sq = rational_from_json(field(v, "norm_sq")?)?;
    let norm_factor: Radical = serde_json::from_value(field(v, "norm_factor")?.clone())?;
    let h_poly = AnyPoly::from_json(field(v, "h_poly")?)?;
    Ok(TransformRecord {
        a,
        degree,
        monomials,
        z,
        norm_sq,
        norm_factor,
        h_poly,
    })
}

fn matrix2_json(m: &[[Rational; 2]; 2]) -> Value {
    Value::Array(
        m.iter()
            .map(|row| Value::Array(row.iter().map(rational_json).collect()))
            .collect(),
    )
}

fn matrix2_from_json(v: &Value) -> Result<[[Rational; 2]; 2]> {
    let rows = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| Error::InvalidData("expected a 2x2 matrix".into()))?;
    let mut out = [
        [Rational::zero(), Rational::zero()],
        [Rational::zero(), Rational::zero()],
    ];
    for (i, row) in rows.iter().enumerate() {
        let cols = row
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| Error::InvalidData("expected a 2x2 matrix".into()))?;
        for (j, x) in cols.iter().enumerate() {
            out[i][j] = rational_from_json(x)?;
        }
    }
    Ok(out)
}

pub fn records_json(b: &CanonicalBasis) -> Value {
    let dn = match &b.dn_pair {
        None => Value::Null,
        Some(d) => json!({
            "indices": [d.indices.0, d.indices.1],
            "mixing": matrix2_json(&d.mixing),
            "gram": matrix2_json(&d.gram),
        }),
    };
    json!({
        "group": b.group.as_str(),
        "records": b.records.iter().map(record_json).collect::<Vec<_>>(),
        "dn_pair": dn,
    })
}

pub fn records_from_json(v: &Value) -> Result<CanonicalBasis> {
    let group: GroupName = field(v, "group")?
        .as_str()
        .ok_or_else(|| Error::InvalidData("'group' must be a string".into()))?
        .parse()?;
    let records = field(v, "records")?
        .as_array()
        .ok_or_else(|| Error::InvalidData("'records' must be an array".into()))?
        .iter()
        .map(record_from_json)
        .collect::<Result<Vec<_>>>()?;
    let dn_pair = match v.get("dn_pair") {
        None | Some(Value::Null) => None,
        Some(d) => {
            let ix = field(d, "indices")?
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| Error::InvalidData("'indices' must be a pair".into()))?
                .iter()
                .map(|x| {
                    x.as_u64()
                        .map(|n| n as usize)
                        .ok_or_else(|| Error::InvalidData("'indices' must be integers".into()))
                })
                .collect::<Result<Vec<_>>>()?;
            Some(DnPairInfo {
                indices: (ix[0], ix[1]),
                mixing: matrix2_from_json(field(d, "mixing")?)?,
                gram: matrix2_from_json(field(d, "gram")?)?,
            })
        }
    };
    Ok(CanonicalBasis {
        group,
        records,
        dn_pair,
    })
}

/// Plain-text rendering of the record set, one block per degree.
pub fn records_text(b: &CanonicalBasis) -> String {
    let mut s = String::new();
    s.push_str(&format!("group {}\n", b.group));
    for r in &b.records {
        s.push_str(&format!("h_{} (degree {})\n", r.a, r.degree));
        for (m, zc) in r.monomials.iter().zip(&r.z) {
            if zc.is_zero() {
                continue;
            }
            let mono: Vec<String> = m
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        format!("q{}", i + 1)
                    } else {
                        format!("q{}^{}", i + 1, e)
                    }
                })
                .collect();
            s.push_str(&format!("  {:>24}  {}\n", zc.to_string(), mono.join(" ")));
        }
        s.push_str(&format!("  norm_sq     {}\n", r.norm_sq));
        s.push_str(&format!("  norm_factor {}\n", r.norm_factor));
    }
    if let Some(d) = &b.dn_pair {
        s.push_str(&format!(
            "tied pair ({}, {}): mixing [[{}, {}], [{}, {}]]\n",
            d.indices.0,
            d.indices.1,
            d.mixing[0][0],
            d.mixing[0][1],
            d.mixing[1][0],
            d.mixing[1][1]
        ));
    }
    s
}
