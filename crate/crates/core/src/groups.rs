//! Catalog of reflection-group data and the starting invariant bases.
//!
//! Five groups are supported: E6, E7, E8 with their Mehta-style linear-form
//! presentations, plus two small test groups (D4, B3) that exercise the
//! degenerate-degree branch and the plain hyperoctahedral case. For each
//! group the catalog pins down:
//!
//! * the degrees d_1 ≤ … ≤ d_n of the basic invariants,
//! * the linear forms ℓ_k whose power sums build the p-basis (E-series),
//! * a set of simple roots generating the group,
//! * the rescaling multipliers that turn p_a into the integer-friendly q_a.
//!
//! E6 needs coefficients in Q(√2,√3); every form and root is stored as a
//! vector of `FieldElement` so the same code paths serve all groups, while
//! bases that are provably rational are handed out as rational polynomials.

use std::sync::OnceLock;

use num_bigint::BigInt;
use serde_json::{json, Value};

use crate::exactnum::{FieldElement, Radical, Rational};
use crate::poly::{
    key_mul, pack_key, to_rational_poly, unpack_key, AnyPoly, Coeff, PolyF, Polynomial, MAX_VARS,
};
use crate::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum GroupName {
    E6,
    E7,
    E8,
    D4,
    B3,
}

impl GroupName {
    pub const ALL: [GroupName; 5] = [GroupName::E6, GroupName::E7, GroupName::E8, GroupName::D4, GroupName::B3];

    pub fn as_str(&self) -> &'static str {
        match self {
            GroupName::E6 => "E6",
            GroupName::E7 => "E7",
            GroupName::E8 => "E8",
            GroupName::D4 => "D4",
            GroupName::B3 => "B3",
        }
    }
}

impl std::fmt::Display for GroupName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for GroupName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "E6" => Ok(GroupName::E6),
            "E7" => Ok(GroupName::E7),
            "E8" => Ok(GroupName::E8),
            "D4" => Ok(GroupName::D4),
            "B3" => Ok(GroupName::B3),
            _ => Err(Error::UnknownGroup(s.to_string())),
        }
    }
}

/// Which basis a [`BasisSet`] holds.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BasisLabel {
    P,
    Q,
    H,
}

impl BasisLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            BasisLabel::P => "p",
            BasisLabel::Q => "q",
            BasisLabel::H => "h",
        }
    }
}

/// Immutable per-group data. Handed out as `&'static` by [`catalog`].
pub struct GroupSpec {
    pub name: GroupName,
    pub rank: u8,
    /// Degrees of the basic invariants, ascending; d_1 = 2.
    pub degrees: Vec<u8>,
    /// The linear forms whose d_a-th power sums give p_a. Empty for D4/B3,
    /// whose p-basis is written down directly.
    pub forms: Vec<Vec<FieldElement>>,
    pub simple_roots: Vec<Vec<FieldElement>>,
    /// N = Σ (d_a − 1), the number of reflecting hyperplanes.
    pub n_positive_roots: usize,
    /// True only for D4: two basic invariants share degree 4.
    pub dn_even: bool,
    /// Multiplier turning p_a into q_a.
    pub q_rescale: Vec<Radical>,
}

/// A full basis of invariant polynomials for one group.
#[derive(Clone, Debug)]
pub struct BasisSet {
    pub group: GroupName,
    pub label: BasisLabel,
    pub polys: Vec<AnyPoly>,
}

// ---------------------------------------------------------------------------
// Catalog data
// ---------------------------------------------------------------------------

fn fe(n: i64) -> FieldElement {
    FieldElement::from_int(n)
}

/// a + b√2 + c√3 + d√6 with all rational parts given as (num, den).
fn fe_full(b: (i64, i64), d: (i64, i64)) -> FieldElement {
    FieldElement::new(
        Rational::zero(),
        Rational::ratio(b.0, b.1),
        Rational::zero(),
        Rational::ratio(d.0, d.1),
    )
}

fn rad_q(num: i64, den: i64) -> Radical {
    Radical::rational(Rational::ratio(num, den))
}

fn rad_sqrt(num: i64, den: i64, radicand: u64) -> Radical {
    Radical::simplify(Rational::ratio(num, den), radicand.into()).expect("static radical")
}

/// The 27 E6 forms. Sign patterns expand in the printed order, `+` first.
fn e6_forms() -> Vec<Vec<FieldElement>> {
    let mut forms = Vec::with_capacity(27);
    let z = FieldElement::zero;
    // 2√(2/3) x6 = (2√6/3) x6
    forms.push(vec![z(), z(), z(), z(), z(), fe_full((0, 1), (2, 3))]);
    // √(2/3)(±√3 x5 − x6) = ±√2 x5 − (√6/3) x6
    for s in [1i64, -1] {
        forms.push(vec![z(), z(), z(), z(), fe_full((s, 1), (0, 1)), fe_full((0, 1), (-1, 3))]);
    }
    // ±x3 ± x4 − (√6/3) x6  and  ±x1 ± x2 − (√6/3) x6
    for (i, j) in [(2usize, 3usize), (0, 1)] {
        for s in [1i64, -1] {
            for t in [1i64, -1] {
                let mut v = vec![z(), z(), z(), z(), z(), fe_full((0, 1), (-1, 3))];
                v[i] = fe(s);
                v[j] = fe(t);
                forms.push(v);
            }
        }
    }
    // ±x2 ± x4 + (√2/2) x5 + (√6/6) x6  and  ±x1 ± x3 + same tail
    for (i, j) in [(1usize, 3usize), (0, 2)] {
        for s in [1i64, -1] {
            for t in [1i64, -1] {
                let mut v = vec![z(), z(), z(), z(), fe_full((1, 2), (0, 1)), fe_full((0, 1), (1, 6))];
                v[i] = fe(s);
                v[j] = fe(t);
                forms.push(v);
            }
        }
    }
    // ±x2 ± x3 − (√2/2) x5 + (√6/6) x6  and  ±x1 ± x4 − same x5 tail
    for (i, j) in [(1usize, 2usize), (0, 3)] {
        for s in [1i64, -1] {
            for t in [1i64, -1] {
                let mut v = vec![z(), z(), z(), z(), fe_full((-1, 2), (0, 1)), fe_full((0, 1), (1, 6))];
                v[i] = fe(s);
                v[j] = fe(t);
                forms.push(v);
            }
        }
    }
    forms
}

/// The 56 E7 forms: ±x_i ± x_j ± x_k over seven index triples.
fn e7_forms() -> Vec<Vec<FieldElement>> {
    const TRIPLES: [(usize, usize, usize); 7] =
        [(0, 1, 6), (0, 2, 5), (0, 3, 4), (1, 2, 4), (1, 3, 5), (2, 3, 6), (4, 5, 6)];
    let mut forms = Vec::with_capacity(56);
    for &(i, j, k) in &TRIPLES {
        for s in [1i64, -1] {
            for t in [1i64, -1] {
                for u in [1i64, -1] {
                    let mut v = vec![FieldElement::zero(); 7];
                    v[i] = fe(s);
                    v[j] = fe(t);
                    v[k] = fe(u);
                    forms.push(v);
                }
            }
        }
    }
    forms
}

/// The 240 E8 forms: ±2x_i plus ±x_i ± x_j ± x_k ± x_l over 14 quadruples.
fn e8_forms() -> Vec<Vec<FieldElement>> {
    const QUADS: [(usize, usize, usize, usize); 14] = [
        (0, 1, 2, 3),
        (0, 1, 4, 5),
        (0, 1, 6, 7),
        (0, 2, 4, 6),
        (0, 2, 5, 7),
        (0, 3, 5, 6),
        (0, 3, 4, 7),
        (1, 2, 4, 7),
        (1, 2, 5, 6),
        (1, 3, 4, 6),
        (1, 3, 5, 7),
        (2, 3, 4, 5),
        (2, 3, 6, 7),
        (4, 5, 6, 7),
    ];
    let mut forms = Vec::with_capacity(240);
    for i in 0..8 {
        for s in [2i64, -2] {
            let mut v = vec![FieldElement::zero(); 8];
            v[i] = fe(s);
            forms.push(v);
        }
    }
    for &(i, j, k, l) in &QUADS {
        for s in [1i64, -1] {
            for t in [1i64, -1] {
                for u in [1i64, -1] {
                    for w in [1i64, -1] {
                        let mut v = vec![FieldElement::zero(); 8];
                        v[i] = fe(s);
                        v[j] = fe(t);
                        v[k] = fe(u);
                        v[l] = fe(w);
                        forms.push(v);
                    }
                }
            }
        }
    }
    forms
}

fn unit_combo(n: usize, entries: &[(usize, i64)]) -> Vec<FieldElement> {
    let mut v = vec![FieldElement::zero(); n];
    for &(i, c) in entries {
        v[i] = fe(c);
    }
    v
}

fn build_spec(name: GroupName) -> GroupSpec {
    match name {
        GroupName::E6 => GroupSpec {
            name,
            rank: 6,
            degrees: vec![2, 5, 6, 8, 9, 12],
            forms: e6_forms(),
            simple_roots: vec![
                // e2 − e3 + (√2/2) e5 + (√6/2) e6
                {
                    let mut v = unit_combo(6, &[(1, 1), (2, -1)]);
                    v[4] = fe_full((1, 2), (0, 1));
                    v[5] = fe_full((0, 1), (1, 2));
                    v
                },
                // e3 − e4 − √2 e5
                {
                    let mut v = unit_combo(6, &[(2, 1), (3, -1)]);
                    v[4] = fe_full((-1, 1), (0, 1));
                    v
                },
                unit_combo(6, &[(3, 2)]),
                // e3 − e4 + √2 e5
                {
                    let mut v = unit_combo(6, &[(2, 1), (3, -1)]);
                    v[4] = fe_full((1, 1), (0, 1));
                    v
                },
                // e2 − e3 − (√2/2) e5 − (√6/2) e6
                {
                    let mut v = unit_combo(6, &[(1, 1), (2, -1)]);
                    v[4] = fe_full((-1, 2), (0, 1));
                    v[5] = fe_full((0, 1), (-1, 2));
                    v
                },
                unit_combo(6, &[(0, 1), (1, -1), (2, -1), (3, -1)]),
            ],
            n_positive_roots: 36,
            dn_even: false,
            q_rescale: vec![
                rad_q(1, 12),
                rad_sqrt(3, 20, 2),
                rad_q(1, 2),
                rad_q(9, 1),
                rad_sqrt(9, 7, 2),
                rad_q(36, 1),
            ],
        },
        GroupName::E7 => GroupSpec {
            name,
            rank: 7,
            degrees: vec![2, 6, 8, 10, 12, 14, 18],
            forms: e7_forms(),
            simple_roots: vec![
                unit_combo(7, &[(6, 2)]),
                unit_combo(7, &[(1, 1), (2, -1), (5, -1), (6, -1)]),
                unit_combo(7, &[(5, 2)]),
                unit_combo(7, &[(2, 1), (3, -1), (4, -1), (5, -1)]),
                unit_combo(7, &[(3, 2)]),
                unit_combo(7, &[(0, 1), (1, -1), (2, -1), (3, -1)]),
                unit_combo(7, &[(4, 2)]),
            ],
            n_positive_roots: 63,
            dn_even: false,
            q_rescale: vec![
                rad_q(1, 24),
                rad_q(1, 24),
                rad_q(1, 8),
                rad_q(1, 24),
                rad_q(1, 24),
                rad_q(1, 8),
                rad_q(1, 24),
            ],
        },
        GroupName::E8 => GroupSpec {
            name,
            rank: 8,
            degrees: vec![2, 8, 12, 14, 18, 20, 24, 30],
            forms: e8_forms(),
            simple_roots: vec![
                unit_combo(8, &[(0, 1), (1, -1), (2, -1), (3, -1)]),
                unit_combo(8, &[(3, 2)]),
                unit_combo(8, &[(2, 1), (3, -1), (4, -1), (5, -1)]),
                unit_combo(8, &[(5, 2)]),
                unit_combo(8, &[(4, 1), (5, -1), (6, -1), (7, -1)]),
                unit_combo(8, &[(7, 2)]),
                unit_combo(8, &[(1, 1), (2, -1), (4, -1), (7, -1)]),
                unit_combo(8, &[(6, 2)]),
            ],
            n_positive_roots: 120,
            dn_even: false,
            q_rescale: vec![
                rad_q(1, 120),
                rad_q(1, 48),
                rad_q(1, 48),
                rad_q(1, 48),
                rad_q(1, 48),
                rad_q(1, 48),
                rad_q(1, 48),
                rad_q(1, 240),
            ],
        },
        GroupName::D4 => GroupSpec {
            name,
            rank: 4,
            degrees: vec![2, 4, 4, 6],
            forms: Vec::new(),
            simple_roots: vec![
                unit_combo(4, &[(0, 1), (1, -1)]),
                unit_combo(4, &[(1, 1), (2, -1)]),
                unit_combo(4, &[(2, 1), (3, -1)]),
                unit_combo(4, &[(2, 1), (3, 1)]),
            ],
            n_positive_roots: 12,
            dn_even: true,
            q_rescale: vec![rad_q(1, 1); 4],
        },
        GroupName::B3 => GroupSpec {
            name,
            rank: 3,
            degrees: vec![2, 4, 6],
            forms: Vec::new(),
            simple_roots: vec![
                unit_combo(3, &[(0, 1), (1, -1)]),
                unit_combo(3, &[(1, 1), (2, -1)]),
                unit_combo(3, &[(2, 1)]),
            ],
            n_positive_roots: 9,
            dn_even: false,
            q_rescale: vec![rad_q(1, 1); 3],
        },
    }
}

/// Static per-group data; built once, then shared.
pub fn catalog(name: GroupName) -> &'static GroupSpec {
    static SPECS: OnceLock<Vec<GroupSpec>> = OnceLock::new();
    let specs = SPECS.get_or_init(|| GroupName::ALL.iter().map(|&g| build_spec(g)).collect());
    &specs[GroupName::ALL.iter().position(|&g| g == name).unwrap()]
}

// ---------------------------------------------------------------------------
// p-basis construction
// ---------------------------------------------------------------------------

/// d! / Π α_i! as u128; exact for d ≤ 30.
fn multinomial(d: u8, alpha: &[u8]) -> u128 {
    let fact = |k: u8| crate::pairing::falling(k, k).max(1);
    let mut m = fact(d);
    for &a in alpha {
        m /= fact(a);
    }
    m
}

/// Expands (Σ c_i x_i)^d by the multinomial theorem, enumerating only the
/// support of the form.
fn linear_form_power(nvars: u8, coeffs: &[FieldElement], d: u8) -> Vec<(u128, FieldElement)> {
    let support: Vec<usize> = (0..nvars as usize).filter(|&i| !coeffs[i].is_zero()).collect();
    // Per-variable coefficient powers c_i^k.
    let mut cpow: Vec<Vec<FieldElement>> = Vec::with_capacity(support.len());
    for &i in &support {
        let mut row = vec![FieldElement::one()];
        for k in 1..=d as usize {
            let next = row[k - 1].mul(&coeffs[i]);
            row.push(next);
        }
        cpow.push(row);
    }
    let mut out = Vec::new();
    let mut alpha = vec![0u8; support.len()];
    fn rec(
        j: usize,
        rem: u8,
        d: u8,
        support: &[usize],
        cpow: &[Vec<FieldElement>],
        alpha: &mut Vec<u8>,
        out: &mut Vec<(u128, FieldElement)>,
    ) {
        if j == support.len() - 1 {
            alpha[j] = rem;
            let mut c = FieldElement::from_rational(Rational::from_bigint(BigInt::from(
                multinomial(d, alpha),
            )));
            let mut e = [0u8; MAX_VARS];
            for (t, &i) in support.iter().enumerate() {
                c = c.mul(&cpow[t][alpha[t] as usize]);
                e[i] = alpha[t];
            }
            out.push((pack_key(&e), c));
            alpha[j] = 0;
            return;
        }
        for e in 0..=rem {
            alpha[j] = e;
            rec(j + 1, rem - e, d, support, cpow, alpha, out);
        }
        alpha[j] = 0;
    }
    if !support.is_empty() {
        rec(0, d, d, &support, &cpow, &mut alpha, &mut out);
    }
    out
}

/// Power sums Σ_k ℓ_k^{d_a} over the catalog forms; for groups whose degrees
/// are all even, sums over the forms with positive leading coefficient and
/// doubles (the other half contributes identically).
fn power_sum_basis(g: &GroupSpec) -> Vec<PolyF> {
    let all_even = g.degrees.iter().all(|d| d % 2 == 0);
    let selected: Vec<&Vec<FieldElement>> = if all_even {
        g.forms
            .iter()
            .filter(|f| {
                let lead = f.iter().find(|c| !c.is_zero()).expect("zero form");
                lead.signum() > 0
            })
            .collect()
    } else {
        g.forms.iter().collect()
    };
    g.degrees
        .iter()
        .map(|&d| {
            let mut raw = Vec::new();
            for form in &selected {
                raw.extend(linear_form_power(g.rank, form, d));
            }
            let p = PolyF::from_terms(g.rank, raw);
            if all_even {
                p.mul_scalar(&FieldElement::from_int(2))
            } else {
                p
            }
        })
        .collect()
}

/// Elementary symmetric-power basis for the two test groups.
fn explicit_basis(g: &GroupSpec) -> Vec<AnyPoly> {
    let n = g.rank;
    let power_sum = |d: u8| {
        Polynomial::from_terms(
            n,
            (0..n as usize)
                .map(|i| {
                    let mut e = [0u8; MAX_VARS];
                    e[i] = d;
                    (pack_key(&e[..n as usize]), Rational::one())
                })
                .collect(),
        )
    };
    match g.name {
        GroupName::D4 => vec![
            AnyPoly::Q(power_sum(2)),
            AnyPoly::Q(power_sum(4)),
            AnyPoly::Q(Polynomial::monomial(4, &[1, 1, 1, 1], Rational::one())),
            AnyPoly::Q(power_sum(6)),
        ],
        GroupName::B3 => vec![AnyPoly::Q(power_sum(2)), AnyPoly::Q(power_sum(4)), AnyPoly::Q(power_sum(6))],
        _ => unreachable!("explicit basis only for D4/B3"),
    }
}

/// Builds the starting (non-canonical) basis p_1..p_n.
pub fn build_p_basis(g: &GroupSpec) -> BasisSet {
    let polys = match g.name {
        GroupName::D4 | GroupName::B3 => explicit_basis(g),
        _ => power_sum_basis(g)
            .into_iter()
            .map(|p| match to_rational_poly(&p) {
                Ok(q) => AnyPoly::Q(q),
                Err(_) => AnyPoly::F(p),
            })
            .collect(),
    };
    BasisSet { group: g.name, label: BasisLabel::P, polys }
}

/// Multiplies p_a by the catalog multiplier to obtain q_a, then enforces the
/// coefficient-field guarantees the downstream solver relies on: every
/// coefficient must be rational, except for E6 where each coefficient must be
/// rational or a rational multiple of √3 according to the parity of the x6
/// exponent (odd x6 power ⇔ √3 class). Anything else indicates a
/// transcription bug in the catalog and aborts.
pub fn rescale_to_q(g: &GroupSpec, p: &BasisSet) -> Result<BasisSet> {
    let mut polys = Vec::with_capacity(p.polys.len());
    for (a, poly) in p.polys.iter().enumerate() {
        let m = &g.q_rescale[a];
        let scaled = {
            let f = poly.as_field();
            let mult = radical_to_field(m)?;
            f.mul_scalar(&mult)
        };
        if g.name == GroupName::E6 {
            check_e6_classes(&scaled, a)?;
            polys.push(AnyPoly::F(scaled));
        } else {
            let q = to_rational_poly(&scaled).map_err(|e| match e {
                Error::IrrationalCoefficient(msg) => {
                    Error::IrrationalCoefficient(format!("q_{} for {}: {}", a + 1, g.name, msg))
                }
                other => other,
            })?;
            polys.push(AnyPoly::Q(q));
        }
    }
    Ok(BasisSet { group: g.name, label: BasisLabel::Q, polys })
}

/// A Radical with radicand in {1,2,3,6} as a field element.
fn radical_to_field(r: &Radical) -> Result<FieldElement> {
    use num_traits::ToPrimitive;
    let base = match r.radicand().to_u64() {
        Some(1) => FieldElement::one(),
        Some(2) => FieldElement::sqrt2(Rational::one()),
        Some(3) => FieldElement::sqrt3(Rational::one()),
        Some(6) => FieldElement::sqrt6(Rational::one()),
        _ => {
            return Err(Error::Internal(format!(
                "radicand {} is outside Q(√2,√3)",
                r.radicand()
            )))
        }
    };
    Ok(base.mul_rational(r.scale()))
}

/// E6 class rule: the coefficient of a monomial with x6-exponent k lies in
/// √3^(k mod 2)·Q. Violations mean the form table was mistranscribed.
fn check_e6_classes(p: &PolyF, a: usize) -> Result<()> {
    for t in p.terms() {
        let (e, _) = unpack_key(t.key);
        let [ra, rb, rc, rd] = t.coeff.components();
        let bad = if e[5] % 2 == 0 {
            !rb.is_zero() || !rc.is_zero() || !rd.is_zero()
        } else {
            !ra.is_zero() || !rb.is_zero() || !rd.is_zero()
        };
        if bad {
            return Err(Error::IrrationalCoefficient(format!(
                "E6 q_{}: monomial {:?} has out-of-class coefficient {}",
                a + 1,
                &e[..6],
                t.coeff
            )));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Roots and reflections
// ---------------------------------------------------------------------------

pub fn dot(u: &[FieldElement], v: &[FieldElement]) -> FieldElement {
    let mut s = FieldElement::zero();
    for (a, b) in u.iter().zip(v) {
        s = s.add(&a.mul(b));
    }
    s
}

/// v reflected through the hyperplane orthogonal to α.
pub fn reflect_vector(alpha: &[FieldElement], v: &[FieldElement]) -> Result<Vec<FieldElement>> {
    let t = dot(alpha, v).mul(&FieldElement::from_int(2)).mul(&dot(alpha, alpha).inv()?);
    Ok(v.iter().zip(alpha).map(|(vi, ai)| vi.sub(&t.mul(ai))).collect())
}

/// Flips the sign so the first nonzero coordinate is positive.
fn normalize_root_sign(mut v: Vec<FieldElement>) -> Vec<FieldElement> {
    for c in &v {
        match c.signum() {
            0 => continue,
            1 => return v,
            _ => break,
        }
    }
    for c in v.iter_mut() {
        *c = c.neg();
    }
    v
}

/// Closes the simple roots under their own reflections, returning all N
/// positive roots (canonical sign, deterministic order of discovery).
pub fn generate_positive_roots(g: &GroupSpec) -> Result<Vec<Vec<FieldElement>>> {
    let mut roots: Vec<Vec<FieldElement>> =
        g.simple_roots.iter().map(|r| normalize_root_sign(r.clone())).collect();
    let mut frontier: Vec<usize> = (0..roots.len()).collect();
    let mut rounds = 0;
    while !frontier.is_empty() {
        rounds += 1;
        if rounds > 64 || roots.len() > 4 * g.n_positive_roots {
            return Err(Error::RootClosure);
        }
        let mut next = Vec::new();
        for &idx in &frontier {
            let base = roots[idx].clone();
            for alpha in &g.simple_roots {
                let image = normalize_root_sign(reflect_vector(alpha, &base)?);
                if !roots.contains(&image) {
                    roots.push(image);
                    next.push(roots.len() - 1);
                }
            }
        }
        frontier = next;
    }
    if roots.len() != g.n_positive_roots {
        return Err(Error::Internal(format!(
            "{}: root closure found {} roots, expected {}",
            g.name,
            roots.len(),
            g.n_positive_roots
        )));
    }
    Ok(roots)
}

/// Is the form set mapped to itself by every simple reflection? `signed`
/// allows a form to land on the negative of another form, which suffices for
/// invariance of even power sums; E6 (odd degrees present) requires the
/// unsigned closure and satisfies it.
pub fn forms_closed_under_reflections(g: &GroupSpec, signed: bool) -> Result<bool> {
    for alpha in &g.simple_roots {
        for form in &g.forms {
            let image = reflect_vector(alpha, form)?;
            let neg: Vec<FieldElement> = image.iter().map(|c| c.neg()).collect();
            let hit = g.forms.iter().any(|f| *f == image) || (signed && g.forms.iter().any(|f| *f == neg));
            if !hit {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Invariance check by exact substitution
// ---------------------------------------------------------------------------

/// f ∘ r_α for the reflection r_α, computed exactly.
///
/// Only the coordinates in the support of α move, so terms are grouped by
/// their exponents on those coordinates and each distinct moved-part
/// monomial is expanded once through cached binomial powers of
/// (x_i − t_i·⟨α,x⟩).
pub fn reflect_poly(f: &PolyF, alpha: &[FieldElement]) -> Result<PolyF> {
    let nvars = f.nvars();
    if alpha.len() != nvars as usize {
        return Err(Error::PointLength(alpha.len(), nvars));
    }
    let moved: Vec<usize> = (0..nvars as usize).filter(|&i| !alpha[i].is_zero()).collect();
    if moved.is_empty() || f.is_zero() {
        return Ok(f.clone());
    }
    let norm_inv = dot(alpha, alpha).inv()?;
    // Image of each moved coordinate: x_i − t_i·L with L = ⟨α,x⟩.
    let line = PolyF::from_terms(
        nvars,
        moved
            .iter()
            .map(|&i| {
                let mut e = [0u8; MAX_VARS];
                e[i] = 1;
                (pack_key(&e[..nvars as usize]), alpha[i].clone())
            })
            .collect(),
    );
    let mut coord_images: Vec<PolyF> = Vec::with_capacity(moved.len());
    for &i in &moved {
        let t = alpha[i].mul(&FieldElement::from_int(2)).mul(&norm_inv);
        let xi = PolyF::variable(nvars, i, FieldElement::one())?;
        coord_images.push(xi.sub(&line.mul_scalar(&t))?);
    }
    // Cached powers of each coordinate image, up to the needed exponent.
    let mut max_e = vec![0u8; moved.len()];
    for t in f.terms() {
        let (e, _) = unpack_key(t.key);
        for (j, &i) in moved.iter().enumerate() {
            max_e[j] = max_e[j].max(e[i]);
        }
    }
    let mut powers: Vec<Vec<PolyF>> = Vec::with_capacity(moved.len());
    for (j, img) in coord_images.iter().enumerate() {
        let mut row = vec![PolyF::one(nvars)];
        for k in 1..=max_e[j] as usize {
            let next = row[k - 1].mul(img)?;
            row.push(next);
        }
        powers.push(row);
    }
    // Group the terms of f by their moved-part exponents.
    let mut groups: std::collections::HashMap<Vec<u8>, Vec<(u128, FieldElement)>> =
        std::collections::HashMap::new();
    for t in f.terms() {
        let (e, _) = unpack_key(t.key);
        let mkey: Vec<u8> = moved.iter().map(|&i| e[i]).collect();
        let mut fixed = e;
        for &i in &moved {
            fixed[i] = 0;
        }
        groups
            .entry(mkey)
            .or_default()
            .push((pack_key(&fixed[..nvars as usize]), t.coeff.clone()));
    }
    let mut raw: Vec<(u128, FieldElement)> = Vec::new();
    for (mkey, members) in groups {
        // Π_j (image of x_{moved[j]})^{mkey[j]}, smallest factors first.
        let mut prod = PolyF::one(nvars);
        for (j, &e) in mkey.iter().enumerate() {
            if e > 0 {
                prod = prod.mul(&powers[j][e as usize])?;
            }
        }
        for pt in prod.terms() {
            for (fixed_key, c) in &members {
                raw.push((key_mul(pt.key, *fixed_key), pt.coeff.mul(c)));
            }
        }
    }
    Ok(PolyF::from_terms(nvars, raw))
}

/// True iff f is fixed by every simple reflection of g (the generators
/// suffice for the whole group).
pub fn check_invariance(g: &GroupSpec, f: &AnyPoly) -> Result<bool> {
    let ff = f.as_field();
    if ff.nvars() != g.rank {
        return Err(Error::NvarsMismatch(ff.nvars(), g.rank));
    }
    for alpha in &g.simple_roots {
        if reflect_poly(&ff, alpha)? != ff {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

fn field_vec_json(v: &[FieldElement]) -> Value {
    Value::Array(v.iter().map(|c| c.to_json()).collect())
}

/// Group description for export: degrees, forms, simple roots.
pub fn group_json(g: &GroupSpec) -> Value {
    json!({
        "name": g.name.as_str(),
        "rank": g.rank,
        "degrees": g.degrees,
        "n_positive_roots": g.n_positive_roots,
        "dn_even": g.dn_even,
        "q_rescale": g.q_rescale.iter().map(|r| serde_json::to_value(r).expect("radical serializes")).collect::<Vec<_>>(),
        "forms": g.forms.iter().map(|f| field_vec_json(f)).collect::<Vec<_>>(),
        "simple_roots": g.simple_roots.iter().map(|r| field_vec_json(r)).collect::<Vec<_>>(),
    })
}

pub fn roots_json(roots: &[Vec<FieldElement>]) -> Value {
    Value::Array(roots.iter().map(|r| field_vec_json(r)).collect())
}

pub fn basis_json(b: &BasisSet) -> Value {
    json!({
        "group": b.group.as_str(),
        "label": b.label.as_str(),
        "polys": b.polys.iter().map(|p| p.to_json()).collect::<Vec<_>>(),
    })
}

pub fn basis_from_json(v: &Value) -> Result<BasisSet> {
    let group: GroupName = v
        .get("group")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::InvalidData("basis missing group".into()))?
        .parse()?;
    let label = match v.get("label").and_then(Value::as_str) {
        Some("p") => BasisLabel::P,
        Some("q") => BasisLabel::Q,
        Some("h") => BasisLabel::H,
        other => return Err(Error::InvalidData(format!("bad basis label {other:?}"))),
    };
    let polys = v
        .get("polys")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::InvalidData("basis missing polys".into()))?
        .iter()
        .map(AnyPoly::from_json)
        .collect::<Result<Vec<_>>>()?;
    Ok(BasisSet { group, label, polys })
}
