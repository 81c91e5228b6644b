//! Acceptance suite: one test per acceptance criterion, each printing a
//! single `[criterion N] PASS`/`FAIL` line (visible with `--nocapture`).
//!
//! The E8 criterion is `#[ignore]`d to match the command-line opt-in gate;
//! run it with `cargo test -p invar-cli --test acceptance -- --ignored`.

use std::collections::BTreeMap;
use std::process::Command;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::{Duration, Instant};

use invar_core::canonicalize::{
    canonicalize_all, null_space_dense, weighted_monomials, CanonicalBasis, EliminationState,
    ProductCache,
};
use invar_core::exactnum::Rational;
use invar_core::groups::{build_p_basis, catalog, generate_positive_roots, rescale_to_q, GroupName};
use invar_core::pairing::{apply_diff_op, pairing_scalar};
use invar_core::poly::{AnyPoly, PolyF};
use invar_core::verify::{check_jacobian, regress_published, CheckStatus, JacobianMode};

// ---------------------------------------------------------------------------
// Shared machinery
// ---------------------------------------------------------------------------

struct Computed {
    basis: CanonicalBasis,
    elapsed: Duration,
}

/// Canonicalizes each group at most once per test-binary run; several
/// criteria share the same basis.
fn computed(name: GroupName) -> Arc<Computed> {
    static CACHE: OnceLock<Mutex<BTreeMap<&'static str, Arc<Computed>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry(name.as_str())
        .or_insert_with(|| {
            let t = Instant::now();
            let basis = canonicalize_all(catalog(name), &mut |_| {}).expect("canonicalization");
            Arc::new(Computed { basis, elapsed: t.elapsed() })
        })
        .clone()
}

fn criterion(n: u8, what: &str, f: impl FnOnce() -> Result<String, String>) {
    match f() {
        Ok(detail) => println!("[criterion {n}] PASS: {what}. {detail}"),
        Err(e) => {
            println!("[criterion {n}] FAIL: {what}. {e}");
            panic!("criterion {n} failed: {e}");
        }
    }
}

macro_rules! ensure {
    ($cond:expr, $($arg:tt)*) => {
        if !$cond {
            return Err(format!($($arg)*));
        }
    };
}

/// v ∝ w with a nonzero rational ratio (cross-multiplication, exact).
fn proportional(v: &[Rational], w: &[i64]) -> bool {
    if v.len() != w.len() {
        return false;
    }
    let Some(p) = w.iter().position(|&x| x != 0) else {
        return false;
    };
    if v[p].is_zero() {
        return false;
    }
    let wp = Rational::from_int(w[p]);
    v.iter().zip(w).all(|(vi, &wi)| {
        // v_i · w_p == w_i · v_p
        vi.mul(&wp) == Rational::from_int(wi).mul(&v[p])
    })
}

fn diff_pair_is_zero(ha: &AnyPoly, hb: &AnyPoly) -> bool {
    match (ha, hb) {
        (AnyPoly::Q(a), AnyPoly::Q(b)) => apply_diff_op(a, b).unwrap().is_zero(),
        _ => apply_diff_op(&ha.as_field(), &hb.as_field()).unwrap().is_zero(),
    }
}

fn laplacian_is_zero(h: &AnyPoly) -> bool {
    fn lap<C: invar_core::poly::Coeff>(p: &invar_core::poly::Polynomial<C>) -> bool {
        let mut acc = invar_core::poly::Polynomial::<C>::zero(p.nvars());
        for i in 0..p.nvars() as usize {
            acc = acc.add(&p.derivative(i).unwrap().derivative(i).unwrap()).unwrap();
        }
        acc.is_zero()
    }
    match h {
        AnyPoly::Q(p) => lap(p),
        AnyPoly::F(p) => lap(p),
    }
}

/// All ordered pairs a ≠ b, both degree directions, plus harmonicity above
/// the quadratic; shared by the per-group property criterion and the E8 run.
fn canonical_properties(basis: &CanonicalBasis) -> Result<usize, String> {
    let n = basis.records.len();
    let mut pairs = 0usize;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (a, b) = (&basis.records[i], &basis.records[j]);
            ensure!(
                diff_pair_is_zero(&a.h_poly, &b.h_poly),
                "h_{}(∂) h_{} is nonzero",
                a.a,
                b.a
            );
            pairs += 1;
        }
    }
    for r in basis.records.iter().skip(1) {
        ensure!(laplacian_is_zero(&r.h_poly), "Δh_{} is nonzero", r.a);
    }
    Ok(pairs)
}

/// Published-normalization norm squares: ⟨h_a, h_a⟩ · λ_a² for the stored
/// primitive-vector records, compared against hardcoded D_a²·r_a. The
/// constants are strings because the top E8 values overflow machine words.
fn norm_squares_match(
    basis: &CanonicalBasis,
    lambda_sq: &[&str],
    denom_sq: &[(i64, i64)],
) -> Result<String, String> {
    ensure!(basis.records.len() == lambda_sq.len(), "record count mismatch");
    let mut shown = Vec::new();
    for ((rec, lam), &(d, r)) in basis.records.iter().zip(lambda_sq).zip(denom_sq) {
        let lam: Rational = lam.parse().unwrap();
        let expected = Rational::from_int(d)
            .mul(&Rational::from_int(d))
            .mul(&Rational::from_int(r));
        let got = rec.norm_sq.mul(&lam);
        ensure!(
            got == expected,
            "‖h_{}‖² rescaled is {} but the reference constant is {}",
            rec.a,
            got,
            expected
        );
        shown.push(expected.to_string());
    }
    Ok(shown.join(", "))
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_e6_regression() {
    criterion(1, "E6 coefficient vectors", || {
        let c = computed(GroupName::E6);
        let (check, _) = regress_published(&c.basis);
        ensure!(
            check.status == CheckStatus::Pass,
            "regression against the reference table failed: {:?}",
            check.witness
        );
        // Two vectors restated literally as an independent transcription.
        let h4 = &c.basis.records[3];
        ensure!(h4.degree == 8, "fourth record has degree {}", h4.degree);
        ensure!(
            proportional(&h4.z, &[1120, -224, 3]),
            "ĥ₄ is not proportional to (1120, −224, 3): {:?}",
            h4.z.iter().map(|x| x.to_string()).collect::<Vec<_>>()
        );
        let h6 = &c.basis.records[5];
        ensure!(h6.degree == 12, "sixth record has degree {}", h6.degree);
        ensure!(
            proportional(
                &h6.z,
                &[-169_845_984, -18_714_080, 50_516_928, -657_888, -1_108_536, 21_171]
            ),
            "ĥ₆ does not match the published 6-vector"
        );
        ensure!(
            c.elapsed < Duration::from_secs(300),
            "canonicalization took {:?}, over the 5-minute budget",
            c.elapsed
        );
        Ok(format!("all six vectors exact, canonicalized in {:?}", c.elapsed))
    });
}

#[test]
fn criterion_2_e6_norm_constants() {
    criterion(2, "E6 normalization constants", || {
        let c = computed(GroupName::E6);
        let lambda_sq = ["1", "1/3", "3", "3/25", "1/3", "1/164025"];
        let denom_sq = [
            (2, 3), // ⟨h₁, h₁⟩ = 2²·3 = 12
            (48, 2),
            (576, 5),
            (13_824, 70),
            (46_080, 2),
            (4_423_680, 543_389),
        ];
        let shown = norm_squares_match(&c.basis, &lambda_sq, &denom_sq)?;
        Ok(format!("norm squares {shown}"))
    });
}

#[test]
fn criterion_3_e7_regression_and_norms() {
    criterion(3, "E7 coefficient vectors and norms", || {
        let c = computed(GroupName::E7);
        let (check, _) = regress_published(&c.basis);
        ensure!(
            check.status == CheckStatus::Pass,
            "regression against the reference table failed: {:?}",
            check.witness
        );
        let h7 = &c.basis.records[6];
        ensure!(
            h7.z.len() == 14,
            "ĥ₇ should have 14 components, found {}",
            h7.z.len()
        );
        let lambda_sq =
            ["1", "1/4", "1/400", "1/4", "1/100", "1/101761", "1/245926378561600"];
        let denom_sq = [
            (1, 14),
            (24, 2310),
            (2016, 741),
            (40_320, 138),
            (483_840, 7634),
            (11_612_160, 146_565_055),
            (92_897_280, 5_181_830_514_230_370),
        ];
        let shown = norm_squares_match(&c.basis, &lambda_sq, &denom_sq)?;
        ensure!(
            c.elapsed < Duration::from_secs(1800),
            "canonicalization took {:?}, over the 30-minute budget",
            c.elapsed
        );
        Ok(format!(
            "all seven vectors exact in {:?}; norm squares {}",
            c.elapsed, shown
        ))
    });
}

#[test]
#[ignore = "E8 is opt-in, mirroring the command-line gate; run with -- --ignored"]
fn criterion_4_e8_regression_and_norms() {
    criterion(4, "E8 coefficient vectors and norms", || {
        let c = computed(GroupName::E8);
        let (check, _) = regress_published(&c.basis);
        ensure!(
            check.status == CheckStatus::Pass,
            "regression against the reference table failed: {:?}",
            check.witness
        );
        let lambda_sq = [
            "1",
            "1",
            "1/49",
            "1/121",
            "1/52998400",
            "1/559504",
            "1/820701074331008640000",
            "1/385210876271980418764657010954496000000000000",
        ];
        let denom_sq = [
            (4, 1),
            (1920, 42),
            (92_160, 15_015),
            (15_482_880, 65),
            (1_857_945_600, 17_765),
            (52_022_476_800, 4_778_475_585),
            (41_736_889_958_400, 342_348_352_885),
            (14_383_174_385_664_000, 14_557_753_942_206_761),
        ];
        let shown = norm_squares_match(&c.basis, &lambda_sq, &denom_sq)?;
        let pairs = canonical_properties(&c.basis)?;
        let roots = generate_positive_roots(catalog(GroupName::E8)).unwrap();
        let jac = check_jacobian(
            &c.basis,
            &roots,
            JacobianMode::Points { count: 20 },
            0,
            &mut |_| {},
        )
        .map_err(|e| e.to_string())?;
        ensure!(jac.status == CheckStatus::Pass, "Jacobian point check failed: {:?}", jac.witness);
        Ok(format!(
            "all eight vectors exact in {:?}; norm squares {shown}; {pairs} pairwise conditions and 20 Jacobian points verified",
            c.elapsed
        ))
    });
}

#[test]
fn criterion_5_canonical_property_suite() {
    criterion(5, "pairwise differential conditions and harmonicity", || {
        let mut detail = Vec::new();
        for name in [GroupName::B3, GroupName::D4, GroupName::E6, GroupName::E7] {
            let c = computed(name);
            let pairs = canonical_properties(&c.basis)?;
            detail.push(format!("{} ({pairs} pairs)", name.as_str()));
        }
        Ok(detail.join(", "))
    });
}

#[test]
fn criterion_6_d4_tied_degree_branch() {
    criterion(6, "D4 degree-4 pair", || {
        let c = computed(GroupName::D4);
        let (h2, h3) = (&c.basis.records[1], &c.basis.records[2]);
        ensure!(h2.degree == 4 && h3.degree == 4, "records 2 and 3 are not the degree-4 pair");

        let scalar = match (&h2.h_poly, &h3.h_poly) {
            (AnyPoly::Q(a), AnyPoly::Q(b)) => {
                let s = pairing_scalar(a, b).unwrap();
                s.is_zero()
            }
            (a, b) => pairing_scalar(&a.as_field(), &b.as_field()).unwrap().is_zero(),
        };
        ensure!(scalar, "the degree-4 pair is not orthogonal under the pairing");

        // Independent null-space dimension count at degree 4: the only
        // condition below degree 4 is annihilation by q₁(∂).
        let (rows, ncols) = condition_rows(GroupName::D4, 4);
        let null = null_space_dense(&rows, ncols);
        ensure!(
            null.len() == 2,
            "degree-4 null space has dimension {}, expected 2",
            null.len()
        );
        // Both computed coordinate vectors must satisfy the conditions.
        for rec in [h2, h3] {
            for row in &rows {
                let dot = row
                    .iter()
                    .zip(&rec.z)
                    .fold(Rational::zero(), |acc, (a, b)| acc.add(&a.mul(b)));
                ensure!(dot.is_zero(), "h_{} violates a degree-4 condition", rec.a);
            }
        }
        Ok("pairing number 0, null space dimension 2".into())
    });
}

#[test]
fn criterion_7_root_and_jacobian_consistency() {
    criterion(7, "root counts and Jacobian factorization", || {
        for (name, expected) in [(GroupName::E6, 36), (GroupName::E7, 63), (GroupName::E8, 120)] {
            let roots = generate_positive_roots(catalog(name)).unwrap();
            ensure!(
                roots.len() == expected,
                "{} produced {} positive roots, expected {expected}",
                name.as_str(),
                roots.len()
            );
        }

        let e6 = computed(GroupName::E6);
        let roots6 = generate_positive_roots(catalog(GroupName::E6)).unwrap();
        let chain = check_jacobian(&e6.basis, &roots6, JacobianMode::DivisionChain, 0, &mut |_| {})
            .map_err(|e| e.to_string())?;
        ensure!(
            chain.status == CheckStatus::Pass,
            "E6 division chain failed: {:?}",
            chain.witness
        );
        let witness = chain.witness.clone().unwrap_or_default();
        ensure!(
            witness.contains("constant"),
            "E6 division chain did not report a constant quotient: {witness}"
        );

        let e7 = computed(GroupName::E7);
        let roots7 = generate_positive_roots(catalog(GroupName::E7)).unwrap();
        let pts = check_jacobian(
            &e7.basis,
            &roots7,
            JacobianMode::Points { count: 20 },
            0,
            &mut |_| {},
        )
        .map_err(|e| e.to_string())?;
        ensure!(
            pts.status == CheckStatus::Pass,
            "E7 point mode failed: {:?}",
            pts.witness
        );
        Ok(format!("counts 36/63/120; E6 chain: {witness}; E7: 20 seeded points"))
    });
}

/// Conditions defining the canonical element(s) at `degree`: annihilation by
/// every lower-degree basic invariant, written as rational rows over the
/// ansatz-monomial columns. Field coefficients contribute one row per
/// component, which is equivalent since the unknowns are rational.
fn condition_rows(name: GroupName, degree: u8) -> (Vec<Vec<Rational>>, usize) {
    let g = catalog(name);
    let q = rescale_to_q(g, &build_p_basis(g)).unwrap();
    let qs: Vec<PolyF> = q.polys.iter().map(|p| p.as_field()).collect();
    let mut cache = ProductCache::new(qs.clone());
    let monomials = weighted_monomials(&g.degrees, degree);
    let ncols = monomials.len();

    let products: Vec<_> = monomials.iter().map(|m| cache.product(m).unwrap()).collect();
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for (c, qc) in qs.iter().enumerate() {
        if g.degrees[c] >= degree {
            continue;
        }
        // Column m gets the γ-coefficient of q_c(∂) P_m, split into the four
        // rational components of the field.
        let images: Vec<PolyF> =
            products.iter().map(|p| apply_diff_op(qc, p).unwrap()).collect();
        let mut gammas: Vec<u128> = images
            .iter()
            .flat_map(|p| p.terms().iter().map(|t| t.key))
            .collect();
        gammas.sort_unstable();
        gammas.dedup();
        for gamma in gammas {
            let mut comp_rows = vec![vec![Rational::zero(); ncols]; 4];
            for (m, img) in images.iter().enumerate() {
                if let Some(coeff) = img.get(gamma) {
                    for (k, part) in coeff.components().into_iter().enumerate() {
                        comp_rows[k][m] = part.clone();
                    }
                }
            }
            for row in comp_rows {
                if row.iter().any(|x| !x.is_zero()) {
                    rows.push(row);
                }
            }
        }
    }
    (rows, ncols)
}

/// Reduced row echelon form over the rationals; canonical for span equality.
fn rref(mut m: Vec<Vec<Rational>>) -> Vec<Vec<Rational>> {
    let ncols = m.first().map_or(0, Vec::len);
    let mut pivot_row = 0;
    for col in 0..ncols {
        let Some(r) = (pivot_row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(pivot_row, r);
        let inv = m[pivot_row][col].inv().unwrap();
        for x in m[pivot_row].iter_mut() {
            *x = x.mul(&inv);
        }
        for r in 0..m.len() {
            if r != pivot_row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c2 in 0..ncols {
                    let s = m[pivot_row][c2].mul(&f);
                    m[r][c2] = m[r][c2].sub(&s);
                }
            }
        }
        pivot_row += 1;
        if pivot_row == m.len() {
            break;
        }
    }
    m.truncate(pivot_row);
    m
}

#[test]
fn criterion_8_oracle_equivalence() {
    criterion(8, "kernel and solver oracles", || {
        // Part one: the pairing kernel against naive iterated
        // differentiation on 200 randomized small instances.
        use invar_core::pairing::naive_diff_op;
        use rand_chacha::rand_core::{RngCore, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(777);
        let mut random_hom = |nvars: u8, deg: u8, terms: usize| loop {
            let mut p = invar_core::poly::PolyQ::zero(nvars);
            for _ in 0..terms {
                let mut e = vec![0u8; nvars as usize];
                let mut rem = deg;
                for (i, x) in e.iter_mut().enumerate() {
                    if i + 1 == nvars as usize {
                        *x = rem;
                    } else {
                        *x = (rng.next_u64() % (u64::from(rem) + 1)) as u8;
                    }
                    rem -= *x;
                }
                let c = Rational::from_int((rng.next_u64() % 19) as i64 - 9);
                p = p.add(&invar_core::poly::PolyQ::monomial(nvars, &e, c)).unwrap();
            }
            if !p.is_zero() {
                return p;
            }
        };
        for i in 0..200 {
            let nvars = 1 + (i % 4) as u8;
            let op = random_hom(nvars, 1 + (i % 4) as u8, 3);
            let f = random_hom(nvars, 1 + (i % 8) as u8, 6);
            ensure!(
                apply_diff_op(&op, &f).unwrap() == naive_diff_op(&op, &f).unwrap(),
                "kernel disagrees with iterated differentiation on instance {i}"
            );
        }

        // Part two: the incremental solver against dense textbook
        // elimination on the condition systems of every E6 degree.
        let g = catalog(GroupName::E6);
        let mut dims = Vec::new();
        for &d in &g.degrees {
            let (rows, ncols) = condition_rows(GroupName::E6, d);
            let dense = null_space_dense(&rows, ncols);
            let mut state = EliminationState::new(ncols);
            for row in &rows {
                state.add_rational_row(row);
            }
            let incremental = state.null_space();
            ensure!(
                dense.len() == incremental.len(),
                "degree {d}: null space dimensions differ ({} dense, {} incremental)",
                dense.len(),
                incremental.len()
            );
            ensure!(
                rref(dense.clone()) == rref(incremental.clone()),
                "degree {d}: null spaces span different subspaces"
            );
            dims.push(format!("{d}:{}", dense.len()));
        }
        Ok(format!(
            "200 kernel instances agree; E6 null-space dims {{{}}} agree with the dense oracle",
            dims.join(", ")
        ))
    });
}

#[test]
fn criterion_9_deterministic_artifacts() {
    criterion(9, "byte-identical artifacts for a fixed seed", || {
        let run = |dir: &std::path::Path| {
            for args in [
                vec!["export", "--group", "E6", "--out"],
                vec!["verify", "--group", "E6", "--seed", "42", "--out"],
            ] {
                let out = Command::new(env!("CARGO_BIN_EXE_invar"))
                    .args(&args)
                    .arg(dir)
                    .output()
                    .expect("binary runs");
                assert!(
                    out.status.success(),
                    "{args:?}: {}",
                    String::from_utf8_lossy(&out.stderr)
                );
            }
        };
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        run(d1.path());
        run(d2.path());
        let mut names = Vec::new();
        for entry in std::fs::read_dir(d1.path()).unwrap() {
            let name = entry.unwrap().file_name();
            let a = std::fs::read(d1.path().join(&name)).unwrap();
            let b = std::fs::read(d2.path().join(&name)).map_err(|e| {
                format!("{} missing from the second run: {e}", name.to_string_lossy())
            })?;
            ensure!(
                a == b,
                "{} differs between identical runs",
                name.to_string_lossy()
            );
            names.push(name.to_string_lossy().into_owned());
        }
        ensure!(names.len() == 7, "expected 7 artifacts, found {}", names.len());
        Ok(format!("{} artifacts byte-identical across runs", names.len()))
    });
}
