//! Structural checks on the group catalog, the starting invariants, and the
//! generated root systems, including pointwise invariance under the
//! reflections the roots define.

use std::collections::BTreeSet;

use invar_core::exactnum::{FieldElement, Rational};
use invar_core::groups::{
    build_p_basis, catalog, generate_positive_roots, rescale_to_q, GroupName,
};
use invar_core::poly::{PolyF, PolyQ};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

const ALL: [GroupName; 5] =
    [GroupName::B3, GroupName::D4, GroupName::E6, GroupName::E7, GroupName::E8];

#[test]
fn first_rescaled_invariant_is_the_sum_of_squares() {
    for name in ALL {
        let g = catalog(name);
        let q = rescale_to_q(g, &build_p_basis(g)).unwrap();
        let mut expected = PolyQ::zero(g.rank);
        for i in 0..g.rank as usize {
            let mut e = vec![0u8; g.rank as usize];
            e[i] = 2;
            expected = expected.add(&PolyQ::monomial(g.rank, &e, Rational::from_int(1))).unwrap();
        }
        let expected_f: PolyF = expected.map_coeffs(|c| FieldElement::from_rational(c.clone()));
        assert_eq!(q.polys[0].as_field(), expected_f, "{}: q_1 ≠ Σ x_i²", name.as_str());
    }
}

#[test]
fn starting_invariants_are_homogeneous_with_catalog_degrees() {
    for name in ALL {
        let g = catalog(name);
        let p = build_p_basis(g);
        assert_eq!(p.polys.len(), g.degrees.len());
        for (poly, &d) in p.polys.iter().zip(&g.degrees) {
            assert_eq!(poly.homogeneous_degree(), Some(d), "{}", name.as_str());
            assert_eq!(poly.nvars(), g.rank);
        }
    }
}

#[test]
fn root_counts_match_the_degree_identity() {
    // N = Σ (d_a − 1) counts the reflecting hyperplanes; the generated root
    // sets must hit exactly that number, with no duplicates and no zeros.
    for name in ALL {
        let g = catalog(name);
        let roots = generate_positive_roots(g).unwrap();
        let expected: usize = g.degrees.iter().map(|&d| usize::from(d) - 1).sum();
        assert_eq!(roots.len(), expected, "{}", name.as_str());
        assert_eq!(roots.len(), g.n_positive_roots, "{}", name.as_str());
        let rendered: BTreeSet<String> = roots
            .iter()
            .map(|r| {
                let parts: Vec<String> = r.iter().map(|c| c.to_string()).collect();
                parts.join(",")
            })
            .collect();
        assert_eq!(rendered.len(), roots.len(), "{}: duplicate roots", name.as_str());
        for r in &roots {
            assert!(r.iter().any(|c| !c.is_zero()), "{}: zero root", name.as_str());
        }
    }
}

fn dot(a: &[FieldElement], b: &[FieldElement]) -> FieldElement {
    a.iter().zip(b).fold(FieldElement::zero(), |acc, (x, y)| acc.add(&x.mul(y)))
}

/// Image of v under the reflection across the hyperplane orthogonal to α:
/// v − (2(α·v)/(α·α))·α.
fn reflect(alpha: &[FieldElement], v: &[FieldElement]) -> Vec<FieldElement> {
    let scale = dot(alpha, v).mul(&FieldElement::from_int(2)).mul(&dot(alpha, alpha).inv().unwrap());
    v.iter().zip(alpha).map(|(vi, ai)| vi.sub(&ai.mul(&scale))).collect()
}

/// Every rescaled invariant must take the same value at a point and at its
/// reflection across any reflecting hyperplane. Pointwise, seeded, and
/// exact; a handful of roots per group keeps the largest cases quick.
#[test]
fn invariants_are_constant_under_the_generating_reflections() {
    let mut rng = ChaCha20Rng::seed_from_u64(23);
    for name in ALL {
        let g = catalog(name);
        let q = rescale_to_q(g, &build_p_basis(g)).unwrap();
        let polys: Vec<PolyF> = q.polys.iter().map(|p| p.as_field()).collect();
        let roots = generate_positive_roots(g).unwrap();
        let stride = if name == GroupName::E8 { 11 } else { 5 }.min(roots.len());
        for alpha in roots.iter().step_by(stride) {
            let v: Vec<FieldElement> = (0..g.rank)
                .map(|_| FieldElement::from_int((rng.next_u64() % 13) as i64 - 6))
                .collect();
            let w = reflect(alpha, &v);
            for (a, poly) in polys.iter().enumerate() {
                assert_eq!(
                    poly.eval(&v).unwrap(),
                    poly.eval(&w).unwrap(),
                    "{}: q_{} not invariant",
                    name.as_str(),
                    a + 1
                );
            }
        }
    }
}
