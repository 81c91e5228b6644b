//! Property tests for the sparse polynomial ring: algebraic laws that the
//! solver and verifier silently rely on, checked on randomized inputs.

use invar_core::exactnum::Rational;
use invar_core::poly::{key_degree, key_mul, pack_key, unpack_key, PolyQ};
use proptest::prelude::*;

/// Raw material for one polynomial: a handful of (exponents, coefficient)
/// pairs with small entries. Building through `add` exercises term merging.
fn raw_terms(nvars: usize) -> impl Strategy<Value = Vec<(Vec<u8>, i64)>> {
    prop::collection::vec(
        (prop::collection::vec(0u8..5, nvars), -9i64..10),
        1..6,
    )
}

fn build(nvars: usize, raw: &[(Vec<u8>, i64)]) -> PolyQ {
    raw.iter().fold(PolyQ::zero(nvars as u8), |acc, (e, c)| {
        acc.add(&PolyQ::monomial(nvars as u8, e, Rational::from_int(*c))).unwrap()
    })
}

proptest! {
    #[test]
    fn addition_commutes_and_subtraction_inverts(
        nvars in 1usize..5, seed in prop::collection::vec(raw_terms(4), 2)
    ) {
        let f = build(nvars, &seed[0].iter().map(|(e, c)| (e[..nvars].to_vec(), *c)).collect::<Vec<_>>());
        let g = build(nvars, &seed[1].iter().map(|(e, c)| (e[..nvars].to_vec(), *c)).collect::<Vec<_>>());
        prop_assert_eq!(f.add(&g).unwrap(), g.add(&f).unwrap());
        prop_assert!(f.add(&g).unwrap().sub(&g).unwrap() == f);
    }

    #[test]
    fn multiplication_commutes_and_distributes(
        nvars in 1usize..5, seed in prop::collection::vec(raw_terms(4), 3)
    ) {
        let cut = |s: &[(Vec<u8>, i64)]| build(nvars, &s.iter().map(|(e, c)| (e[..nvars].to_vec(), *c)).collect::<Vec<_>>());
        let (f, g, h) = (cut(&seed[0]), cut(&seed[1]), cut(&seed[2]));
        prop_assert_eq!(f.mul(&g).unwrap(), g.mul(&f).unwrap());
        let lhs = f.mul(&g.add(&h).unwrap()).unwrap();
        let rhs = f.mul(&g).unwrap().add(&f.mul(&h).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        let assoc_l = f.mul(&g).unwrap().mul(&h).unwrap();
        let assoc_r = f.mul(&g.mul(&h).unwrap()).unwrap();
        prop_assert_eq!(assoc_l, assoc_r);
    }

    /// d(fg)/dx_i = f'g + fg' ties `derivative` to `mul` and `add` through an
    /// identity none of them implements directly.
    #[test]
    fn derivative_satisfies_the_product_rule(
        nvars in 1usize..5, i in 0usize..4, seed in prop::collection::vec(raw_terms(4), 2)
    ) {
        let i = i % nvars;
        let cut = |s: &[(Vec<u8>, i64)]| build(nvars, &s.iter().map(|(e, c)| (e[..nvars].to_vec(), *c)).collect::<Vec<_>>());
        let (f, g) = (cut(&seed[0]), cut(&seed[1]));
        let lhs = f.mul(&g).unwrap().derivative(i).unwrap();
        let rhs = f.derivative(i).unwrap().mul(&g).unwrap()
            .add(&f.mul(&g.derivative(i).unwrap()).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    /// Σ_i x_i ∂f/∂x_i = d·f for homogeneous f of degree d.
    #[test]
    fn euler_identity_holds_for_homogeneous_polynomials(
        nvars in 1usize..5, deg in 1u8..9, seed in raw_terms(4)
    ) {
        // Force homogeneity: pad the last exponent up to the target degree.
        let raw: Vec<(Vec<u8>, i64)> = seed.iter().map(|(e, c)| {
            let mut e: Vec<u8> = e[..nvars].iter().map(|&x| x.min(deg / nvars as u8 + 1)).collect();
            let total: u8 = e.iter().sum();
            if total > deg {
                let mut over = total - deg;
                for x in e.iter_mut() {
                    let cut = over.min(*x);
                    *x -= cut;
                    over -= cut;
                }
            }
            let total: u8 = e.iter().sum();
            let last = e.len() - 1;
            e[last] += deg - total;
            (e, *c)
        }).collect();
        let f = build(nvars, &raw);
        prop_assume!(!f.is_zero());
        let mut euler = PolyQ::zero(nvars as u8);
        for i in 0..nvars {
            let xi = PolyQ::variable(nvars as u8, i, Rational::from_int(1)).unwrap();
            euler = euler.add(&xi.mul(&f.derivative(i).unwrap()).unwrap()).unwrap();
        }
        prop_assert_eq!(euler, f.mul_scalar(&Rational::from_int(i64::from(deg))));
    }

    /// Evaluation is a ring homomorphism: (f+g)(x₀) = f(x₀)+g(x₀) and
    /// (f·g)(x₀) = f(x₀)·g(x₀).
    #[test]
    fn evaluation_respects_ring_operations(
        nvars in 1usize..5,
        seed in prop::collection::vec(raw_terms(4), 2),
        pt in prop::collection::vec(-5i64..6, 4)
    ) {
        let cut = |s: &[(Vec<u8>, i64)]| build(nvars, &s.iter().map(|(e, c)| (e[..nvars].to_vec(), *c)).collect::<Vec<_>>());
        let (f, g) = (cut(&seed[0]), cut(&seed[1]));
        let point: Vec<Rational> = pt[..nvars].iter().map(|&x| Rational::from_int(x)).collect();
        let fv = f.eval(&point).unwrap();
        let gv = g.eval(&point).unwrap();
        prop_assert_eq!(f.add(&g).unwrap().eval(&point).unwrap(), fv.add(&gv));
        prop_assert_eq!(f.mul(&g).unwrap().eval(&point).unwrap(), fv.mul(&gv));
    }

    /// Packed keys round-trip and order by total degree first: the term order
    /// the solver's leading-term logic and the exact division step assume.
    #[test]
    fn key_packing_roundtrips_and_orders_by_degree_first(
        e1 in prop::collection::vec(0u8..16, 8),
        e2 in prop::collection::vec(0u8..16, 8),
        m in prop::collection::vec(0u8..8, 8)
    ) {
        let k1 = pack_key(&e1);
        let (back, deg) = unpack_key(k1);
        prop_assert_eq!(&back[..], &e1[..]);
        prop_assert_eq!(u32::from(deg), e1.iter().map(|&x| u32::from(x)).sum::<u32>());

        let k2 = pack_key(&e2);
        let d1: u32 = e1.iter().map(|&x| u32::from(x)).sum();
        let d2: u32 = e2.iter().map(|&x| u32::from(x)).sum();
        if d1 != d2 {
            prop_assert_eq!(d1 < d2, k1 < k2, "lower total degree must compare lower");
        }

        // Multiplying both sides by a fixed monomial preserves the order;
        // this is the property that makes division by leading terms valid.
        if k1 != k2 {
            let km = pack_key(&m);
            let dm: u32 = m.iter().map(|&x| u32::from(x)).sum();
            prop_assert_eq!(k1 < k2, key_mul(k1, km) < key_mul(k2, km));
            prop_assert_eq!(u32::from(key_degree(key_mul(k1, km))), d1 + dm);
        }
    }
}
