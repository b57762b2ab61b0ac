//! Property tests for the algebraic layers: ring and field axioms with
//! numeric cross-validation, normalization invariants, exponent ordering and
//! degree arithmetic.

use hcf_core::gpoly::{GPoly, GPolyP, PolyD};
use hcf_core::prec::Real;
use hcf_core::scalars::{pi_rational, BasisRef, ConstField, DelayBasis, ExpConst, Exponent};
use num_rational::BigRational;
use proptest::prelude::*;
use std::cmp::Ordering;

fn basis() -> BasisRef {
    DelayBasis::new(
        vec![
            ("pi".into(), pi_rational(80)),
            ("d".into(), BigRational::new(7.into(), 4.into())),
        ],
        50,
    )
    .unwrap()
}

fn qr(n: i64, d: u32) -> BigRational {
    BigRational::new(n.into(), (d as i64).into())
}

prop_compose! {
    fn arb_exponent()(c1 in -3i64..=3, c2 in -3i64..=3, off in -8i64..=8) -> Exponent {
        Exponent::new(&basis(), vec![qr(c1, 1), qr(c2, 1)], qr(off, 2))
    }
}

prop_compose! {
    fn arb_expconst()(terms in prop::collection::vec((arb_exponent(), -4i64..=4), 0..4)) -> ExpConst {
        ExpConst::normalize(
            terms.into_iter().map(|(e, q)| (e, qr(q, 1))).collect(),
        )
    }
}

prop_compose! {
    fn arb_field()(num in arb_expconst(), den in arb_expconst()) -> ConstField {
        let den = if den.is_zero() { ExpConst::one() } else { den };
        ConstField::new(num, den).unwrap()
    }
}

fn eval80(c: &ExpConst) -> Real {
    c.eval(80)
}

fn close(a: &Real, b: &Real, tol: f64) -> bool {
    let diff = a.sub(b).abs();
    let mag = a.abs();
    let floor = Real::one(80);
    let denom = if mag.cmp_real(&floor) == Ordering::Greater { mag } else { floor };
    diff.div(&denom).to_f64() <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn expconst_ring_axioms(a in arb_expconst(), b in arb_expconst(), c in arb_expconst()) {
        // associativity and commutativity of both operations
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        prop_assert_eq!(a.add(&b), b.add(&a));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        // distributivity
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        // identities
        prop_assert_eq!(a.add(&ExpConst::zero()), a.clone());
        prop_assert_eq!(a.mul(&ExpConst::one()), a.clone());
    }

    #[test]
    fn expconst_eval_is_homomorphism(a in arb_expconst(), b in arb_expconst()) {
        let sum = eval80(&a.add(&b));
        let direct = eval80(&a).add(&eval80(&b));
        prop_assert!(close(&sum, &direct, 1e-30));
        let prod = eval80(&a.mul(&b));
        let direct = eval80(&a).mul(&eval80(&b));
        prop_assert!(close(&prod, &direct, 1e-30));
    }

    #[test]
    fn const_field_axioms(x in arb_field(), y in arb_field(), z in arb_field()) {
        prop_assert_eq!(x.add(&y), y.add(&x));
        prop_assert_eq!(x.mul(&y.add(&z)), x.mul(&y).add(&x.mul(&z)));
        prop_assert_eq!(x.add(&ConstField::zero()), x.clone());
        if !x.is_zero() {
            prop_assert_eq!(x.mul(&x.inv().unwrap()), ConstField::one());
        }
    }

    #[test]
    fn exponent_order_antisymmetric_transitive(
        a in arb_exponent(),
        b in arb_exponent(),
        c in arb_exponent(),
    ) {
        // antisymmetry
        match a.compare(&b) {
            Ordering::Less => prop_assert_eq!(b.compare(&a), Ordering::Greater),
            Ordering::Greater => prop_assert_eq!(b.compare(&a), Ordering::Less),
            Ordering::Equal => prop_assert_eq!(b.compare(&a), Ordering::Equal),
        }
        // transitivity of strict order (grid values keep comparisons exact)
        if a.compare(&b) == Ordering::Less && b.compare(&c) == Ordering::Less {
            prop_assert_eq!(a.compare(&c), Ordering::Less);
        }
    }

    #[test]
    fn normalize_idempotent_and_order_insensitive(
        terms in prop::collection::vec((arb_exponent(), -3i64..=3, 0usize..=2), 1..6),
        shuffle_seed in 0u64..1000,
    ) {
        let raw: Vec<(Exponent, PolyD)> = terms
            .into_iter()
            .map(|(e, c, k)| {
                (e, PolyD::monomial(hcf_core::Scalar::from_rational(qr(c, 1)), k))
            })
            .collect();
        let p: GPolyP = GPoly::normalize(raw.clone());
        // idempotent
        let again: GPolyP = GPoly::normalize(p.terms().to_vec());
        prop_assert_eq!(&again, &p);
        // permutation insensitive
        let mut shuffled = raw;
        let n = shuffled.len();
        let mut state = shuffle_seed;
        for i in (1..n).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            let j = (state >> 33) as usize % (i + 1);
            shuffled.swap(i, j);
        }
        let q: GPolyP = GPoly::normalize(shuffled);
        prop_assert_eq!(&q, &p);
    }

    #[test]
    fn sigma_degree_additive_and_nonnegative(
        t1 in prop::collection::vec((arb_exponent(), 1i64..=3), 1..4),
        t2 in prop::collection::vec((arb_exponent(), 1i64..=3), 1..4),
    ) {
        // positive coefficients prevent cancellation to zero
        let mk = |ts: Vec<(Exponent, i64)>| -> GPolyP {
            GPoly::normalize(
                ts.into_iter()
                    .map(|(e, c)| (e, PolyD::from_rationals(&[qr(c, 1)])))
                    .collect(),
            )
        };
        let x = mk(t1);
        let y = mk(t2);
        let p = x.mul(&y);
        prop_assert!(!p.is_zero());
        let expect_plus = x.deg_plus().unwrap().add(y.deg_plus().unwrap());
        let expect_minus = x.deg_minus().unwrap().add(y.deg_minus().unwrap());
        prop_assert_eq!(p.deg_plus().unwrap().compare(&expect_plus), Ordering::Equal);
        prop_assert_eq!(p.deg_minus().unwrap().compare(&expect_minus), Ordering::Equal);

        // diameter is nonnegative, zero exactly for monomials
        let d = x.deg_sigma().unwrap();
        prop_assert_ne!(d.compare(&Exponent::zero()), Ordering::Less);
        prop_assert_eq!(
            d.compare(&Exponent::zero()) == Ordering::Equal,
            x.num_terms() == 1
        );
    }
}
