use fermikit::floquet::char_laurent;
use fermikit::lattice::{dft, idft, PeriodSpec, PeriodicPotential};
use fermikit::laurent::{rat, LaurentPoly};
use fermikit::scalar::GaussRat;
use num_complex::Complex64;
use proptest::prelude::*;

fn scalar() -> impl Strategy<Value = GaussRat> {
    (-6i64..=6, 1i64..=4, -3i64..=3, 1i64..=3).prop_map(|(a, b, c, d)| GaussRat::new(rat(a, b), rat(c, d)))
}

fn poly() -> impl Strategy<Value = LaurentPoly> {
    prop::collection::vec(((-3i32..=3, -3i32..=3, 0i32..=2), scalar()), 0..6).prop_map(|terms| {
        LaurentPoly::from_terms(2, true, terms.into_iter().map(|((a, b, l), c)| (vec![a, b, l], c)))
    })
}

fn nonzero_poly() -> impl Strategy<Value = LaurentPoly> {
    poly().prop_filter("nonzero", |p| !p.is_zero())
}

fn point() -> impl Strategy<Value = (Vec<Complex64>, Complex64)> {
    let c = || (0.5f64..2.0, 0.0f64..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t));
    (c(), c(), c()).prop_map(|(a, b, l)| (vec![a, b], l))
}

fn periods() -> impl Strategy<Value = Vec<usize>> {
    prop_oneof![
        Just(vec![2]),
        Just(vec![3]),
        Just(vec![4]),
        Just(vec![2, 3]),
        Just(vec![1, 4]),
        Just(vec![3, 4]),
        Just(vec![1, 2, 3]),
    ]
}

fn potential() -> impl Strategy<Value = PeriodicPotential> {
    periods().prop_flat_map(|q| {
        let ps = PeriodSpec::new(&q).unwrap();
        prop::collection::vec(scalar(), ps.volume())
            .prop_map(move |vals| PeriodicPotential::exact(ps.clone(), vals).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(a.add(&b), b.add(&a));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert!(a.sub(&a).is_zero());
        prop_assert_eq!(a.mul(&LaurentPoly::one(2, true)), a.clone());
        prop_assert_eq!(a.add(&LaurentPoly::zero(2, true)), a);
    }

    #[test]
    fn evaluation_is_a_homomorphism(a in poly(), b in poly(), (z, l) in point()) {
        let ea = a.eval(&z, l).unwrap();
        let eb = b.eval(&z, l).unwrap();
        let scale = 1.0 + ea.norm() * eb.norm() + ea.norm() + eb.norm();
        prop_assert!((a.mul(&b).eval(&z, l).unwrap() - ea * eb).norm() <= 1e-9 * scale);
        prop_assert!((a.add(&b).eval(&z, l).unwrap() - (ea + eb)).norm() <= 1e-9 * scale);
    }

    #[test]
    fn exact_evaluation_is_a_homomorphism(a in poly(), b in poly(), x in scalar(), y in scalar(), l in scalar()) {
        prop_assume!(!x.is_zero() && !y.is_zero());
        let z = [x, y];
        let prod = a.mul(&b).eval_exact(&z, &l).unwrap();
        prop_assert_eq!(prod, &a.eval_exact(&z, &l).unwrap() * &b.eval_exact(&z, &l).unwrap());
    }

    #[test]
    fn initial_forms_multiply(a in nonzero_poly(), b in nonzero_poly(), s1 in prop::bool::ANY, s2 in prop::bool::ANY) {
        let signs = [if s1 { 1 } else { -1 }, if s2 { 1 } else { -1 }];
        let lhs = a.mul(&b).lowest_component(&signs).unwrap();
        let rhs = a.lowest_component(&signs).unwrap().mul(&b.lowest_component(&signs).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn canonical_text_round_trip(a in poly()) {
        let text = a.to_canonical_string();
        prop_assert_eq!(LaurentPoly::parse_canonical(&text, 2, true).unwrap(), a);
    }

    #[test]
    fn fourier_round_trip(v in potential()) {
        let back = idft(&dft(&v));
        let exact_phases = v.periods().periods().iter().all(|q| matches!(q, 1 | 2 | 4));
        if exact_phases {
            prop_assert_eq!(back.exact_values(), v.exact_values());
        }
        for (x, y) in back.complex_values().iter().zip(v.complex_values()) {
            prop_assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn translation_preserves_char_poly(v in potential(), s in prop::collection::vec(-5i64..5, 3)) {
        prop_assume!(v.periods().volume() <= 6);
        let shift = &s[..v.periods().dim()];
        prop_assert_eq!(char_laurent(&v.translate(shift)).unwrap(), char_laurent(&v).unwrap());
    }
}
