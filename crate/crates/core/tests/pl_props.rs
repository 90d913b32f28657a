mod common;

use common::*;
use fmark::{PlMap, Rational};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn right_action_law(f in pl_map(), g in pl_map(), x in rational()) {
        right_action(&f, &g, &x)?;
    }

    #[test]
    fn axioms(f in pl_map(), g in pl_map(), h in pl_map()) {
        group_axioms(&f, &g, &h)?;
    }

    #[test]
    fn axioms_in_f(f in thompson_element(12), g in thompson_element(12), h in thompson_element(12)) {
        group_axioms(&f, &g, &h)?;
    }

    #[test]
    fn canonical_form(f in pl_map()) {
        canonicality(&f)?;
    }

    #[test]
    fn canonical_form_in_f(f in thompson_element(16)) {
        canonicality(&f)?;
    }

    #[test]
    fn support_of_conjugate(f in pl_map(), g in pl_map()) {
        support_transport(&f, &g)?;
    }

    #[test]
    fn support_of_conjugate_in_f(f in thompson_element(12), g in thompson_element(12)) {
        support_transport(&f, &g)?;
    }

    #[test]
    fn breakpoints_add_at_most(f in pl_map(), g in pl_map()) {
        breakpoint_bound(&f, &g)?;
    }

    #[test]
    fn f_is_closed(f in thompson_element(16), g in thompson_element(16)) {
        closure(&f, &g)?;
    }

    #[test]
    fn inverse_evaluation(f in pl_map(), x in rational()) {
        prop_assert_eq!(f.eval_inverse(&f.eval(&x)), x.clone());
        prop_assert_eq!(f.inverse().eval(&x), f.eval_inverse(&x));
    }

    #[test]
    fn powers_add(f in thompson_element(8), a in -6i64..6, b in -6i64..6) {
        prop_assert_eq!(f.pow(a).then(&f.pow(b)), f.pow(a + b));
    }

    #[test]
    fn commutator_of_disjoint_supports(f in thompson_element(8), k in 1i64..4) {
        // conjugating by a large translation moves a compact support off itself
        let unit = fmark::thompson::transport_to_unit(&f).unwrap();
        let far = unit.conjugate(&PlMap::translation(k));
        prop_assert!(unit.commutator(&far).is_identity());
    }

    #[test]
    fn rational_field_laws(a in rational(), b in rational(), c in rational()) {
        prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
        prop_assert_eq!(&(&a - &b) + &b, a.clone());
        if !b.is_zero() {
            prop_assert_eq!(&(&a / &b) * &b, a.clone());
        }
        prop_assert_eq!(a.to_string().parse::<Rational>().unwrap(), a);
    }
}
