mod common;

use casimir_core::catalog::all_entries;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn closed_form_ring_ops_match_pointwise(a in common::closed_form(), b in common::closed_form(), pts in common::theta_points()) {
        common::ring_ops_agree(&a, &b, &pts).map_err(TestCaseError::fail)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn derivative_undoes_integral(a in common::closed_form(), var in 0usize..common::NVARS) {
        common::diff_inverts_integrate(&a, var).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn trig_products_are_confluent(a in common::trig_atom(), b in common::trig_atom(), c in common::trig_atom()) {
        common::trig_products_associate(&a, &b, &c).map_err(TestCaseError::fail)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn symmetrized_word_collapses_to_monomial(w in common::word()) {
        common::collapse_recovers_monomial(&w).map_err(TestCaseError::fail)?;
    }
}

#[test]
fn corpus_gradients_match_central_differences() {
    for e in all_entries().unwrap() {
        if let Err(msg) = common::gradients_match_differences(&e, 10, 0) {
            panic!("{msg}");
        }
    }
}
