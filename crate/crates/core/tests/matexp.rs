mod common;

use casimir_core::catalog::{all_entries, generate_n_n1};

#[test]
fn closed_form_exponentials_match_the_oracle() {
    let mut skipped = Vec::new();
    for e in all_entries().unwrap() {
        let t = common::exp_matches_oracle(&e, 20, 0).unwrap_or_else(|m| panic!("{m}"));
        skipped.extend(t.skipped.into_iter().map(|(i, _)| format!("{} e{}", e.id, i + 1)));
    }
    // only the semisimple parts have no triangular form
    assert!(skipped.iter().all(|s| s.starts_with("so3") || s.starts_with("sl2R")), "{skipped:?}");
}

#[test]
fn filiform_exponentials_match_the_oracle() {
    for n in [5, 8] {
        common::exp_matches_oracle(&generate_n_n1(n).unwrap(), 5, 1).unwrap_or_else(|m| panic!("{m}"));
    }
}
