use casimir_core::catalog::{all_entries, check_entry, corpus_files, generate_n_n1, load_entry};
use casimir_core::format::{parse_algebra_file, parse_invariant_expr, serialize_algebra};
use casimir_core::verifier::{equivalence_check, infinitesimal_check, CheckConfig, Verdict};

#[test]
fn every_entry_checks_out() {
    let cfg = CheckConfig::default();
    let mut bad = Vec::new();
    for e in all_entries().unwrap() {
        let c = check_entry(&e, &cfg).unwrap();
        if let Some(why) = c.failure() {
            bad.push(format!("{}: {why}", e.id));
        }
    }
    assert!(bad.is_empty(), "{}", bad.join("\n"));
}

#[test]
fn files_round_trip_byte_for_byte() {
    let mut n = 0;
    for (name, text) in corpus_files() {
        let sc = parse_algebra_file(text).unwrap();
        let again = serialize_algebra(&sc);
        assert_eq!(again, text, "{name}");
        assert_eq!(parse_algebra_file(&again).unwrap(), sc, "{name}");
        n += 1;
    }
    assert!(n >= 121);
}

// Each correction is backed by the printed form failing the same check.
#[test]
fn printed_forms_of_corrected_rows_fail() {
    let cfg = CheckConfig::default();
    let mut corrected = 0;
    for e in all_entries().unwrap() {
        let Some(err) = &e.erratum else { continue };
        corrected += 1;
        if e.invariant_text == err.printed {
            continue; // bracket correction only
        }
        let printed: Vec<_> =
            err.printed.iter().map(|t| parse_invariant_expr(t, e.dim(), e.sc.params()).unwrap()).collect();
        let any_fails = printed
            .iter()
            .any(|f| infinitesimal_check(&e.sc, f, &cfg).unwrap().verdict == Verdict::Fail);
        assert!(any_fails, "{}: printed basis passes, correction unneeded", e.id);
    }
    assert!(corrected >= 10);
}

#[test]
fn small_filiform_members_match_table_rows() {
    let cfg = CheckConfig { tol: 1e-8, ..CheckConfig::default() };
    for (n, id) in [(3, "A3.1"), (4, "A4.1"), (5, "A5.2")] {
        let g = generate_n_n1(n).unwrap();
        let row = load_entry(id).unwrap();
        assert_eq!(g.sc.stored().count(), row.sc.stored().count(), "{id}");
        for ((k, a), (l, b)) in g.sc.stored().zip(row.sc.stored()) {
            assert_eq!((k, a), (l, b), "{id}");
        }
        let rep = equivalence_check(&row.sc, &g.invariants, &row.invariants, &cfg).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "{id}: {rep}");
    }
}

#[test]
fn filiform_family_checks_out() {
    let cfg = CheckConfig::default();
    for n in 3..=10 {
        let e = generate_n_n1(n).unwrap();
        let c = check_entry(&e, &cfg).unwrap();
        assert_eq!(c.failure(), None, "n = {n}");
    }
}
