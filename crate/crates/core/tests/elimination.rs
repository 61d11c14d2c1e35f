use casimir_core::catalog::{all_entries, generate_n_n1, load_entry};
use casimir_core::format::parse_assumption;
use casimir_core::moving_frame::eliminate;
use casimir_core::symmetrizer::symmetrize;
use casimir_core::verifier::{equivalence_check, CheckConfig, Verdict};
use casimir_core::Error;

fn cfg() -> CheckConfig {
    CheckConfig { tol: 1e-8, ..CheckConfig::default() }
}

/// Rows whose pivots need a parameter condition the row does not state.
const CASE_SPLITS: &[(&str, &str)] = &[
    ("A5.20", "a != 0"),
    ("A5.26", "a != 0"),
    ("A5.26[s=-1]", "a != 0"),
    ("A5.30", "a + 1 != 0"),
    ("N6.1", "a*d - b*c != 0"),
    ("N6.2", "a*c - b != 0"),
    ("N6.6", "a != 0"),
    ("N6.7", "a != 0"),
    ("N6.13", "a*d - b*c != 0"),
];

/// Rows where some group parameters stay unsolved.
const PARTIAL: &[&str] = &["so3", "sl2R+2A1", "A5.25", "A5.26", "A5.26[s=-1]"];

#[test]
fn elimination_reproduces_the_catalog() {
    let mut bad = Vec::new();
    for e in all_entries().unwrap() {
        let split = CASE_SPLITS.iter().find(|(id, _)| *id == e.id);
        let mut sc = e.sc.clone();
        match (eliminate(&sc, 0), split) {
            (Err(Error::UndecidableCaseSplit { .. }), Some((_, cond))) => {
                sc.add_assumption(parse_assumption(cond, sc.params()).unwrap()).unwrap();
            }
            (Err(err), _) => {
                bad.push(format!("{}: {err}", e.id));
                continue;
            }
            (Ok(_), Some(_)) => {
                bad.push(format!("{}: expected a case split", e.id));
                continue;
            }
            (Ok(_), None) => {}
        }
        let r = eliminate(&sc, 0).unwrap();
        let partial = PARTIAL.contains(&e.id.as_str());
        if r.is_complete() == partial {
            bad.push(format!("{}: complete = {}", e.id, r.is_complete()));
            continue;
        }
        if partial {
            continue;
        }
        assert_eq!(r.invariants.len() + r.rank, e.dim(), "{}", e.id);
        let rep = equivalence_check(&sc, &r.invariants, &e.invariants, &cfg()).unwrap();
        if rep.verdict == Verdict::Fail {
            bad.push(format!("{}: {rep}", e.id));
        }
    }
    assert!(bad.is_empty(), "{}", bad.join("\n"));
}

#[test]
fn case_split_names_the_condition() {
    let e = load_entry("N6.1").unwrap();
    let err = eliminate(&e.sc, 0).unwrap_err().to_string();
    assert!(err.contains("a*d - b*c"), "{err}");
}

#[test]
fn worked_examples_and_filiform_family() {
    for id in ["A4.6", "A5.27K", "N6.16", "N6.25"] {
        let e = load_entry(id).unwrap();
        let r = eliminate(&e.sc, 7).unwrap().require_complete().unwrap();
        let rep = equivalence_check(&e.sc, &r.invariants, &e.invariants, &cfg()).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "{id}: {rep}");
    }
    for n in 3..=10 {
        let e = generate_n_n1(n).unwrap();
        let r = eliminate(&e.sc, 0).unwrap().require_complete().unwrap();
        assert_eq!(r.invariants.len(), n - 2);
        let rep = equivalence_check(&e.sc, &r.invariants, &e.invariants, &cfg()).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "n = {n}: {rep}");
    }
}

#[test]
fn a536_symmetrizes_to_the_operator_form() {
    let e = load_entry("A5.36").unwrap();
    let r = eliminate(&e.sc, 0).unwrap().require_complete().unwrap();
    let rep = equivalence_check(&e.sc, &r.invariants, &e.invariants, &cfg()).unwrap();
    assert_eq!(rep.verdict, Verdict::Pass, "{rep}");
    let s = symmetrize(&r.invariants[0]);
    assert_eq!(s.to_string(), "e5 + (e2*e3+e3*e2)/(2*e1)");
}
