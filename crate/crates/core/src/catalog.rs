//! The built-in corpus: every algebra of the low-dimensional tables, the
//! worked examples, and the nilpotent family `n_{n,1}`.
//!
//! Each entry is an algebra file (see [`crate::format`]) plus a record in the
//! index listing its invariant count and known invariant basis. Rows whose
//! invariants depend on a parameter condition have sub-entries keyed
//! `<row>[<condition>]`, e.g. `A4.8[a=-1]`.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Deserialize;

use crate::algebra::StructureConstants;
use crate::error::{Error, Result};
use crate::format::{parse_algebra_file, parse_invariant_expr};
use crate::poly::{Poly, RatFunc, Sym};
use crate::scalar::ScalarExpr;
use crate::verifier::{finite_check, independence_rank, infinitesimal_check, CheckConfig, CheckReport};

include!(concat!(env!("OUT_DIR"), "/corpus_files.rs"));

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct IndexRecord {
    id: String,
    file: String,
    provenance: String,
    n_a: usize,
    invariants: Vec<String>,
    #[serde(default)]
    symmetrized: Vec<String>,
    #[serde(default)]
    branch_of: Option<String>,
    #[serde(default)]
    condition: Option<String>,
    #[serde(default)]
    corrected: Option<Vec<String>>,
    #[serde(default)]
    erratum: Option<String>,
}

#[derive(Debug, Deserialize)]
struct Index {
    entry: Vec<IndexRecord>,
}

/// A parameter condition under which a row has its own invariant basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub of: String,
    pub condition: String,
}

/// A printed invariant that failed verification, with its replacement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Erratum {
    pub note: String,
    /// The invariants as printed, in the commutative reading.
    pub printed: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct AlgebraEntry {
    pub id: String,
    pub sc: StructureConstants,
    pub n_a: usize,
    /// Invariant basis in the commutative reading over `x1..xn`.
    pub invariants: Vec<ScalarExpr>,
    pub invariant_text: Vec<String>,
    /// Operator form for rows printed with noncommuting products.
    pub symmetrized: Vec<String>,
    pub provenance: String,
    pub branch: Option<Branch>,
    pub erratum: Option<Erratum>,
    /// Source text of the algebra file.
    pub source: String,
    pub file: String,
}

impl AlgebraEntry {
    pub fn dim(&self) -> usize {
        self.sc.dim()
    }
}

/// Selects catalog rows by dimension and provenance.
#[derive(Debug, Clone, Default)]
pub struct Filter {
    pub dim: Option<usize>,
    /// Substring of the provenance, e.g. `"Table 2"` or `"Example 1"`.
    pub provenance: Option<String>,
    /// Also list the conditional sub-entries.
    pub branches: bool,
}

impl Filter {
    pub fn all() -> Filter {
        Filter::default()
    }

    pub fn dimension(n: usize) -> Filter {
        Filter { dim: Some(n), ..Filter::default() }
    }

    pub fn provenance(p: &str) -> Filter {
        Filter { provenance: Some(p.to_string()), ..Filter::default() }
    }

    pub fn with_branches(mut self) -> Filter {
        self.branches = true;
        self
    }
}

fn index() -> &'static [IndexRecord] {
    static CELL: OnceLock<Vec<IndexRecord>> = OnceLock::new();
    CELL.get_or_init(|| {
        let idx: Index = toml::from_str(INDEX).expect("corpus index is valid TOML");
        idx.entry
    })
}

fn file_text(name: &str) -> Option<&'static str> {
    FILES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

fn record(id: &str) -> Result<&'static IndexRecord> {
    index().iter().find(|r| r.id == id).ok_or_else(|| Error::UnknownId(id.to_string()))
}

/// File names and texts of every algebra file in the corpus.
pub fn corpus_files() -> impl Iterator<Item = (&'static str, &'static str)> {
    FILES.iter().copied()
}

/// Catalog ids in table order.
pub fn list_entries(filter: &Filter) -> Vec<String> {
    let dims = dims();
    index()
        .iter()
        .filter(|r| filter.branches || r.branch_of.is_none())
        .filter(|r| filter.provenance.as_deref().is_none_or(|p| r.provenance.contains(p)))
        .filter(|r| filter.dim.is_none_or(|d| dims.get(r.id.as_str()) == Some(&d)))
        .map(|r| r.id.clone())
        .collect()
}

fn dims() -> &'static BTreeMap<&'static str, usize> {
    static CELL: OnceLock<BTreeMap<&'static str, usize>> = OnceLock::new();
    CELL.get_or_init(|| {
        index()
            .iter()
            .map(|r| {
                let text = file_text(&r.file).unwrap_or("");
                let n = text
                    .lines()
                    .find_map(|l| l.trim().strip_prefix("dim "))
                    .and_then(|d| d.trim().parse().ok())
                    .unwrap_or(0);
                (r.id.as_str(), n)
            })
            .collect()
    })
}

/// Sub-entry ids of a conditional row; empty for unconditional rows.
pub fn branches(id: &str) -> Result<Vec<String>> {
    record(id)?;
    Ok(index().iter().filter(|r| r.branch_of.as_deref() == Some(id)).map(|r| r.id.clone()).collect())
}

pub fn load_entry(id: &str) -> Result<AlgebraEntry> {
    let r = record(id)?;
    let source = file_text(&r.file)
        .ok_or_else(|| Error::InvalidArgument(format!("corpus file `{}` missing", r.file)))?;
    let sc = parse_algebra_file(source)?;
    let text = r.corrected.clone().unwrap_or_else(|| r.invariants.clone());
    let invariants = text
        .iter()
        .map(|t| parse_invariant_expr(t, sc.dim(), sc.params()))
        .collect::<Result<Vec<_>>>()?;
    let erratum = r.erratum.as_ref().map(|note| Erratum { note: note.clone(), printed: r.invariants.clone() });
    Ok(AlgebraEntry {
        id: r.id.clone(),
        sc,
        n_a: r.n_a,
        invariants,
        invariant_text: text,
        symmetrized: r.symmetrized.clone(),
        provenance: r.provenance.clone(),
        branch: r
            .branch_of
            .as_ref()
            .map(|of| Branch { of: of.clone(), condition: r.condition.clone().unwrap_or_default() }),
        erratum,
        source: source.to_string(),
        file: r.file.clone(),
    })
}

/// Every entry including conditional sub-entries, in table order.
pub fn all_entries() -> Result<Vec<AlgebraEntry>> {
    list_entries(&Filter::all().with_branches()).iter().map(|id| load_entry(id)).collect()
}

/// Verification of one stored invariant.
#[derive(Debug, Clone)]
pub struct InvariantCheck {
    pub text: String,
    pub infinitesimal: CheckReport,
    pub finite: CheckReport,
}

/// An entry's recorded data re-derived from its structure constants.
#[derive(Debug, Clone)]
pub struct EntryCheck {
    pub id: String,
    pub dim: usize,
    pub jacobi: bool,
    pub rank: usize,
    pub n_a: usize,
    pub invariants: Vec<InvariantCheck>,
    pub independence: usize,
}

impl EntryCheck {
    pub fn rank_matches(&self) -> bool {
        self.dim == self.rank + self.n_a
    }

    pub fn passed(&self) -> bool {
        self.jacobi
            && self.rank_matches()
            && self.independence == self.n_a
            && self.invariants.len() == self.n_a
            && self.invariants.iter().all(|c| c.infinitesimal.passed() && c.finite.passed())
    }

    /// Short description of the first failing item, if any.
    pub fn failure(&self) -> Option<String> {
        if !self.jacobi {
            return Some("Jacobi identity fails".into());
        }
        if !self.rank_matches() {
            return Some(format!("rank {} but N_A = {} recorded", self.rank, self.n_a));
        }
        if self.invariants.len() != self.n_a {
            return Some(format!("{} invariants recorded for N_A = {}", self.invariants.len(), self.n_a));
        }
        for c in &self.invariants {
            if !c.infinitesimal.passed() {
                return Some(format!("`{}` infinitesimal check: {}", c.text, c.infinitesimal));
            }
            if !c.finite.passed() {
                return Some(format!("`{}` finite check: {}", c.text, c.finite));
            }
        }
        if self.independence != self.n_a {
            return Some(format!("independence rank {} for N_A = {}", self.independence, self.n_a));
        }
        None
    }
}

/// Jacobi identity, generic rank, both invariance checks on every stored
/// invariant, and functional independence of the basis.
pub fn check_entry(e: &AlgebraEntry, cfg: &CheckConfig) -> Result<EntryCheck> {
    let jacobi = e.sc.validate()?.is_valid();
    let rank = e.sc.specialize().generic_rank(5, cfg.seed)?.rank;
    let invariants = e
        .invariants
        .iter()
        .zip(&e.invariant_text)
        .map(|(f, text)| {
            Ok(InvariantCheck {
                text: text.clone(),
                infinitesimal: infinitesimal_check(&e.sc, f, cfg)?,
                finite: finite_check(&e.sc, f, cfg)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let independence = independence_rank(&e.sc, &e.invariants, cfg.samples, cfg.seed)?;
    Ok(EntryCheck { id: e.id.clone(), dim: e.dim(), jacobi, rank, n_a: e.n_a, invariants, independence })
}

fn factorial(k: usize) -> BigInt {
    (1..=k).fold(BigInt::from(1), |acc, i| acc * BigInt::from(i))
}

/// The nilpotent algebra with `[e_k, e_n] = e_{k-1}` for `k = 2..n-1` and its
/// Casimir basis `e1` together with
/// `sum_j (-1)^(k-j)/(k-j)! e1^(j-2) e2^(k-j) e_j` for `k = 3..n-1`.
pub fn generate_n_n1(n: usize) -> Result<AlgebraEntry> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("n_(n,1) needs n >= 3, got {n}")));
    }
    let mut sc = StructureConstants::new(n, vec![], vec![])?.with_id(format!("n{n}.1"));
    for k in 2..n {
        let mut coeffs = vec![RatFunc::zero(); n];
        coeffs[k - 2] = RatFunc::one();
        sc.set_bracket(k - 1, n - 1, coeffs)?;
    }
    let x = |j: usize| Poly::var(Sym::x(j + 1));
    let mut polys = vec![x(0)];
    for k in 3..n {
        // the j = 1 term has e1^(-1) e1, which cancels
        let mut p = Poly::zero();
        for j in 1..=k {
            let sign = if (k - j) % 2 == 0 { 1 } else { -1 };
            let c = BigRational::new(BigInt::from(sign), factorial(k - j));
            let e1 = if j >= 2 { x(0).pow((j - 2) as u32) } else { Poly::one() };
            let ej = if j >= 2 { x(j - 1) } else { Poly::one() };
            let e2 = x(1).pow((k - j) as u32);
            p = p.add(&e1.mul(&e2).mul(&ej).scale(&c));
        }
        polys.push(p);
    }
    let invariants: Vec<ScalarExpr> = polys.iter().map(ScalarExpr::from_poly).collect();
    let invariant_text = polys.iter().map(|p| p.to_string()).collect();
    let source = crate::format::serialize_algebra(&sc);
    Ok(AlgebraEntry {
        id: format!("n{n}.1"),
        sc,
        n_a: n - 2,
        invariants,
        invariant_text,
        symmetrized: vec![],
        provenance: "Example 6".into(),
        branch: None,
        erratum: None,
        source,
        file: String::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_three_rows() {
        let ids = list_entries(&Filter::dimension(3));
        assert_eq!(ids, ["A3.1", "A3.2", "A3.3", "A3.4", "A3.5", "sl2R", "so3"]);
        assert!(list_entries(&Filter::dimension(7)).is_empty());
    }

    #[test]
    fn second_table_has_forty_rows() {
        let ids = list_entries(&Filter::provenance("Table 2"));
        assert_eq!(ids.len(), 40);
        assert_eq!(ids.first().unwrap(), "N6.1");
        assert_eq!(ids.last().unwrap(), "N6.40");
    }

    #[test]
    fn first_table_has_eighty_one_rows() {
        assert_eq!(list_entries(&Filter::provenance("Table 1")).len(), 81);
    }

    #[test]
    fn unknown_id() {
        assert!(matches!(load_entry("A9.9"), Err(Error::UnknownId(_))));
    }

    #[test]
    fn conditional_rows_have_branches() {
        assert_eq!(branches("A4.8").unwrap(), ["A4.8[a=-1]"]);
        assert_eq!(branches("A4.9").unwrap(), ["A4.9[a=0]"]);
        assert_eq!(branches("N6.35").unwrap(), ["N6.35[a=0]"]);
        assert!(branches("A3.1").unwrap().is_empty());
        let e = load_entry("A4.8[a=-1]").unwrap();
        assert_eq!(e.n_a, 2);
        assert_eq!(e.branch.unwrap().of, "A4.8");
        assert_eq!(load_entry("A4.8").unwrap().n_a, 0);
    }

    #[test]
    fn n31_is_a31() {
        let e = generate_n_n1(3).unwrap();
        assert_eq!(e.invariant_text, ["x1"]);
        assert!(generate_n_n1(2).is_err());
    }
}
