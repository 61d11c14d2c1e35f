use casimir_core::format::{to_basis_text, to_latex_basis, to_prefix};
use casimir_core::scalar::ScalarExpr;
use casimir_core::symmetrizer::SymmetrizedInvariant;
use casimir_core::verifier::CheckReport;
use serde::Serialize;

/// Detail lines per check in text output; JSON carries all of them.
const SHOWN_WITNESSES: usize = 3;

/// Machine-readable result of one command on one algebra.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub algebra_id: Option<String>,
    pub n: usize,
    pub rank: usize,
    pub n_a: usize,
    pub invariants: Vec<InvariantOut>,
    pub checks: Vec<CheckOut>,
    pub log: Vec<String>,
    /// Only for `ad`, `autB` and `lift`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub matrices: Vec<MatrixOut>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantOut {
    pub label: String,
    /// Infix over `x1..xn`.
    pub text: String,
    /// Infix over `e1..en`, the style of invariant tables.
    pub basis: String,
    pub latex: String,
    pub prefix: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symmetrized: Option<SymmetrizedOut>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetrizedOut {
    pub text: String,
    pub latex: String,
    /// The ordering sits inside a transcendental function or a fractional
    /// power.
    pub formal: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOut {
    pub name: String,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain_failures: Option<usize>,
    pub detail: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MatrixOut {
    pub label: String,
    pub rows: Vec<Vec<String>>,
}

impl InvariantOut {
    pub fn new(k: usize, f: &ScalarExpr) -> InvariantOut {
        InvariantOut {
            label: format!("F{k}"),
            text: f.to_string(),
            basis: to_basis_text(f),
            latex: to_latex_basis(f),
            prefix: to_prefix(f),
            symmetrized: None,
        }
    }

    pub fn with_symmetrized(mut self, s: &SymmetrizedInvariant) -> InvariantOut {
        self.symmetrized = Some(SymmetrizedOut { text: s.to_string(), latex: s.to_latex(), formal: s.formal });
        self
    }
}

impl CheckOut {
    pub fn from_report(name: impl Into<String>, r: &CheckReport) -> CheckOut {
        CheckOut {
            name: name.into(),
            verdict: r.verdict.to_string(),
            max_residual: Some(r.max_residual),
            samples: Some(r.samples),
            domain_failures: Some(r.domain_failures),
            detail: r.witnesses.iter().map(|w| w.to_string()).collect(),
        }
    }

    pub fn simple(name: impl Into<String>, passed: bool, detail: Vec<String>) -> CheckOut {
        CheckOut {
            name: name.into(),
            verdict: if passed { "pass" } else { "fail" }.into(),
            max_residual: None,
            samples: None,
            domain_failures: None,
            detail,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict != "fail"
    }

    pub fn line(&self) -> String {
        let mut s = format!("{}: {}", self.name, self.verdict);
        if let (Some(res), Some(n)) = (self.max_residual, self.samples) {
            s.push_str(&format!(" (max residual {res:.3e}, {n} samples"));
            if let Some(d) = self.domain_failures.filter(|&d| d > 0) {
                s.push_str(&format!(", {d} outside domain"));
            }
            s.push(')');
        }
        s
    }
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckOut::passed)
    }

    pub fn header(&self) -> String {
        let id = self.algebra_id.as_deref().unwrap_or("algebra");
        format!("{id}: dim {}, rank {}, N_A = {}", self.n, self.rank, self.n_a)
    }

    pub fn check_lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        for c in &self.checks {
            out.push(c.line());
            out.extend(c.detail.iter().take(SHOWN_WITNESSES).map(|d| format!("  {d}")));
            if c.detail.len() > SHOWN_WITNESSES {
                out.push(format!("  and {} more", c.detail.len() - SHOWN_WITNESSES));
            }
        }
        out
    }
}
