use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::{fs, thread};

use casimir_core::catalog::{check_entry, generate_n_n1, list_entries, load_entry, Filter};
use casimir_core::format::{latex_ratfunc, parse_algebra_file, parse_assumption, parse_invariant_expr};
use casimir_core::moving_frame::{eliminate, inner_automorphism_matrix, lift as lift_b};
use casimir_core::scalar::ScalarExpr;
use casimir_core::symmetrizer::symmetrize as sym;
use casimir_core::verifier::{finite_check, independence_rank, infinitesimal_check, CheckConfig};
use casimir_core::{Error, StructureConstants};
use thiserror::Error;

use crate::report::{CheckOut, InvariantOut, MatrixOut, Report};
use crate::{Format, Options};

const RANK_TRIALS: usize = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("cannot read `{path}`: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("`{0}` is neither a readable file nor a catalog id")]
    NotFound(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::UndecidableCaseSplit { .. } | Error::NotBlockTriangularizable { .. }) => 3,
            CliError::Core(
                Error::Parse { .. }
                | Error::Semantic { .. }
                | Error::UnknownSymbol(_)
                | Error::UnknownId(_)
                | Error::InvalidArgument(_)
                | Error::AssumptionInconsistent(_)
                | Error::IndexOutOfRange { .. },
            ) => 2,
            CliError::Core(_) => 1,
            CliError::Io { .. } | CliError::NotFound(_) | CliError::Usage(_) => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Rendered report and whether every check passed.
pub struct Output {
    pub text: String,
    pub ok: bool,
}

fn filiform_dim(spec: &str) -> Option<usize> {
    spec.strip_prefix('n')?.strip_suffix(".1")?.parse().ok()
}

/// An algebra file path, a catalog id such as `A4.6`, or `n<k>.1`.
fn load(spec: &str, opts: &Options) -> Result<StructureConstants> {
    let path = Path::new(spec);
    let mut sc = if path.is_file() {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: spec.to_string(), source })?;
        parse_algebra_file(&text)?
    } else if let Some(n) = filiform_dim(spec) {
        generate_n_n1(n)?.sc
    } else {
        match load_entry(spec) {
            Ok(e) => e.sc,
            Err(Error::UnknownId(_)) => return Err(CliError::NotFound(spec.to_string())),
            Err(e) => return Err(e.into()),
        }
    };
    for a in &opts.assume {
        let a = parse_assumption(a, sc.params())?;
        sc.add_assumption(a)?;
    }
    Ok(sc)
}

fn config(opts: &Options) -> CheckConfig {
    CheckConfig { samples: opts.samples, tol: opts.tol, seed: opts.seed, numeric_fallback: opts.numeric }
}

fn base_report(sc: &StructureConstants, opts: &Options) -> Result<Report> {
    let cert = sc.generic_rank(RANK_TRIALS, opts.seed)?;
    Ok(Report {
        algebra_id: sc.id().map(str::to_string),
        n: sc.dim(),
        rank: cert.rank,
        n_a: cert.n_a,
        invariants: Vec::new(),
        checks: Vec::new(),
        log: Vec::new(),
        matrices: Vec::new(),
    })
}

fn json(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn lines(ls: impl IntoIterator<Item = String>) -> String {
    ls.into_iter().map(|l| l + "\n").collect()
}

fn comments(ls: Vec<String>) -> Vec<String> {
    ls.into_iter().map(|l| format!("% {l}")).collect()
}

fn finish(report: &Report, format: Format, text: Vec<String>, latex: Vec<String>) -> Output {
    let text = match format {
        Format::Json => json(report),
        Format::Text => lines(text),
        Format::Latex => lines(latex),
    };
    Output { text, ok: report.passed() }
}

fn latex_matrix(rows: &[Vec<String>]) -> String {
    let body: Vec<String> = rows.iter().map(|r| r.join(" & ")).collect();
    format!("\\begin{{pmatrix}} {} \\end{{pmatrix}}", body.join(" \\\\ "))
}

fn add_checks(sc: &StructureConstants, fs: &[ScalarExpr], report: &mut Report, cfg: &CheckConfig) -> Result<()> {
    for (k, f) in fs.iter().enumerate() {
        report.checks.push(CheckOut::from_report(format!("F{} infinitesimal", k + 1), &infinitesimal_check(sc, f, cfg)?));
        report.checks.push(CheckOut::from_report(format!("F{} finite", k + 1), &finite_check(sc, f, cfg)?));
    }
    if !fs.is_empty() {
        let r = independence_rank(sc, fs, cfg.samples, cfg.seed)?;
        report.checks.push(CheckOut::simple(
            "independence",
            r == fs.len(),
            vec![format!("Jacobian rank {r} for {} function{}", fs.len(), if fs.len() == 1 { "" } else { "s" })],
        ));
    }
    Ok(())
}

pub fn check(spec: &str, opts: &Options) -> Result<Output> {
    let sc = load(spec, opts)?;
    let mut report = base_report(&sc, opts)?;
    let v = sc.validate()?;
    let detail = v
        .violations
        .iter()
        .map(|j| {
            let (a, b, c) = j.triple;
            let res: Vec<String> = j.residual.iter().map(|r| r.to_string()).collect();
            format!("e{}, e{}, e{}: residual ({})", a + 1, b + 1, c + 1, res.join(", "))
        })
        .collect();
    report.checks.push(CheckOut::simple("Jacobi identity", v.is_valid(), detail));
    let mut text = vec![report.header()];
    text.extend(report.check_lines());
    let latex = comments(text.clone());
    Ok(finish(&report, opts.format, text, latex))
}

pub fn rank(spec: &str, opts: &Options) -> Result<Output> {
    let sc = load(spec, opts)?;
    let cert = sc.generic_rank(RANK_TRIALS, opts.seed)?;
    let mut report = base_report(&sc, opts)?;
    let point: Vec<String> = cert.point.iter().map(|q| q.to_string()).collect();
    let mut witness = format!("attained at x = ({})", point.join(", "));
    for (p, v) in &cert.params {
        witness.push_str(&format!(", {p} = {v}"));
    }
    report.log.push(witness);
    let text = vec![format!("rank {}, N_A = {}", report.rank, report.n_a)];
    let latex = vec![format!("\\operatorname{{rank}} = {},\\quad N_A = {}", report.rank, report.n_a)];
    Ok(finish(&report, opts.format, text, latex))
}

pub fn ad(spec: &str, index: Option<usize>, opts: &Options) -> Result<Output> {
    let sc = load(spec, opts)?;
    let n = sc.dim();
    let indices: Vec<usize> = match index {
        Some(i) if (1..=n).contains(&i) => vec![i - 1],
        Some(i) => return Err(CliError::Usage(format!("index {i} out of range 1..={n}"))),
        None => (0..n).collect(),
    };
    let mut report = base_report(&sc, opts)?;
    let (mut text, mut latex) = (Vec::new(), Vec::new());
    for i in indices {
        let m = sc.ad_matrix(i)?;
        let rows: Vec<Vec<String>> =
            (0..m.rows()).map(|r| (0..m.cols()).map(|c| m.get(r, c).to_string()).collect()).collect();
        let tex: Vec<Vec<String>> =
            (0..m.rows()).map(|r| (0..m.cols()).map(|c| latex_ratfunc(m.get(r, c))).collect()).collect();
        text.push(format!("ad e{} =", i + 1));
        text.extend(m.to_string().lines().map(str::to_string));
        latex.push(format!("\\widehat{{\\mathrm{{ad}}}}_{{e_{{{}}}}} = {}", i + 1, latex_matrix(&tex)));
        report.matrices.push(MatrixOut { label: format!("ad e{}", i + 1), rows });
    }
    Ok(finish(&report, opts.format, text, latex))
}

fn generator_log(generators: &[usize]) -> Vec<String> {
    generators.iter().enumerate().map(|(t, g)| format!("t{} multiplies ad e{}", t + 1, g + 1)).collect()
}

pub fn aut_b(spec: &str, opts: &Options) -> Result<Output> {
    let sc = load(spec, opts)?;
    let b = inner_automorphism_matrix(&sc)?;
    let mut report = base_report(&sc, opts)?;
    report.log = generator_log(&b.generators);
    let m = &b.matrix;
    let rows: Vec<Vec<String>> =
        (0..m.rows()).map(|r| (0..m.cols()).map(|c| m.get(r, c).to_string()).collect()).collect();
    let tex: Vec<Vec<String>> = (0..m.rows()).map(|r| (0..m.cols()).map(|c| m.get(r, c).to_latex()).collect()).collect();
    report.matrices.push(MatrixOut { label: "B".into(), rows });
    let mut text = report.log.clone();
    text.push("B =".into());
    text.extend(m.to_string().lines().map(str::to_string));
    let mut latex = comments(report.log.clone());
    latex.push(format!("B(\\theta) = {}", latex_matrix(&tex)));
    Ok(finish(&report, opts.format, text, latex))
}

pub fn lift(spec: &str, opts: &Options) -> Result<Output> {
    let sc = load(spec, opts)?;
    let li = lift_b(&inner_automorphism_matrix(&sc)?);
    let mut report = base_report(&sc, opts)?;
    report.log = generator_log(&li.generators);
    let mut text = report.log.clone();
    let mut latex = comments(report.log.clone());
    for (k, c) in li.components.iter().enumerate() {
        text.push(format!("I{} = {c}", k + 1));
        latex.push(format!("\\mathcal{{I}}_{{{}}} = {}", k + 1, c.to_latex()));
    }
    report.matrices.push(MatrixOut { label: "I".into(), rows: li.components.iter().map(|c| vec![c.to_string()]).collect() });
    Ok(finish(&report, opts.format, text, latex))
}

/// Runs the elimination, recording a failed check when some group parameter
/// was left in the result.
fn eliminated(sc: &StructureConstants, report: &mut Report, opts: &Options) -> Result<Vec<ScalarExpr>> {
    let r = eliminate(sc, opts.seed)?;
    report.log.extend(r.log.iter().cloned());
    if !r.is_complete() {
        let left: Vec<String> = r.unsolved.iter().map(|t| format!("t{}", t + 1)).collect();
        report.checks.push(CheckOut::simple(
            "elimination",
            false,
            vec![format!("no solving pattern for {}", left.join(", "))],
        ));
    }
    Ok(r.invariants)
}

fn invariant_lines(report: &Report) -> (Vec<String>, Vec<String>) {
    let mut text = vec![report.header()];
    let mut latex = comments(vec![report.header()]);
    for inv in &report.invariants {
        text.push(format!("{} = {}", inv.label, inv.text));
        latex.push(format!("{}_{{{}}} = {}", &inv.label[..1], &inv.label[1..], inv.latex));
    }
    let checks = report.check_lines();
    text.extend(checks.iter().cloned());
    latex.extend(comments(checks));
    (text, latex)
}

pub fn invariants(spec: &str, opts: &Options) -> Result<Output> {
    let sc = load(spec, opts)?;
    let mut report = base_report(&sc, opts)?;
    let fs = eliminated(&sc, &mut report, opts)?;
    report.invariants = fs.iter().enumerate().map(|(k, f)| InvariantOut::new(k + 1, f)).collect();
    add_checks(&sc, &fs, &mut report, &config(opts))?;
    let (text, latex) = invariant_lines(&report);
    Ok(finish(&report, opts.format, text, latex))
}

fn parse_all(sc: &StructureConstants, texts: &[String]) -> Result<Vec<ScalarExpr>> {
    Ok(texts.iter().map(|t| parse_invariant_expr(t, sc.dim(), sc.params())).collect::<casimir_core::Result<_>>()?)
}

pub fn symmetrize(spec: &str, given: &[String], opts: &Options) -> Result<Output> {
    let sc = load(spec, opts)?;
    let mut report = base_report(&sc, opts)?;
    let fs = if given.is_empty() { eliminated(&sc, &mut report, opts)? } else { parse_all(&sc, given)? };
    let (mut text, mut latex) = (vec![report.header()], comments(vec![report.header()]));
    for (k, f) in fs.iter().enumerate() {
        let s = sym(f);
        let note = if s.formal { " (formal)" } else { "" };
        text.push(format!("C{} = {s}{note}", k + 1));
        latex.push(format!("C_{{{}}} = {}", k + 1, s.to_latex()));
        report.invariants.push(InvariantOut::new(k + 1, f).with_symmetrized(&s));
    }
    let checks = report.check_lines();
    text.extend(checks.iter().cloned());
    latex.extend(comments(checks));
    Ok(finish(&report, opts.format, text, latex))
}

pub fn verify(spec: &str, given: &[String], opts: &Options) -> Result<Output> {
    let sc = load(spec, opts)?;
    let mut report = base_report(&sc, opts)?;
    let fs = parse_all(&sc, given)?;
    report.invariants = fs.iter().enumerate().map(|(k, f)| InvariantOut::new(k + 1, f)).collect();
    add_checks(&sc, &fs, &mut report, &config(opts))?;
    report.log.push(format!("{} functions supplied for N_A = {}", fs.len(), report.n_a));
    let (text, latex) = invariant_lines(&report);
    Ok(finish(&report, opts.format, text, latex))
}

fn entry_report(id: &str, cfg: &CheckConfig) -> Report {
    let mut report =
        Report { algebra_id: Some(id.to_string()), n: 0, rank: 0, n_a: 0, invariants: vec![], checks: vec![], log: vec![], matrices: vec![] };
    let checked = load_entry(id).and_then(|e| check_entry(&e, cfg).map(|c| (e, c)));
    let (e, c) = match checked {
        Ok(ec) => ec,
        Err(err) => {
            report.checks.push(CheckOut::simple("load", false, vec![err.to_string()]));
            return report;
        }
    };
    report.n = c.dim;
    report.rank = c.rank;
    report.n_a = c.n_a;
    report.invariants = e.invariants.iter().enumerate().map(|(k, f)| InvariantOut::new(k + 1, f)).collect();
    report.checks.push(CheckOut::simple("Jacobi identity", c.jacobi, vec![]));
    report.checks.push(CheckOut::simple(
        "rank",
        c.rank_matches(),
        vec![format!("generic rank {} with N_A = {} recorded", c.rank, c.n_a)],
    ));
    for (k, ic) in c.invariants.iter().enumerate() {
        report.checks.push(CheckOut::from_report(format!("F{} infinitesimal", k + 1), &ic.infinitesimal));
        report.checks.push(CheckOut::from_report(format!("F{} finite", k + 1), &ic.finite));
    }
    report.checks.push(CheckOut::simple(
        "independence",
        c.independence == c.n_a,
        vec![format!("Jacobian rank {} for N_A = {}", c.independence, c.n_a)],
    ));
    if let Some(err) = &e.erratum {
        report.log.push(format!("corrected row: {}", err.note));
    }
    report.log.push(format!("source: {}", e.provenance));
    report
}

/// Checks catalog entries on `jobs` threads; reports stay in catalog order.
pub fn corpus(ids: &[String], dim: Option<usize>, jobs: Option<usize>, opts: &Options) -> Result<Output> {
    let ids: Vec<String> = if ids.is_empty() {
        list_entries(&Filter { dim, ..Filter::all().with_branches() })
    } else {
        ids.to_vec()
    };
    // Entries without a closed-form B(θ) are part of the catalog, so the
    // numeric action is always allowed here.
    let cfg = CheckConfig { numeric_fallback: true, ..config(opts) };
    let jobs = jobs.unwrap_or_else(|| thread::available_parallelism().map_or(1, |n| n.get())).max(1);
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Report>>> = ids.iter().map(|_| Mutex::new(None)).collect();
    thread::scope(|s| {
        for _ in 0..jobs.min(ids.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(id) = ids.get(i) else { break };
                let r = entry_report(id, &cfg);
                *slots[i].lock().expect("slot lock") = Some(r);
            });
        }
    });
    let reports: Vec<Report> =
        slots.into_iter().map(|m| m.into_inner().expect("slot lock").expect("every entry ran")).collect();
    let passed = reports.iter().filter(|r| r.passed()).count();
    let ok = passed == reports.len();
    if opts.format == Format::Json {
        return Ok(Output { text: json(&reports), ok });
    }
    let mut out = Vec::new();
    for r in &reports {
        let id = r.algebra_id.as_deref().unwrap_or("?");
        match r.checks.iter().find(|c| !c.passed()) {
            None => out.push(format!("{id}: pass")),
            Some(c) => {
                let why = c.detail.first().map(|d| format!(" ({d})")).unwrap_or_default();
                out.push(format!("{id}: FAIL {}{why}", c.line()));
            }
        }
    }
    out.push(format!("{passed} of {} entries pass", reports.len()));
    let out = if opts.format == Format::Latex { comments(out) } else { out };
    Ok(Output { text: lines(out), ok })
}
