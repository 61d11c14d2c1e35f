//! Sampling-based certification of invariants.
//!
//! Every check draws exact grid points (`2p/97`, so coordinates lie in
//! `[-2, 2]`), evaluates in `f64` and compares against an explicit tolerance.
//! Points where an expression leaves its real domain, or where a divisor is
//! smaller than `1e-3` in magnitude, are redrawn.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::algebra::{ParamMatrix, StructureConstants};
use crate::error::{Error, Result};
use crate::mat_exp::ClosedFormMatrix;
use crate::moving_frame::{inner_automorphism_matrix, inner_automorphism_numeric};
use crate::poly::Sym;
use crate::sampling::Sampler;
use crate::scalar::ScalarExpr;

/// Redraws allowed per sample before it counts as a domain failure.
pub const MAX_RESAMPLES: usize = 50;
/// Divisors below this magnitude make a point ineligible.
pub const MIN_DENOMINATOR: f64 = 1e-3;
/// Singular values below `RANK_THRESHOLD * σ_max` count as zero.
pub const RANK_THRESHOLD: f64 = 1e-8;
const PATH_STEPS: usize = 16;

#[derive(Debug, Clone, Copy)]
pub struct CheckConfig {
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
    /// Let [`finite_check`] exponentiate numerically when `B(θ)` has no
    /// closed form; when unset that case is returned as an error.
    pub numeric_fallback: bool,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { samples: 20, tol: 1e-9, seed: 0, numeric_fallback: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// Every evaluated sample passed, but some could not be placed in the
    /// expression's domain.
    DomainLimited,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::DomainLimited => "domain-limited",
        })
    }
}

/// A sample at which a check failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub point: Vec<f64>,
    pub params: Vec<(String, f64)>,
    /// Basis element whose vector field was applied (infinitesimal check).
    pub generator: Option<usize>,
    /// Group parameters (finite check).
    pub theta: Option<Vec<f64>>,
    pub residual: f64,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pt: Vec<String> = self.point.iter().map(|v| format!("{v:.6}")).collect();
        write!(f, "x = ({})", pt.join(", "))?;
        if !self.params.is_empty() {
            let ps: Vec<String> = self.params.iter().map(|(n, v)| format!("{n} = {v:.6}")).collect();
            write!(f, ", {}", ps.join(", "))?;
        }
        if let Some(i) = self.generator {
            write!(f, ", generator e{}", i + 1)?;
        }
        if let Some(t) = &self.theta {
            let ts: Vec<String> = t.iter().map(|v| format!("{v:.6}")).collect();
            write!(f, ", theta = ({})", ts.join(", "))?;
        }
        write!(f, ", residual {:.3e}", self.residual)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub verdict: Verdict,
    pub max_residual: f64,
    /// Samples actually evaluated.
    pub samples: usize,
    /// Samples abandoned after exhausting redraws.
    pub domain_failures: usize,
    pub witnesses: Vec<Witness>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }

    fn finish(max_residual: f64, samples: usize, domain_failures: usize, witnesses: Vec<Witness>) -> Result<Self> {
        let attempted = samples + domain_failures;
        if attempted > 0 && domain_failures * 10 > attempted * 9 {
            return Err(Error::TooManyDomainFailures { failed: domain_failures, attempted });
        }
        let verdict = if !witnesses.is_empty() {
            Verdict::Fail
        } else if domain_failures > 0 {
            Verdict::DomainLimited
        } else {
            Verdict::Pass
        };
        Ok(CheckReport { verdict, max_residual, samples, domain_failures, witnesses })
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (max residual {:.3e}, {} samples", self.verdict, self.max_residual, self.samples)?;
        if self.domain_failures > 0 {
            write!(f, ", {} outside domain", self.domain_failures)?;
        }
        write!(f, ")")
    }
}

/// One sampled point: coordinates plus parameter values.
struct Point {
    x: Vec<f64>,
    params: BTreeMap<Sym, f64>,
}

impl Point {
    fn env(&self) -> impl Fn(Sym) -> Option<f64> + '_ {
        move |s| match s.coordinate_index() {
            Some(j) => self.x.get(j - 1).copied(),
            None => self.params.get(&s).copied(),
        }
    }

    fn with_x(&self, x: Vec<f64>) -> Point {
        Point { x, params: self.params.clone() }
    }

    fn witness(&self, generator: Option<usize>, theta: Option<Vec<f64>>, residual: f64) -> Witness {
        Witness {
            point: self.x.clone(),
            params: self.params.iter().map(|(s, v)| (s.name().to_string(), *v)).collect(),
            generator,
            theta,
            residual,
        }
    }
}

fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

fn draw_point(sc: &StructureConstants, sampler: &mut Sampler) -> Result<Point> {
    let exact = sc.assumption_set().sample(sc.params(), sampler)?;
    let params = exact.iter().map(|(s, v)| (*s, to_f64(v))).collect();
    let x = (0..sc.dim()).map(|_| to_f64(&sampler.grid_value())).collect();
    Ok(Point { x, params })
}

fn check_arity(sc: &StructureConstants, fs: &[&ScalarExpr]) -> Result<()> {
    for f in fs {
        let m = f.max_coordinate();
        if m > sc.dim() {
            return Err(Error::IndexOutOfRange { index: m, n: sc.dim() });
        }
        if let Some(s) = f.params().into_iter().find(|p| !sc.params().contains(p)) {
            return Err(Error::UnknownSymbol(s.name().to_string()));
        }
        if let Some(s) = f.free_vars().into_iter().find(|s| s.coordinate_index().is_none()) {
            return Err(Error::UnknownSymbol(s.name().to_string()));
        }
    }
    Ok(())
}

/// Arity check, then pinned parameters substituted into both the algebra and
/// the functions.
fn prepare(sc: &StructureConstants, fs: &[&ScalarExpr]) -> Result<(StructureConstants, Vec<ScalarExpr>)> {
    check_arity(sc, fs)?;
    let set = sc.assumption_set();
    let fs = fs.iter().map(|f| if set.pinned().is_empty() { (*f).clone() } else { f.bind_params(set.pinned()) }).collect();
    Ok((sc.specialize(), fs))
}

fn ad_matrices(sc: &StructureConstants) -> Result<Vec<ParamMatrix>> {
    (0..sc.dim()).map(|i| sc.ad_matrix(i)).collect()
}

/// Checks `Σ_{j,k} c_ij^k x_k ∂F/∂x_j = 0` for every basis element `e_i`.
/// Each residual is divided by the sum of the absolute values of its terms.
pub fn infinitesimal_check(sc: &StructureConstants, f: &ScalarExpr, cfg: &CheckConfig) -> Result<CheckReport> {
    let (sc, fs) = prepare(sc, &[f])?;
    let f = &fs[0];
    let n = sc.dim();
    let grads: Vec<ScalarExpr> = (1..=n).map(|j| f.diff(Sym::x(j))).collect();
    let ads = ad_matrices(&sc)?;
    let mut sampler = Sampler::new(cfg.seed);
    let (mut max_res, mut done, mut failed) = (0.0f64, 0, 0);
    let mut witnesses = Vec::new();
    for _ in 0..cfg.samples {
        let mut evaluated = None;
        for _ in 0..MAX_RESAMPLES {
            let p = draw_point(&sc, &mut sampler)?;
            let values = {
                let env = p.env();
                if f.eval_with(&env, MIN_DENOMINATOR, &mut None).is_err() {
                    continue;
                }
                let g: std::result::Result<Vec<f64>, _> =
                    grads.iter().map(|d| d.eval_with(&env, MIN_DENOMINATOR, &mut None)).collect();
                let mats: Option<Vec<Vec<Vec<f64>>>> = ads.iter().map(|m| m.eval_f64(&env)).collect();
                g.ok().zip(mats)
            };
            let Some((g, mats)) = values else { continue };
            evaluated = Some((p, g, mats));
            break;
        }
        let Some((p, g, mats)) = evaluated else {
            failed += 1;
            continue;
        };
        done += 1;
        for (i, m) in mats.iter().enumerate() {
            // m[k][j] = c_ij^k
            let (mut sum, mut scale) = (0.0, 0.0);
            for (k, row) in m.iter().enumerate() {
                for (j, &c) in row.iter().enumerate() {
                    if c != 0.0 {
                        let t = c * p.x[k] * g[j];
                        sum += t;
                        scale += t.abs();
                    }
                }
            }
            let res = if scale > 0.0 { sum.abs() / scale } else { 0.0 };
            max_res = max_res.max(res);
            if res >= cfg.tol {
                witnesses.push(p.witness(Some(i), None, res));
            }
        }
    }
    CheckReport::finish(max_res, done, failed, witnesses)
}

/// The coadjoint action used by [`finite_check`]: closed-form `B(θ)` when
/// available, otherwise numeric exponentials of the same factors.
enum Action {
    Closed(ClosedFormMatrix),
    Numeric(Vec<usize>),
}

impl Action {
    fn new(sc: &StructureConstants, fallback: bool) -> Result<(Action, usize)> {
        match inner_automorphism_matrix(sc) {
            Ok(b) => {
                let r = b.generators.len();
                Ok((Action::Closed(b.matrix), r))
            }
            Err(Error::NotBlockTriangularizable { .. }) | Err(Error::UndecidableCaseSplit { .. }) if fallback => {
                let g = sc.noncentral_generators()?;
                let r = g.len();
                Ok((Action::Numeric(g), r))
            }
            Err(e) => Err(e),
        }
    }

    fn matrix(&self, sc: &StructureConstants, theta: &[f64], env: &dyn Fn(Sym) -> Option<f64>) -> Option<Vec<Vec<f64>>> {
        match self {
            Action::Closed(b) => b.eval_f64(theta, env),
            Action::Numeric(g) => inner_automorphism_numeric(sc, g, env, theta).ok(),
        }
    }
}

fn act(x: &[f64], b: &[Vec<f64>]) -> Vec<f64> {
    (0..x.len()).map(|k| x.iter().enumerate().map(|(j, xj)| xj * b[j][k]).sum()).collect()
}

/// Evaluates `F` along `x·B(sθ)`, `s ∈ [0, 1]`, and returns `F(x·B(θ))` when
/// no divisor changes sign on the way (no branch of arctan or a pole is
/// crossed).
fn transported_value(
    sc: &StructureConstants,
    action: &Action,
    f: &ScalarExpr,
    p: &Point,
    theta: &[f64],
) -> Option<f64> {
    let env0 = p.env();
    let mut trace0 = Vec::new();
    f.eval_with(&env0, MIN_DENOMINATOR, &mut Some(&mut trace0)).ok()?;
    let mut last = None;
    for step in 1..=PATH_STEPS {
        let s = step as f64 / PATH_STEPS as f64;
        let th: Vec<f64> = theta.iter().map(|t| t * s).collect();
        let b = action.matrix(sc, &th, &env0)?;
        let q = p.with_x(act(&p.x, &b));
        let mut trace = Vec::new();
        let v = f.eval_with(&q.env(), MIN_DENOMINATOR, &mut Some(&mut trace)).ok()?;
        if trace != trace0 {
            return None;
        }
        last = Some(v);
    }
    last
}

/// Checks `F(x·B(θ)) = F(x)` at random `(x, θ, params)`, `θ ∈ [-1/2, 1/2]^r`.
pub fn finite_check(sc: &StructureConstants, f: &ScalarExpr, cfg: &CheckConfig) -> Result<CheckReport> {
    let (sc, fs) = prepare(sc, &[f])?;
    let f = &fs[0];
    let (action, r) = Action::new(&sc, cfg.numeric_fallback)?;
    let mut sampler = Sampler::new(cfg.seed);
    let (mut max_res, mut done, mut failed) = (0.0f64, 0, 0);
    let mut witnesses = Vec::new();
    for _ in 0..cfg.samples {
        let mut evaluated = None;
        for _ in 0..MAX_RESAMPLES {
            let p = draw_point(&sc, &mut sampler)?;
            let theta: Vec<f64> = (0..r).map(|_| sampler.uniform(-0.5, 0.5)).collect();
            let Ok(v0) = f.eval_with(&p.env(), MIN_DENOMINATOR, &mut None) else { continue };
            let Some(v1) = transported_value(&sc, &action, f, &p, &theta) else { continue };
            evaluated = Some((p, theta, v0, v1));
            break;
        }
        let Some((p, theta, v0, v1)) = evaluated else {
            failed += 1;
            continue;
        };
        done += 1;
        let scale = v0.abs().max(v1.abs());
        let res = if scale > 1e-12 { (v1 - v0).abs() / scale } else { (v1 - v0).abs() };
        max_res = max_res.max(res);
        if res >= cfg.tol {
            witnesses.push(p.witness(None, Some(theta), res));
        }
    }
    CheckReport::finish(max_res, done, failed, witnesses)
}

/// Singular values of the Jacobian `[∂F^l/∂x_j]` at one point, rows scaled
/// to unit length.
fn jacobian_singular_values(grads: &[Vec<ScalarExpr>], p: &Point) -> Option<Vec<f64>> {
    let env = p.env();
    let n = p.x.len();
    let mut rows = Vec::with_capacity(grads.len());
    for g in grads {
        let row: Vec<f64> = g.iter().map(|d| d.eval_with(&env, MIN_DENOMINATOR, &mut None).ok()).collect::<Option<_>>()?;
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        rows.push(if norm > 0.0 { row.iter().map(|v| v / norm).collect() } else { row });
    }
    if rows.is_empty() {
        return Some(Vec::new());
    }
    let m = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
    let mut sv: Vec<f64> = m.svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Some(sv)
}

fn numeric_rank(sv: &[f64], threshold: f64) -> usize {
    match sv.first() {
        Some(&top) if top > 0.0 => sv.iter().filter(|&&s| s > threshold * top).count(),
        _ => 0,
    }
}

fn gradients(fs: &[ScalarExpr], n: usize) -> Vec<Vec<ScalarExpr>> {
    fs.iter().map(|f| (1..=n).map(|j| f.diff(Sym::x(j))).collect()).collect()
}

/// Draws a point where every function and gradient can be evaluated.
fn draw_jacobian_point(
    sc: &StructureConstants,
    fs: &[ScalarExpr],
    grads: &[Vec<ScalarExpr>],
    sampler: &mut Sampler,
) -> Result<Option<(Point, Vec<f64>)>> {
    for _ in 0..MAX_RESAMPLES {
        let p = draw_point(sc, sampler)?;
        if fs.iter().any(|f| f.eval_with(&p.env(), MIN_DENOMINATOR, &mut None).is_err()) {
            continue;
        }
        if let Some(sv) = jacobian_singular_values(grads, &p) {
            return Ok(Some((p, sv)));
        }
    }
    Ok(None)
}

/// Largest numeric rank of the Jacobian of `fs` over the samples.
pub fn independence_rank(sc: &StructureConstants, fs: &[ScalarExpr], samples: usize, seed: u64) -> Result<usize> {
    if fs.is_empty() {
        return Ok(0);
    }
    let (sc, fs) = prepare(sc, &fs.iter().collect::<Vec<_>>())?;
    let fs = &fs[..];
    let grads = gradients(fs, sc.dim());
    let mut sampler = Sampler::new(seed);
    let (mut best, mut done, mut failed) = (0, 0, 0);
    for _ in 0..samples.max(1) {
        match draw_jacobian_point(&sc, fs, &grads, &mut sampler)? {
            Some((_, sv)) => {
                done += 1;
                best = best.max(numeric_rank(&sv, RANK_THRESHOLD));
            }
            None => failed += 1,
        }
    }
    if done == 0 || failed * 10 > (done + failed) * 9 {
        return Err(Error::TooManyDomainFailures { failed, attempted: done + failed });
    }
    Ok(best)
}

/// Passes when each set is functionally generated by the other: the Jacobians
/// of `fs`, `gs` and `fs ∪ gs` have the same generic rank. Samples where `fs`
/// or `gs` falls below its generic rank are skipped. The residual is the first
/// singular value of the union beyond that rank, relative to the largest.
pub fn equivalence_check(
    sc: &StructureConstants,
    fs: &[ScalarExpr],
    gs: &[ScalarExpr],
    cfg: &CheckConfig,
) -> Result<CheckReport> {
    let (sc, union) = prepare(sc, &fs.iter().chain(gs).collect::<Vec<_>>())?;
    let (fs, gs) = union.split_at(fs.len());
    let n = sc.dim();
    let (gf, gg, gu) = (gradients(fs, n), gradients(gs, n), gradients(&union, n));
    // Sample first, then compare at points where both sets reach their
    // generic rank; a basis may drop rank on a special parameter value.
    let mut sampler = Sampler::new(cfg.seed);
    let mut failed = 0;
    let mut pts = Vec::new();
    for _ in 0..cfg.samples * 3 {
        if pts.len() == cfg.samples {
            break;
        }
        let Some((p, su)) = draw_jacobian_point(&sc, &union, &gu, &mut sampler)? else {
            failed += 1;
            continue;
        };
        let (Some(sf), Some(sg)) = (jacobian_singular_values(&gf, &p), jacobian_singular_values(&gg, &p)) else {
            failed += 1;
            continue;
        };
        pts.push((p, su, numeric_rank(&sf, RANK_THRESHOLD), numeric_rank(&sg, RANK_THRESHOLD)));
    }
    let rf = pts.iter().map(|t| t.2).max().unwrap_or(0);
    let rg = pts.iter().map(|t| t.3).max().unwrap_or(0);
    let (mut max_res, mut done) = (0.0f64, 0);
    let mut witnesses = Vec::new();
    for (p, su, pf, pg) in pts {
        if rf == rg && (pf < rf || pg < rg) {
            continue;
        }
        done += 1;
        let top = su.first().copied().unwrap_or(0.0);
        let extra = su.get(rf.max(rg)).copied().unwrap_or(0.0);
        let mut res = if top > 0.0 { extra / top } else { 0.0 };
        if rf != rg {
            res = res.max(1.0);
        }
        max_res = max_res.max(res);
        if res >= cfg.tol {
            witnesses.push(p.witness(None, None, res));
        }
    }
    CheckReport::finish(max_res, done, failed, witnesses)
}

/// Basis coordinates that fail the infinitesimal check, each with its report.
/// Every algebra with fewer invariants than its dimension has at least one.
pub fn non_invariant_coordinates(sc: &StructureConstants, cfg: &CheckConfig) -> Result<Vec<(usize, CheckReport)>> {
    let mut out = Vec::new();
    for j in 1..=sc.dim() {
        let rep = infinitesimal_check(sc, &ScalarExpr::x(j), cfg)?;
        if rep.verdict == Verdict::Fail {
            out.push((j, rep));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::{parse_algebra_file, parse_invariant_expr};

    fn heisenberg() -> StructureConstants {
        parse_algebra_file("algebra A3.1\ndim 3\n[2,3] = e1\n").unwrap()
    }

    fn a46() -> StructureConstants {
        parse_algebra_file("algebra A4.6\ndim 4\nparams a b\nassume a > 0\n[1,4] = a*e1\n[2,4] = b*e2 - e3\n[3,4] = e2 + b*e3\n")
            .unwrap()
    }

    #[test]
    fn center_passes_and_coordinate_fails() {
        let sc = heisenberg();
        let cfg = CheckConfig::default();
        assert_eq!(infinitesimal_check(&sc, &ScalarExpr::x(1), &cfg).unwrap().verdict, Verdict::Pass);
        let rep = infinitesimal_check(&sc, &ScalarExpr::x(2), &cfg).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
        assert!(rep.witnesses.iter().any(|w| w.generator == Some(2)));
    }

    #[test]
    fn rotation_invariant_passes_both_checks() {
        let sc = a46();
        let f = parse_invariant_expr("(x2^2+x3^2)*exp(-2*b*arctan(x3/x2))", 4, sc.params()).unwrap();
        let cfg = CheckConfig::default();
        assert_eq!(infinitesimal_check(&sc, &f, &cfg).unwrap().verdict, Verdict::Pass);
        let fin = finite_check(&sc, &f, &cfg).unwrap();
        assert_eq!(fin.verdict, Verdict::Pass, "{fin:?}");
    }

    #[test]
    fn printed_power_ratio_is_not_invariant() {
        let sc = a46();
        let bad = parse_invariant_expr("x1^b/(x2^2+x3^2)^a", 4, sc.params()).unwrap();
        let good = parse_invariant_expr("(x2^2+x3^2)^a/x1^(2*b)", 4, sc.params()).unwrap();
        let cfg = CheckConfig::default();
        assert_eq!(infinitesimal_check(&sc, &bad, &cfg).unwrap().verdict, Verdict::Fail);
        assert_eq!(infinitesimal_check(&sc, &good, &cfg).unwrap().verdict, Verdict::Pass);
    }

    #[test]
    fn constant_is_invariant() {
        let sc = a46();
        let rep = finite_check(&sc, &ScalarExpr::one(), &CheckConfig::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
    }

    #[test]
    fn ranks_and_equivalence() {
        let sc = heisenberg();
        let x1 = ScalarExpr::x(1);
        let cube = x1.powi(3);
        assert_eq!(independence_rank(&sc, &[x1.clone(), x1.clone()], 5, 0).unwrap(), 1);
        let cfg = CheckConfig { tol: 1e-8, ..CheckConfig::default() };
        assert!(equivalence_check(&sc, &[x1.clone()], &[cube], &cfg).unwrap().passed());
        let rep = equivalence_check(&sc, &[x1.clone()], &[x1, ScalarExpr::x(2)], &cfg).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
    }

    #[test]
    fn thin_domain_is_reported() {
        let sc = heisenberg();
        let f = parse_invariant_expr("ln(x1 - 3)", 3, &[]).unwrap();
        assert!(matches!(infinitesimal_check(&sc, &f, &CheckConfig::default()), Err(Error::TooManyDomainFailures { .. })));
    }
}
