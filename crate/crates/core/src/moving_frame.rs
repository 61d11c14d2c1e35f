//! Group-parameter elimination: build the generic inner automorphism `B(θ)`,
//! lift the coordinates to `x·B(θ)`, normalize a maximal independent set of
//! lifted components to constants and solve for θ.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;

use crate::algebra::{AssumptionSet, StructureConstants};
use crate::closed_form::{ClosedFormExpr, TermKey, Trig};
use crate::error::{Error, Result};
use crate::linalg;
use crate::mat_exp::{exp_numeric, exp_theta_var, identity_f64, matmul_f64, ClosedFormMatrix};
use crate::poly::{Poly, RatFunc, Sym};
use crate::sampling::Sampler;
use crate::scalar::{theta_sym, ScalarExpr};

/// `B(θ) = Π_t exp(-θ_t âd_{e_{g_t}})` over the chosen generators `g_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerAutomorphism {
    /// 0-based basis indices paired with θ_1, θ_2, ...
    pub generators: Vec<usize>,
    pub matrix: ClosedFormMatrix,
}

pub fn inner_automorphism_matrix(sc: &StructureConstants) -> Result<InnerAutomorphism> {
    let sc = sc.specialize();
    let set = sc.assumption_set();
    let generators = sc.noncentral_generators()?;
    let r = generators.len();
    let mut b = ClosedFormMatrix::identity(sc.dim(), r);
    for (t, &g) in generators.iter().enumerate() {
        let factor = exp_theta_var(&sc.ad_matrix(g)?.neg(), &set, r, t)?;
        b = b.mul(&factor)?;
    }
    Ok(InnerAutomorphism { generators, matrix: b })
}

/// Numeric `B(θ)` from the same product of factors, each exponentiated by
/// scaling and squaring. Used when no closed form exists.
pub fn inner_automorphism_numeric(
    sc: &StructureConstants,
    generators: &[usize],
    env: &dyn Fn(Sym) -> Option<f64>,
    theta: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let mut b = identity_f64(sc.dim());
    for (&g, &t) in generators.iter().zip(theta) {
        let m = sc
            .ad_matrix(g)?
            .neg()
            .eval_f64(env)
            .ok_or_else(|| Error::InvalidArgument("unbound parameter in adjoint matrix".into()))?;
        b = matmul_f64(&b, &exp_numeric(&m, t));
    }
    Ok(b)
}

/// Components `I_k = Σ_j x_j B_jk` of the fundamental lifted invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedInvariant {
    pub generators: Vec<usize>,
    pub components: Vec<ClosedFormExpr>,
}

impl LiftedInvariant {
    pub fn nvars(&self) -> usize {
        self.generators.len()
    }
}

pub fn lift(b: &InnerAutomorphism) -> LiftedInvariant {
    let m = &b.matrix;
    let n = m.rows();
    let components = (0..n)
        .map(|k| {
            (0..n).fold(ClosedFormExpr::zero(m.nvars()), |acc, j| {
                acc.add(&m.get(j, k).scale(&RatFunc::var(Sym::x(j + 1))))
            })
        })
        .collect();
    LiftedInvariant { generators: b.generators.clone(), components }
}

pub fn lifted_invariants(sc: &StructureConstants) -> Result<LiftedInvariant> {
    Ok(lift(&inner_automorphism_matrix(sc)?))
}

/// `∂I_k/∂θ_t` as an `n × r` array.
pub fn theta_jacobian(li: &LiftedInvariant) -> Vec<Vec<ClosedFormExpr>> {
    li.components.iter().map(|c| (0..li.nvars()).map(|t| c.diff(t)).collect()).collect()
}

/// A function of θ and x that enters the normalization.
#[derive(Debug, Clone, PartialEq)]
enum CandidateKind {
    Closed(ClosedFormExpr),
    /// `phi0 + Σ_t ω_t θ_t`, the polar angle of a rotation pair.
    Angle { phi0: ScalarExpr, omega: Vec<RatFunc> },
}

#[derive(Debug, Clone, PartialEq)]
struct Candidate {
    label: String,
    kind: CandidateKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EliminationResult {
    /// Generic rank ρ of the coadjoint matrix.
    pub rank: usize,
    /// Labels of the normalized functions, e.g. `I1` or `arctan(I3/I2)`.
    pub normalized: Vec<String>,
    /// Normalization constant used for each normalized function.
    pub constants: Vec<BigRational>,
    /// Solved group parameters `(θ index, expression)`, 0-based index.
    pub solutions: Vec<(usize, ScalarExpr)>,
    /// Group parameters set to zero because they are not determined.
    pub free: Vec<usize>,
    /// θ indices the solver could not eliminate.
    pub unsolved: Vec<usize>,
    pub invariants: Vec<ScalarExpr>,
    pub log: Vec<String>,
}

impl EliminationResult {
    pub fn is_complete(&self) -> bool {
        self.unsolved.is_empty()
    }

    /// Turn an incomplete elimination into [`Error::PatternNotSolvable`].
    pub fn require_complete(self) -> Result<EliminationResult> {
        match self.unsolved.first() {
            None => Ok(self),
            Some(&t) => Err(Error::PatternNotSolvable {
                theta: t + 1,
                component: self.normalized.join(", "),
            }),
        }
    }
}

/// Exponential-times-rotation shape `e^{λ·θ}(A cos ψ + B sin ψ)`, θ-free A, B.
fn rotation_shape(e: &ClosedFormExpr) -> Option<(Vec<RatFunc>, Vec<RatFunc>, RatFunc, RatFunc)> {
    let mut rate = None;
    let mut freq = None;
    let (mut a, mut b) = (RatFunc::zero(), RatFunc::zero());
    for (k, c) in e.terms() {
        if k.mono.iter().any(|&m| m > 0) || k.trig == Trig::One {
            return None;
        }
        if rate.get_or_insert_with(|| k.rate.clone()) != &k.rate || freq.get_or_insert_with(|| k.freq.clone()) != &k.freq {
            return None;
        }
        match k.trig {
            Trig::Cos => a = c.clone(),
            Trig::Sin => b = c.clone(),
            Trig::One => unreachable!(),
        }
    }
    Some((rate?, freq?, a, b))
}

fn build_candidates(li: &LiftedInvariant, log: &mut Vec<String>) -> Vec<Candidate> {
    let n = li.components.len();
    let mut cands: Vec<Option<Candidate>> = li
        .components
        .iter()
        .enumerate()
        .map(|(k, c)| Some(Candidate { label: format!("I{}", k + 1), kind: CandidateKind::Closed(c.clone()) }))
        .collect();
    let shapes: Vec<_> = li.components.iter().map(rotation_shape).collect();
    let mut used = vec![false; n];
    let mut refs = Vec::new();
    for p in 0..n {
        for q in p + 1..n {
            if used[p] || used[q] {
                continue;
            }
            let (Some((rp, fp, a, b)), Some((rq, fq, c, d))) = (&shapes[p], &shapes[q]) else { continue };
            if rp != rq || fp != fq || a.is_zero() {
                continue;
            }
            // I_q/I_p = ±tan(ψ - φ) with tan φ = B/A.
            let orientation = if *c == b.neg() && *d == *a {
                1
            } else if *c == *b && *d == a.neg() {
                -1
            } else {
                continue;
            };
            let ratio = ScalarExpr::from_ratfunc(&b.div(a)).atan();
            let (phi0, omega): (ScalarExpr, Vec<RatFunc>) = if orientation == 1 {
                (ratio.neg(), fp.clone())
            } else {
                (ratio, fp.iter().map(RatFunc::neg).collect())
            };
            let ip = &li.components[p];
            let iq = &li.components[q];
            let radius = ip.mul(ip).add(&iq.mul(iq));
            log.push(format!(
                "rotation pair (I{0}, I{1}): using I{0}^2+I{1}^2 and arctan(I{1}/I{0})",
                p + 1,
                q + 1
            ));
            cands[p] = Some(Candidate {
                label: format!("I{}^2+I{}^2", p + 1, q + 1),
                kind: CandidateKind::Closed(radius),
            });
            cands[q] = Some(Candidate {
                label: format!("arctan(I{}/I{})", q + 1, p + 1),
                kind: CandidateKind::Angle { phi0, omega },
            });
            used[p] = true;
            used[q] = true;
            refs.push((p, q, rp.clone(), a.mul(a).add(&b.mul(b))));
        }
    }
    // Pairs that turn with a reference pair (I_p, I_q) are read in its frame:
    // (I_s I_p + I_t I_q)/(I_p^2+I_q^2) and (I_t I_p - I_s I_q)/(I_p^2+I_q^2).
    for (p, q, rate, norm) in refs {
        let (ip, iq) = (&li.components[p], &li.components[q]);
        let scale = ClosedFormExpr::exp(rate.iter().map(|r| r.scale(&BigRational::from_integer((-2).into()))).collect())
            .scale(&norm.inv());
        for s in 0..n {
            for t in 0..n {
                if s == t || used[s] || used[t] || !li.components[s].has_trig() || !li.components[t].has_trig() {
                    continue;
                }
                let (is, it) = (&li.components[s], &li.components[t]);
                let js = is.mul(ip).add(&it.mul(iq)).mul(&scale);
                let jt = it.mul(ip).sub(&is.mul(iq)).mul(&scale);
                if js.has_trig() || jt.has_trig() {
                    continue;
                }
                log.push(format!("pair (I{0}, I{1}) turns with (I{2}, I{3}): using it in that frame", s + 1, t + 1, p + 1, q + 1));
                cands[s] = Some(Candidate {
                    label: format!("(I{0}*I{2}+I{1}*I{3})/(I{2}^2+I{3}^2)", s + 1, t + 1, p + 1, q + 1),
                    kind: CandidateKind::Closed(js),
                });
                cands[t] = Some(Candidate {
                    label: format!("(I{1}*I{2}-I{0}*I{3})/(I{2}^2+I{3}^2)", s + 1, t + 1, p + 1, q + 1),
                    kind: CandidateKind::Closed(jt),
                });
                used[s] = true;
                used[t] = true;
            }
        }
    }
    cands.into_iter().flatten().collect()
}

fn gradient_at_origin(c: &Candidate, r: usize, env: &BTreeMap<Sym, BigRational>) -> Option<Vec<BigRational>> {
    match &c.kind {
        CandidateKind::Closed(e) => (0..r).map(|t| e.diff(t).at_origin().eval_rational(env)).collect(),
        CandidateKind::Angle { omega, .. } => omega.iter().map(|w| w.eval_rational(env)).collect(),
    }
}

/// Closed form with every θ replaced by its solution (or left as `t_i`).
fn closed_to_scalar(e: &ClosedFormExpr, solved: &BTreeMap<usize, ScalarExpr>) -> Option<ScalarExpr> {
    if let Some(r) = closed_to_ratfunc(e, solved) {
        return Some(ScalarExpr::from_ratfunc(&r));
    }
    let theta = |t: usize| solved.get(&t).cloned().unwrap_or_else(|| ScalarExpr::Var(theta_sym(t + 1)));
    let mut terms = Vec::new();
    for (k, c) in e.terms() {
        if k.trig != Trig::One {
            return None;
        }
        let mut factors = vec![ScalarExpr::from_ratfunc(c)];
        for (t, &m) in k.mono.iter().enumerate() {
            if m > 0 {
                factors.push(theta(t).powi(m as i64));
            }
        }
        if k.has_exp() {
            let arg = ScalarExpr::sum(
                k.rate.iter().enumerate().filter(|(_, r)| !r.is_zero()).map(|(t, r)| theta(t).scale(r)).collect(),
            );
            factors.push(arg.exp());
        }
        terms.push(ScalarExpr::product(factors));
    }
    Some(ScalarExpr::sum(terms))
}

/// Exact value when `e` is polynomial in θ and every θ it uses is solved by a
/// rational function of `x`.
fn closed_to_ratfunc(e: &ClosedFormExpr, solved: &BTreeMap<usize, ScalarExpr>) -> Option<RatFunc> {
    let mut cache: BTreeMap<usize, RatFunc> = BTreeMap::new();
    let mut out = RatFunc::zero();
    for (k, c) in e.terms() {
        if k.trig != Trig::One || k.has_exp() {
            return None;
        }
        let mut term = c.clone();
        for (t, &m) in k.mono.iter().enumerate() {
            if m == 0 {
                continue;
            }
            let v = match cache.get(&t) {
                Some(v) => v.clone(),
                None => {
                    let v = solved.get(&t)?.as_ratfunc()?;
                    cache.insert(t, v.clone());
                    v
                }
            };
            term = term.mul(&v.pow(m as i32));
        }
        out = out.add(&term);
    }
    Some(out)
}

fn angle_to_scalar(phi0: &ScalarExpr, omega: &[RatFunc], solved: &BTreeMap<usize, ScalarExpr>) -> ScalarExpr {
    let mut terms = vec![phi0.clone()];
    for (t, w) in omega.iter().enumerate() {
        if w.is_zero() {
            continue;
        }
        let th = solved.get(&t).cloned().unwrap_or_else(|| ScalarExpr::Var(theta_sym(t + 1)));
        terms.push(th.scale(w));
    }
    ScalarExpr::sum(terms)
}

fn map_terms(e: &ClosedFormExpr, f: impl Fn(&TermKey, &RatFunc) -> Option<(TermKey, RatFunc)>) -> ClosedFormExpr {
    e.terms()
        .filter_map(|(k, c)| f(k, c))
        .fold(ClosedFormExpr::zero(e.nvars()), |acc, (k, c)| acc.add(&ClosedFormExpr::term(k, c)))
}

/// A normalization equation rewritten as `Σ_t coeff_t θ_t = rhs`.
struct LinearEq {
    source: usize,
    coeffs: BTreeMap<usize, RatFunc>,
    rhs: ScalarExpr,
    constant: BigRational,
    pattern: &'static str,
}

/// Linearize candidate `c` with respect to the unsolved unknowns, when one of
/// the three patterns applies and all other dependencies are solved.
fn linearize(
    source: usize,
    c: &Candidate,
    unknowns: &[usize],
    solved: &BTreeMap<usize, ScalarExpr>,
) -> Option<LinearEq> {
    let involved: Vec<usize> = match &c.kind {
        CandidateKind::Closed(e) => unknowns.iter().copied().filter(|&t| e.depends_on(t)).collect(),
        CandidateKind::Angle { omega, .. } => unknowns.iter().copied().filter(|&t| !omega[t].is_zero()).collect(),
    };
    if involved.is_empty() {
        return None;
    }
    match &c.kind {
        CandidateKind::Angle { phi0, omega } => {
            let mut rest = omega.clone();
            for &t in &involved {
                rest[t] = RatFunc::zero();
            }
            Some(LinearEq {
                source,
                coeffs: involved.iter().map(|&t| (t, omega[t].clone())).collect(),
                rhs: angle_to_scalar(phi0, &rest, solved).neg(),
                constant: BigRational::zero(),
                pattern: "angle",
            })
        }
        CandidateKind::Closed(e) => {
            let keys: Vec<&TermKey> = e.terms().map(|(k, _)| k).collect();
            let no_trig = keys.iter().all(|k| involved.iter().all(|&t| k.freq[t].is_zero()));
            if !no_trig {
                return None;
            }
            let no_mono = keys.iter().all(|k| involved.iter().all(|&t| k.mono[t] == 0));
            let first_rate: Vec<RatFunc> = involved.iter().map(|&t| keys[0].rate[t].clone()).collect();
            let same_rate =
                keys.iter().all(|k| involved.iter().zip(&first_rate).all(|(&t, r)| &k.rate[t] == r));
            if no_mono && same_rate && first_rate.iter().any(|r| !r.is_zero()) {
                // e = G · exp(λ·θ_U) = 1  ⇒  λ·θ_U = -ln G.
                let g = map_terms(e, |k, c| {
                    let mut k = k.clone();
                    for &t in &involved {
                        k.rate[t] = RatFunc::zero();
                    }
                    Some((k, c.clone()))
                });
                let g = closed_to_scalar(&g, solved)?;
                if unknowns.iter().any(|&t| g.depends_on(theta_sym(t + 1))) {
                    return None;
                }
                return Some(LinearEq {
                    source,
                    coeffs: involved.iter().copied().zip(first_rate).filter(|(_, r)| !r.is_zero()).collect(),
                    rhs: g.ln().neg(),
                    constant: BigRational::from_integer(1.into()),
                    pattern: "exponential",
                });
            }
            let affine = keys.iter().all(|k| {
                involved.iter().all(|&t| k.rate[t].is_zero()) && involved.iter().map(|&t| k.mono[t]).sum::<u32>() <= 1
            });
            if !affine {
                return None;
            }
            // e = α + Σ_t β_t θ_t = 0.
            let alpha = map_terms(e, |k, c| involved.iter().all(|&t| k.mono[t] == 0).then(|| (k.clone(), c.clone())));
            let alpha = closed_to_scalar(&alpha, solved)?;
            let mut coeffs = BTreeMap::new();
            for &t in &involved {
                let beta = map_terms(e, |k, c| {
                    (k.mono[t] == 1).then(|| {
                        let mut k = k.clone();
                        k.mono[t] = 0;
                        (k, c.clone())
                    })
                });
                let beta = closed_to_scalar(&beta, solved)?;
                if beta.is_zero() {
                    continue;
                }
                coeffs.insert(t, beta);
            }
            if unknowns.iter().any(|&t| alpha.depends_on(theta_sym(t + 1)))
                || coeffs.values().any(|b| unknowns.iter().any(|&t| b.depends_on(theta_sym(t + 1))))
            {
                return None;
            }
            if coeffs.len() == 1 {
                let (&t, beta) = coeffs.iter().next().expect("one coefficient");
                // Single unknown: the coefficient may be transcendental.
                let sol = alpha.neg().div(beta);
                return Some(LinearEq {
                    source,
                    coeffs: [(t, RatFunc::one())].into_iter().collect(),
                    rhs: sol,
                    constant: BigRational::zero(),
                    pattern: "affine",
                });
            }
            let coeffs: Option<BTreeMap<usize, RatFunc>> =
                coeffs.into_iter().map(|(t, b)| b.as_ratfunc().map(|r| (t, r))).collect();
            Some(LinearEq { source, coeffs: coeffs?, rhs: alpha.neg(), constant: BigRational::zero(), pattern: "affine" })
        }
    }
}

/// Solve `L θ = rhs` for a square nonsingular system over ℚ(params, x).
fn solve_square(eqs: &[&LinearEq], vars: &[usize]) -> Option<Vec<ScalarExpr>> {
    let k = vars.len();
    let mut aug: Vec<Vec<RatFunc>> = eqs
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let mut row: Vec<RatFunc> = vars.iter().map(|t| e.coeffs.get(t).cloned().unwrap_or_else(RatFunc::zero)).collect();
            row.extend((0..k).map(|j| if i == j { RatFunc::one() } else { RatFunc::zero() }));
            row
        })
        .collect();
    let pivots = linalg::rref(&mut aug);
    if pivots.len() < k || pivots.iter().any(|&(_, c)| c >= k) {
        return None;
    }
    Some(
        (0..k)
            .map(|i| ScalarExpr::sum((0..k).map(|j| eqs[j].rhs.scale(&aug[i][k + j])).collect()))
            .collect(),
    )
}

/// Whether `r`, a function of `x` over ℚ(params), is provably not identically
/// zero: some `x`-coefficient of its numerator must be decidably nonzero.
fn provably_nonzero(r: &RatFunc, set: &AssumptionSet) -> bool {
    let by_mono = x_coefficients(r);
    if by_mono.values().any(|c| set.decide_nonzero(&RatFunc::from_poly(c.clone()))) {
        return true;
    }
    // The coefficients vanish together exactly when their sum of squares does.
    let squares = by_mono.values().fold(Poly::zero(), |acc, c| acc.add(&c.mul(c)));
    set.decide_nonzero(&RatFunc::from_poly(squares))
}

/// Numerator of `r` grouped by `x`-monomial, each group a polynomial in the parameters.
fn x_coefficients(r: &RatFunc) -> BTreeMap<Vec<(Sym, u32)>, Poly> {
    let mut by_mono: BTreeMap<Vec<(Sym, u32)>, Poly> = BTreeMap::new();
    for (m, c) in r.numer().terms() {
        let xs: Vec<(Sym, u32)> = m.iter().filter(|(s, _)| s.coordinate_index().is_some()).copied().collect();
        let rest: crate::poly::Monomial = m.iter().filter(|(s, _)| s.coordinate_index().is_none()).copied().collect();
        let entry = by_mono.entry(xs).or_insert_with(Poly::zero);
        *entry = entry.add(&Poly::monomial(rest, c.clone()));
    }
    by_mono
}

/// The parameter condition behind an undecided pivot: the common coefficient
/// when every `x`-monomial carries the same one, else the whole numerator.
fn pivot_condition(r: &RatFunc) -> String {
    let groups: Vec<Poly> = x_coefficients(r).into_values().map(|c| c.monic()).collect();
    match groups.first() {
        Some(g) if groups.iter().all(|h| h == g) => g.to_string(),
        _ => r.numer().to_string(),
    }
}

fn determinant(m: &[Vec<RatFunc>]) -> RatFunc {
    match m.len() {
        0 => RatFunc::one(),
        1 => m[0][0].clone(),
        k => (0..k).fold(RatFunc::zero(), |acc, j| {
            if m[0][j].is_zero() {
                return acc;
            }
            let minor: Vec<Vec<RatFunc>> =
                m[1..].iter().map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, v)| v.clone()).collect()).collect();
            let term = m[0][j].mul(&determinant(&minor));
            if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) }
        }),
    }
}

/// Outcome of solving one choice of normalized candidates.
struct Solve {
    selected: Vec<usize>,
    free: Vec<usize>,
    cands: Vec<Candidate>,
    solved: BTreeMap<usize, ScalarExpr>,
    order: Vec<usize>,
    constants: BTreeMap<usize, BigRational>,
    unsolved: Vec<usize>,
    /// Pivot whose nonvanishing the assumptions cannot decide.
    undecided: Option<String>,
    log: Vec<String>,
}

fn solve_selection(cands: &[Candidate], selected: Vec<usize>, pivots: Vec<usize>, r: usize, set: &AssumptionSet) -> Solve {
    let free: Vec<usize> = (0..r).filter(|t| !pivots.contains(t)).collect();
    let mut log = vec![format!(
        "normalize {}; solve for {}; free {}",
        selected.iter().map(|&i| cands[i].label.as_str()).collect::<Vec<_>>().join(", "),
        theta_list(&pivots),
        theta_list(&free)
    )];
    let cands: Vec<Candidate> = cands
        .iter()
        .map(|c| Candidate {
            label: c.label.clone(),
            kind: match &c.kind {
                CandidateKind::Closed(e) => {
                    CandidateKind::Closed(free.iter().fold(e.clone(), |e, &t| e.substitute_zero(t)))
                }
                CandidateKind::Angle { phi0, omega } => {
                    let mut omega = omega.clone();
                    for &t in &free {
                        omega[t] = RatFunc::zero();
                    }
                    CandidateKind::Angle { phi0: phi0.clone(), omega }
                }
            },
        })
        .collect();

    let mut solved: BTreeMap<usize, ScalarExpr> = BTreeMap::new();
    let mut order: Vec<usize> = Vec::new();
    let mut constants: BTreeMap<usize, BigRational> = BTreeMap::new();
    let mut open: Vec<usize> = selected.clone();
    let mut undecided = None;
    loop {
        let unknowns: Vec<usize> = pivots.iter().copied().filter(|t| !solved.contains_key(t)).collect();
        if unknowns.is_empty() || open.is_empty() {
            break;
        }
        let eqs: Vec<LinearEq> = open.iter().filter_map(|&i| linearize(i, &cands[i], &unknowns, &solved)).collect();
        let mut progress = false;
        let single = eqs.iter().filter(|e| e.coeffs.len() == 1).find(|e| {
            let c = e.coeffs.values().next().expect("one coefficient");
            let ok = provably_nonzero(c, set);
            if !ok && undecided.is_none() {
                undecided = Some(pivot_condition(c));
            }
            ok
        });
        if let Some(eq) = single {
            let (&t, c) = eq.coeffs.iter().next().expect("one coefficient");
            let sol = eq.rhs.scale(&c.inv());
            log.push(format!("{} = {} ({} pattern): t{} = {}", cands[eq.source].label, eq.constant, eq.pattern, t + 1, sol));
            constants.insert(eq.source, eq.constant.clone());
            solved.insert(t, sol);
            order.push(t);
            open.retain(|&i| i != eq.source);
            progress = true;
        } else if !eqs.is_empty() {
            // Joint solve over the equations whose coefficients are independent.
            let mut chosen: Vec<&LinearEq> = Vec::new();
            let mut rows: Vec<Vec<RatFunc>> = Vec::new();
            for e in &eqs {
                rows.push(unknowns.iter().map(|t| e.coeffs.get(t).cloned().unwrap_or_else(RatFunc::zero)).collect());
                if linalg::rank(&rows) > chosen.len() {
                    chosen.push(e);
                } else {
                    rows.pop();
                }
            }
            let vars: Vec<usize> =
                unknowns.iter().copied().filter(|t| chosen.iter().any(|e| e.coeffs.contains_key(t))).collect();
            if vars.len() == chosen.len() {
                let square: Vec<Vec<RatFunc>> = chosen
                    .iter()
                    .map(|e| vars.iter().map(|t| e.coeffs.get(t).cloned().unwrap_or_else(RatFunc::zero)).collect())
                    .collect();
                let det = determinant(&square);
                if !provably_nonzero(&det, set) {
                    undecided.get_or_insert_with(|| pivot_condition(&det));
                } else if let Some(sols) = solve_square(&chosen, &vars) {
                    for (e, (&t, s)) in chosen.iter().zip(vars.iter().zip(sols)) {
                        log.push(format!("{} = {} ({} pattern, joint): t{} = {}", cands[e.source].label, e.constant, e.pattern, t + 1, s));
                        constants.insert(e.source, e.constant.clone());
                        solved.insert(t, s);
                        order.push(t);
                    }
                    open.retain(|i| !chosen.iter().any(|e| e.source == *i));
                    progress = true;
                }
            }
        }
        if !progress {
            break;
        }
    }
    let unsolved: Vec<usize> = pivots.iter().copied().filter(|t| !solved.contains_key(t)).collect();
    if unsolved.is_empty() {
        undecided = None;
    } else {
        log.push(format!("no solving pattern for {}", theta_list(&unsolved)));
    }
    Solve { selected, free, cands, solved, order, constants, unsolved, undecided, log }
}

/// Candidate orders tried in turn: as listed, angles first, then shuffles.
fn candidate_orders(cands: &[Candidate], sampler: &mut Sampler) -> Vec<Vec<usize>> {
    let natural: Vec<usize> = (0..cands.len()).collect();
    let mut angles_first: Vec<usize> = natural.clone();
    angles_first.sort_by_key(|&i| !matches!(cands[i].kind, CandidateKind::Angle { .. }));
    let reversed: Vec<usize> = natural.iter().rev().copied().collect();
    let mut orders = vec![natural, angles_first, reversed];
    for _ in 0..12 {
        let mut o: Vec<usize> = (0..cands.len()).collect();
        for i in (1..o.len()).rev() {
            let j = sampler.index(i);
            o.swap(i, j);
        }
        orders.push(o);
    }
    orders.dedup();
    orders
}

pub fn normalize_frame(sc: &StructureConstants, li: &LiftedInvariant, seed: u64) -> Result<EliminationResult> {
    let sc = sc.specialize();
    let set = sc.assumption_set();
    let n = sc.dim();
    let r = li.nvars();
    let rank = sc.generic_rank(5, seed)?.rank;
    let mut log = vec![format!("n = {n}, r = {r}, rank = {rank}")];
    if rank == n {
        log.push("generic orbits are open: no invariants".into());
        return Ok(EliminationResult {
            rank,
            normalized: vec![],
            constants: vec![],
            solutions: vec![],
            free: vec![],
            unsolved: vec![],
            invariants: vec![],
            log,
        });
    }
    let cands = build_candidates(li, &mut log);
    let mut sampler = Sampler::new(seed);
    let mut best: Option<Solve> = None;
    let mut seen: Vec<Vec<usize>> = Vec::new();
    for order in candidate_orders(&cands, &mut sampler) {
        let mut attempt = 0;
        let (selected, pivots) = loop {
            if attempt >= 25 {
                return Err(Error::SampleDegenerate(25));
            }
            attempt += 1;
            match select_rows(&cands, &order, &sc, &set, r, rank, &mut sampler) {
                Some(found) => break found,
                None => log.push("degenerate sample, reseeding".into()),
            }
        };
        let mut key = selected.clone();
        key.sort_unstable();
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        let s = solve_selection(&cands, selected, pivots, r, &set);
        let done = s.unsolved.is_empty();
        if best.as_ref().is_none_or(|b| s.unsolved.len() < b.unsolved.len()) {
            best = Some(s);
        }
        if done {
            break;
        }
    }
    let s = best.expect("at least one candidate order");
    if let Some(poly) = &s.undecided {
        return Err(Error::UndecidableCaseSplit { polynomial: poly.clone() });
    }
    log.extend(s.log);
    let Solve { selected, free, cands, solved, order, constants, unsolved, .. } = s;

    let mut invariants = Vec::new();
    for (i, c) in cands.iter().enumerate() {
        if selected.contains(&i) {
            continue;
        }
        let expr = match &c.kind {
            CandidateKind::Closed(e) => closed_to_scalar(e, &solved),
            CandidateKind::Angle { phi0, omega } => Some(angle_to_scalar(phi0, omega, &solved)),
        };
        let Some(expr) = expr else {
            log.push(format!("{} keeps a trigonometric dependence on theta", c.label));
            continue;
        };
        let expr = expr.normalize();
        if expr.free_vars().iter().any(|s| s.coordinate_index().is_none()) {
            log.push(format!("{} still depends on unsolved parameters", c.label));
            continue;
        }
        invariants.push(expr);
    }
    let normalized: Vec<String> = selected.iter().map(|&i| cands[i].label.clone()).collect();
    let constants = selected.iter().map(|i| constants.get(i).cloned().unwrap_or_else(BigRational::zero)).collect();
    let solutions = order.into_iter().map(|t| (t, solved[&t].clone())).collect();
    Ok(EliminationResult { rank, normalized, constants, solutions, free, unsolved, invariants, log })
}

fn theta_list(ts: &[usize]) -> String {
    if ts.is_empty() {
        return "none".into();
    }
    ts.iter().map(|t| format!("t{}", t + 1)).collect::<Vec<_>>().join(", ")
}

/// Greedy choice, in the given order, of `rank` candidates with independent
/// θ-gradients at θ = 0, and of pivot θ columns for them. `None` when the
/// sample is degenerate.
fn select_rows(
    cands: &[Candidate],
    order: &[usize],
    sc: &StructureConstants,
    set: &AssumptionSet,
    r: usize,
    rank: usize,
    sampler: &mut Sampler,
) -> Option<(Vec<usize>, Vec<usize>)> {
    let mut env = set.sample(sc.params(), sampler).ok()?;
    for j in 1..=sc.dim() {
        env.insert(Sym::x(j), sampler.rational());
    }
    let mut rows: Vec<Vec<BigRational>> = Vec::new();
    let mut selected = Vec::new();
    for &i in order {
        if selected.len() == rank {
            break;
        }
        let g = gradient_at_origin(&cands[i], r, &env)?;
        rows.push(g);
        if linalg::rank(&rows) > selected.len() {
            selected.push(i);
        } else {
            rows.pop();
        }
    }
    if selected.len() < rank {
        return None;
    }
    let pivots: Vec<usize> = linalg::rref(&mut rows).into_iter().map(|(_, c)| c).collect();
    Some((selected, pivots))
}

/// Full pipeline: B(θ), lift, normalize.
pub fn eliminate(sc: &StructureConstants, seed: u64) -> Result<EliminationResult> {
    let li = lifted_invariants(sc)?;
    normalize_frame(sc, &li, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abelian_invariants_are_the_coordinates() {
        let sc = StructureConstants::abelian(3);
        let res = eliminate(&sc, 0).unwrap();
        assert_eq!(res.invariants, vec![ScalarExpr::x(1), ScalarExpr::x(2), ScalarExpr::x(3)]);
        assert!(res.is_complete());
    }

    #[test]
    fn heisenberg_center_survives() {
        let mut sc = StructureConstants::abelian(3);
        sc.set_bracket(1, 2, vec![RatFunc::one(), RatFunc::zero(), RatFunc::zero()]).unwrap();
        let li = lifted_invariants(&sc).unwrap();
        assert_eq!(li.components[0], ClosedFormExpr::constant(2, RatFunc::var(Sym::x(1))));
        let res = normalize_frame(&sc, &li, 0).unwrap();
        assert_eq!(res.invariants, vec![ScalarExpr::x(1)]);
    }
}
