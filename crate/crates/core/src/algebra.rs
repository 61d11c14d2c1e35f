//! Lie algebras given by structure constants `[e_i, e_j] = c_ij^k e_k`.
//!
//! Indices in this API are 0-based; text formats and reports are 1-based.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg;
use crate::poly::{Poly, RatFunc, Sym};
use crate::sampling::Sampler;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AssumptionKind {
    NonZero,
    Zero,
    Positive,
}

impl AssumptionKind {
    pub fn operator(&self) -> &'static str {
        match self {
            AssumptionKind::NonZero => "!=",
            AssumptionKind::Zero => "=",
            AssumptionKind::Positive => ">",
        }
    }
}

/// A constraint `target (!=|=|>) 0` on the parameters.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assumption {
    pub target: Poly,
    pub kind: AssumptionKind,
}

impl Assumption {
    pub fn new(target: Poly, kind: AssumptionKind) -> Assumption {
        Assumption { target, kind }
    }

    pub fn nonzero(target: Poly) -> Assumption {
        Assumption::new(target, AssumptionKind::NonZero)
    }
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} 0", self.target, self.kind.operator())
    }
}

/// Assumptions compiled into pinned parameter values plus sign facts.
#[derive(Debug, Clone, Default)]
pub struct AssumptionSet {
    pinned: BTreeMap<Sym, BigRational>,
    nonzero: Vec<Poly>,
    positive: Vec<Poly>,
}

impl AssumptionSet {
    pub fn compile(list: &[Assumption]) -> Result<AssumptionSet> {
        let mut set = AssumptionSet::default();
        for a in list.iter().filter(|a| a.kind == AssumptionKind::Zero) {
            let t = a.target.partial_eval(&set.pinned);
            if let Some(c) = t.constant_value() {
                if c.is_zero() {
                    continue;
                }
                return Err(Error::AssumptionInconsistent(format!("`{a}` contradicts earlier assumptions")));
            }
            let vars = t.vars();
            if vars.len() != 1 || t.total_degree() != 1 {
                return Err(Error::InvalidArgument(format!(
                    "zero assumption `{a}` must be linear in a single parameter"
                )));
            }
            let v = *vars.iter().next().expect("one variable");
            let uni = t.to_univariate(v);
            let value = -uni[0].constant_value().expect("constant") / uni[1].constant_value().expect("constant");
            set.pinned.insert(v, value);
        }
        for a in list.iter().filter(|a| a.kind != AssumptionKind::Zero) {
            let t = a.target.partial_eval(&set.pinned);
            if let Some(c) = t.constant_value() {
                let ok = match a.kind {
                    AssumptionKind::NonZero => !c.is_zero(),
                    AssumptionKind::Positive => c.is_positive(),
                    AssumptionKind::Zero => unreachable!(),
                };
                if !ok {
                    return Err(Error::AssumptionInconsistent(format!(
                        "`{a}` is false for the pinned parameter values"
                    )));
                }
                continue;
            }
            match a.kind {
                AssumptionKind::NonZero => set.nonzero.push(t.monic()),
                AssumptionKind::Positive => set.positive.push(t),
                AssumptionKind::Zero => unreachable!(),
            }
        }
        Ok(set)
    }

    pub fn pinned(&self) -> &BTreeMap<Sym, BigRational> {
        &self.pinned
    }

    /// Whether `r` is nonzero for every parameter value allowed by the
    /// assumptions. `false` means "not provable", not "zero".
    pub fn decide_nonzero(&self, r: &RatFunc) -> bool {
        let Some(r) = r.partial_eval(&self.pinned) else { return false };
        let mut q = r.numer().clone();
        if let Some(c) = q.constant_value() {
            return !c.is_zero();
        }
        let facts: Vec<Poly> = self.nonzero.iter().chain(self.positive.iter()).map(Poly::monic).collect();
        // a factor of a nonzero product is nonzero
        if self.nonzero.iter().any(|t| t.div_exact(&q).is_some()) {
            return true;
        }
        let mut progress = true;
        while progress && !q.is_constant() {
            progress = false;
            for t in &facts {
                if let Some(quot) = q.div_exact(t) {
                    q = quot;
                    progress = true;
                }
            }
        }
        if let Some(c) = q.constant_value() {
            return !c.is_zero();
        }
        is_evidently_positive(&q) || is_evidently_positive(&q.neg())
    }

    pub fn holds(&self, env: &BTreeMap<Sym, BigRational>) -> bool {
        self.pinned.iter().all(|(s, v)| env.get(s) == Some(v))
            && self.nonzero.iter().all(|t| t.eval_rational(env).is_some_and(|v| !v.is_zero()))
            && self.positive.iter().all(|t| t.eval_rational(env).is_some_and(|v| v.is_positive()))
    }

    /// Random exact parameter values consistent with the assumptions.
    pub fn sample(&self, params: &[Sym], sampler: &mut Sampler) -> Result<BTreeMap<Sym, BigRational>> {
        for _ in 0..1000 {
            let mut env = BTreeMap::new();
            for &p in params {
                let v = match self.pinned.get(&p) {
                    Some(v) => v.clone(),
                    None => sampler.grid_value(),
                };
                env.insert(p, v);
            }
            if self.holds(&env) {
                return Ok(env);
            }
        }
        Err(Error::AssumptionInconsistent("no parameter sample satisfies the assumptions".into()))
    }
}

/// Sum of even monomials with positive coefficients and a positive constant.
fn is_evidently_positive(p: &Poly) -> bool {
    let mut has_const = false;
    for (m, c) in p.terms() {
        if !c.is_positive() || m.iter().any(|&(_, e)| e % 2 == 1) {
            return false;
        }
        has_const |= m.is_empty();
    }
    has_const
}

/// Dense matrix over ℚ(params).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<RatFunc>,
}

impl ParamMatrix {
    pub fn zeros(rows: usize, cols: usize) -> ParamMatrix {
        ParamMatrix { rows, cols, entries: vec![RatFunc::zero(); rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<RatFunc>>) -> ParamMatrix {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let entries: Vec<RatFunc> = rows.into_iter().flatten().collect();
        assert_eq!(entries.len(), r * c, "ragged rows");
        ParamMatrix { rows: r, cols: c, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &RatFunc {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: RatFunc) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(RatFunc::is_zero)
    }

    pub fn neg(&self) -> ParamMatrix {
        ParamMatrix { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(RatFunc::neg).collect() }
    }

    pub fn trace(&self) -> RatFunc {
        (0..self.rows.min(self.cols)).fold(RatFunc::zero(), |acc, i| acc.add(self.get(i, i)))
    }

    pub fn eval_f64(&self, env: &dyn Fn(Sym) -> Option<f64>) -> Option<Vec<Vec<f64>>> {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c).eval_f64(env)).collect())
            .collect()
    }

    pub fn eval_rational(&self, env: &BTreeMap<Sym, BigRational>) -> Option<Vec<Vec<BigRational>>> {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c).eval_rational(env)).collect())
            .collect()
    }
}

impl fmt::Display for ParamMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self.get(r, c).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JacobiViolation {
    /// 0-based triple `i < j < k`.
    pub triple: (usize, usize, usize),
    /// Coefficients of the residual vector in the basis.
    pub residual: Vec<RatFunc>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<JacobiViolation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Exact-rational witness for the generic rank.
#[derive(Debug, Clone, PartialEq)]
pub struct RankCertificate {
    pub rank: usize,
    pub n_a: usize,
    pub trials: usize,
    pub params: BTreeMap<Sym, BigRational>,
    pub point: Vec<BigRational>,
}

/// Structure constants of an `n`-dimensional Lie algebra over ℚ(params).
///
/// Only brackets with `i < j` are stored; `c_ji^k = -c_ij^k` is derived.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants {
    id: Option<String>,
    n: usize,
    params: Vec<Sym>,
    assumptions: Vec<Assumption>,
    entries: BTreeMap<(usize, usize), Vec<RatFunc>>,
}

impl StructureConstants {
    pub fn new(n: usize, params: Vec<Sym>, assumptions: Vec<Assumption>) -> Result<StructureConstants> {
        if n == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        AssumptionSet::compile(&assumptions)?;
        Ok(StructureConstants { id: None, n, params, assumptions, entries: BTreeMap::new() })
    }

    pub fn abelian(n: usize) -> StructureConstants {
        StructureConstants::new(n, Vec::new(), Vec::new()).expect("positive dimension")
    }

    pub fn with_id(mut self, id: impl Into<String>) -> StructureConstants {
        self.id = Some(id.into());
        self
    }

    pub fn id(&self) -> Option<&str> {
        self.id.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn params(&self) -> &[Sym] {
        &self.params
    }

    pub fn assumptions(&self) -> &[Assumption] {
        &self.assumptions
    }

    pub fn assumption_set(&self) -> AssumptionSet {
        AssumptionSet::compile(&self.assumptions).expect("checked at construction")
    }

    pub fn add_assumption(&mut self, a: Assumption) -> Result<()> {
        let mut list = self.assumptions.clone();
        list.push(a);
        AssumptionSet::compile(&list)?;
        self.assumptions = list;
        Ok(())
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange { index: i, n: self.n });
        }
        Ok(())
    }

    /// Set `[e_i, e_j] = Σ_k coeffs[k] e_k`; `i > j` stores the negation.
    pub fn set_bracket(&mut self, i: usize, j: usize, coeffs: Vec<RatFunc>) -> Result<()> {
        self.check_index(i)?;
        self.check_index(j)?;
        if i == j {
            return Err(Error::InvalidArgument(format!("diagonal bracket [e{0},e{0}] is zero by antisymmetry", i + 1)));
        }
        if coeffs.len() != self.n {
            return Err(Error::InvalidArgument(format!("bracket needs {} coefficients", self.n)));
        }
        let (key, coeffs) = if i < j { ((i, j), coeffs) } else { ((j, i), coeffs.iter().map(RatFunc::neg).collect()) };
        if coeffs.iter().all(RatFunc::is_zero) {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, coeffs);
        }
        Ok(())
    }

    pub fn has_bracket(&self, i: usize, j: usize) -> bool {
        self.entries.contains_key(&(i.min(j), i.max(j)))
    }

    /// Stored brackets `(i, j) -> coefficients` with `i < j`.
    pub fn stored(&self) -> impl Iterator<Item = (&(usize, usize), &Vec<RatFunc>)> {
        self.entries.iter()
    }

    pub fn bracket(&self, i: usize, j: usize) -> Vec<RatFunc> {
        if i == j {
            return vec![RatFunc::zero(); self.n];
        }
        match self.entries.get(&(i.min(j), i.max(j))) {
            None => vec![RatFunc::zero(); self.n],
            Some(v) if i < j => v.clone(),
            Some(v) => v.iter().map(RatFunc::neg).collect(),
        }
    }

    /// `c_ij^k`.
    pub fn c(&self, i: usize, j: usize, k: usize) -> RatFunc {
        if i == j {
            return RatFunc::zero();
        }
        match self.entries.get(&(i.min(j), i.max(j))) {
            None => RatFunc::zero(),
            Some(v) if i < j => v[k].clone(),
            Some(v) => v[k].neg(),
        }
    }

    /// Copy with parameters pinned by `= 0` assumptions substituted away.
    pub fn specialize(&self) -> StructureConstants {
        let set = self.assumption_set();
        if set.pinned().is_empty() {
            return self.clone();
        }
        let pinned = set.pinned();
        let entries = self
            .entries
            .iter()
            .filter_map(|(k, v)| {
                let v: Vec<RatFunc> =
                    v.iter().map(|c| c.partial_eval(pinned).expect("polynomial coefficients")).collect();
                (!v.iter().all(RatFunc::is_zero)).then_some((*k, v))
            })
            .collect();
        let params = self.params.iter().copied().filter(|p| !pinned.contains_key(p)).collect();
        let assumptions = self
            .assumptions
            .iter()
            .filter(|a| a.kind != AssumptionKind::Zero)
            .filter_map(|a| {
                let t = a.target.partial_eval(pinned);
                (!t.is_constant()).then(|| Assumption::new(t, a.kind))
            })
            .collect();
        StructureConstants { id: self.id.clone(), n: self.n, params, assumptions, entries }
    }

    fn bracket_vectors(&self, u: &[RatFunc], v: &[RatFunc]) -> Vec<RatFunc> {
        let mut out = vec![RatFunc::zero(); self.n];
        for (&(i, j), coeffs) in &self.entries {
            let w = u[i].mul(&v[j]).sub(&u[j].mul(&v[i]));
            if w.is_zero() {
                continue;
            }
            for (o, c) in out.iter_mut().zip(coeffs) {
                if !c.is_zero() {
                    *o = o.add(&c.mul(&w));
                }
            }
        }
        out
    }

    fn basis_vector(&self, i: usize) -> Vec<RatFunc> {
        let mut v = vec![RatFunc::zero(); self.n];
        v[i] = RatFunc::one();
        v
    }

    /// Jacobi identity for every triple; residuals are reduced under pinned
    /// parameter values.
    pub fn validate(&self) -> Result<ValidationReport> {
        AssumptionSet::compile(&self.assumptions)?;
        let sc = self.specialize();
        let mut report = ValidationReport::default();
        for i in 0..self.n {
            for j in i + 1..self.n {
                for k in j + 1..self.n {
                    let (ei, ej, ek) = (sc.basis_vector(i), sc.basis_vector(j), sc.basis_vector(k));
                    let a = sc.bracket_vectors(&sc.bracket(i, j), &ek);
                    let b = sc.bracket_vectors(&sc.bracket(j, k), &ei);
                    let c = sc.bracket_vectors(&sc.bracket(k, i), &ej);
                    let residual: Vec<RatFunc> =
                        a.iter().zip(&b).zip(&c).map(|((x, y), z)| x.add(y).add(z)).collect();
                    if residual.iter().any(|r| !r.is_zero()) {
                        report.violations.push(JacobiViolation { triple: (i, j, k), residual });
                    }
                }
            }
        }
        Ok(report)
    }

    /// Matrix of `ad_{e_i}` acting on coordinate columns: entry `(k, j)` is
    /// `c_ij^k`, so column `j` holds the expansion of `[e_i, e_j]`.
    pub fn ad_matrix(&self, i: usize) -> Result<ParamMatrix> {
        self.check_index(i)?;
        let mut m = ParamMatrix::zeros(self.n, self.n);
        for j in 0..self.n {
            for (k, c) in self.bracket(i, j).into_iter().enumerate() {
                m.set(k, j, c);
            }
        }
        Ok(m)
    }

    /// Matrix `(c_ij^k x_k)_{i,j}` at exact parameter values and point.
    pub fn coadjoint_matrix_at(
        &self,
        params: &BTreeMap<Sym, BigRational>,
        x: &[BigRational],
    ) -> Vec<Vec<BigRational>> {
        let mut m = vec![vec![BigRational::zero(); self.n]; self.n];
        for (&(i, j), coeffs) in &self.entries {
            let mut s = BigRational::zero();
            for (k, c) in coeffs.iter().enumerate() {
                if !c.is_zero() {
                    s += c.eval_rational(params).expect("parameter values avoid poles") * &x[k];
                }
            }
            m[j][i] = -s.clone();
            m[i][j] = s;
        }
        m
    }

    /// Basis of the center `{v : [v, w] = 0 for all w}` over ℚ(params).
    pub fn center(&self) -> Result<Vec<Vec<RatFunc>>> {
        let sc = self.specialize();
        let set = sc.assumption_set();
        let rows = sc.center_system();
        let basis = linalg::nullspace(&rows, sc.n);
        // Detect parameter values where the dimension jumps.
        let pivots = pivot_values(&rows);
        for p in pivots.iter().filter(|p| !set.decide_nonzero(p)) {
            if let Some(env) = solve_on_locus(p.numer(), &sc.params, &set) {
                let numeric: Vec<Vec<BigRational>> = rows
                    .iter()
                    .map(|r| r.iter().map(|c| c.eval_rational(&env).unwrap_or_else(BigRational::zero)).collect())
                    .collect();
                let dim = sc.n - linalg::rank(&numeric);
                if dim != basis.len() {
                    return Err(Error::ParametricCenter(format!(
                        "dimension {} generically but {} when {} = 0",
                        basis.len(),
                        dim,
                        p.numer()
                    )));
                }
            }
        }
        Ok(basis)
    }

    fn center_system(&self) -> Vec<Vec<RatFunc>> {
        let mut rows = Vec::new();
        for j in 0..self.n {
            for k in 0..self.n {
                let row: Vec<RatFunc> = (0..self.n).map(|i| self.c(i, j, k)).collect();
                if row.iter().any(|c| !c.is_zero()) {
                    rows.push(row);
                }
            }
        }
        rows
    }

    /// Indices of basis elements whose adjoint matrices form a basis of
    /// `ad(A)` at generic parameter values, chosen greedily in increasing
    /// order. Parameter values where some of them become central are not
    /// excluded; the product formula for `B(θ)` stays valid there.
    pub fn noncentral_generators(&self) -> Result<Vec<usize>> {
        let sc = self.specialize();
        let set = sc.assumption_set();
        let mut sampler = Sampler::new(0x5eed);
        let mut best: Vec<usize> = Vec::new();
        for _ in 0..3 {
            let env = set.sample(&sc.params, &mut sampler)?;
            let mut chosen = Vec::new();
            let mut rows: Vec<Vec<BigRational>> = Vec::new();
            for i in 0..sc.n {
                let Some(m) = sc.ad_matrix(i)?.eval_rational(&env) else { continue };
                rows.push(m.into_iter().flatten().collect());
                if linalg::rank(&rows) > chosen.len() {
                    chosen.push(i);
                } else {
                    rows.pop();
                }
            }
            if chosen.len() > best.len() {
                best = chosen;
            }
        }
        Ok(best)
    }

    /// Randomized exact rank of `(c_ij^k x_k)`; `N_A = n - rank`.
    pub fn generic_rank(&self, trials: usize, seed: u64) -> Result<RankCertificate> {
        let sc = self.specialize();
        let set = sc.assumption_set();
        let mut sampler = Sampler::new(seed);
        let mut best: Option<RankCertificate> = None;
        for _ in 0..trials.max(1) {
            let params = set.sample(&sc.params, &mut sampler)?;
            let point: Vec<BigRational> = (0..sc.n).map(|_| sampler.rational()).collect();
            let rank = linalg::rank(&sc.coadjoint_matrix_at(&params, &point));
            if best.as_ref().is_none_or(|b| rank > b.rank) {
                best = Some(RankCertificate { rank, n_a: sc.n - rank, trials, params, point });
            }
        }
        Ok(best.expect("at least one trial"))
    }

    /// Rank of `(c_ij^k x_k)` over ℚ(params, x) by exact elimination.
    pub fn symbolic_rank(&self) -> usize {
        let sc = self.specialize();
        let x: Vec<RatFunc> = (1..=sc.n).map(|j| RatFunc::var(Sym::x(j))).collect();
        let m: Vec<Vec<RatFunc>> = (0..sc.n)
            .map(|i| {
                (0..sc.n)
                    .map(|j| (0..sc.n).fold(RatFunc::zero(), |acc, k| acc.add(&sc.c(i, j, k).mul(&x[k]))))
                    .collect()
            })
            .collect();
        linalg::rank(&m)
    }
}

/// Pivot elements met during elimination, before normalization.
fn pivot_values(rows: &[Vec<RatFunc>]) -> Vec<RatFunc> {
    let mut m = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let piv = m[r][c].clone();
        out.push(piv.clone());
        for i in r + 1..m.len() {
            if !m[i][c].is_zero() {
                let f = m[i][c].div(&piv);
                for k in c..cols {
                    let t = m[r][k].mul(&f);
                    m[i][k] = m[i][k].sub(&t);
                }
            }
        }
        r += 1;
    }
    out
}

/// A parameter point on `{p = 0}` when `p` is linear in some parameter.
fn solve_on_locus(p: &Poly, params: &[Sym], set: &AssumptionSet) -> Option<BTreeMap<Sym, BigRational>> {
    let mut sampler = Sampler::new(0x10c5);
    for &v in params {
        if p.degree_in(v) != 1 {
            continue;
        }
        for _ in 0..20 {
            let mut env: BTreeMap<Sym, BigRational> =
                params.iter().filter(|&&s| s != v).map(|&s| (s, sampler.grid_value())).collect();
            env.extend(set.pinned().iter().map(|(k, v)| (*k, v.clone())));
            let uni: Vec<BigRational> =
                p.to_univariate(v).iter().map(|c| c.eval_rational(&env).expect("bound")).collect();
            if uni[1].is_zero() {
                continue;
            }
            env.insert(v, -&uni[0] / &uni[1]);
            return Some(env);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> RatFunc {
        RatFunc::from_int(n)
    }

    fn vec_e(n: usize, terms: &[(usize, RatFunc)]) -> Vec<RatFunc> {
        let mut v = vec![RatFunc::zero(); n];
        for (k, c) in terms {
            v[*k] = c.clone();
        }
        v
    }

    fn a46() -> StructureConstants {
        let (a, b) = (RatFunc::var(Sym::new("a")), RatFunc::var(Sym::new("b")));
        let mut sc = StructureConstants::new(
            4,
            vec![Sym::new("a"), Sym::new("b")],
            vec![Assumption::new(Poly::var(Sym::new("a")), AssumptionKind::Positive)],
        )
        .unwrap();
        sc.set_bracket(0, 3, vec_e(4, &[(0, a.clone())])).unwrap();
        sc.set_bracket(1, 3, vec_e(4, &[(1, b.clone()), (2, r(-1))])).unwrap();
        sc.set_bracket(2, 3, vec_e(4, &[(1, r(1)), (2, b)])).unwrap();
        sc
    }

    #[test]
    fn a46_is_valid_with_rank_two() {
        let sc = a46();
        assert!(sc.validate().unwrap().is_valid());
        let cert = sc.generic_rank(5, 1).unwrap();
        assert_eq!((cert.rank, cert.n_a), (2, 2));
        assert_eq!(sc.symbolic_rank(), 2);
    }

    #[test]
    fn ad_matrices_match_displayed_layout() {
        let sc = a46();
        let m1 = sc.ad_matrix(0).unwrap();
        assert_eq!(m1.get(0, 3), &RatFunc::var(Sym::new("a")));
        let nonzero = (0..4).flat_map(|r| (0..4).map(move |c| (r, c))).filter(|&(r, c)| !m1.get(r, c).is_zero());
        assert_eq!(nonzero.count(), 1);
        let m4 = sc.ad_matrix(3).unwrap();
        let b = RatFunc::var(Sym::new("b"));
        assert_eq!(m4.get(0, 0), &RatFunc::var(Sym::new("a")).neg());
        assert_eq!(m4.get(1, 1), &b.neg());
        assert_eq!(m4.get(1, 2), &r(-1));
        assert_eq!(m4.get(2, 1), &r(1));
        assert_eq!(m4.get(2, 2), &b.neg());
        assert!(m4.get(3, 3).is_zero());
    }

    #[test]
    fn jacobi_failure_is_reported_on_the_bad_triple() {
        let mut sc = StructureConstants::abelian(3);
        sc.set_bracket(0, 1, vec_e(3, &[(2, r(1))])).unwrap();
        sc.set_bracket(0, 2, vec_e(3, &[(2, r(1))])).unwrap();
        sc.set_bracket(1, 2, vec_e(3, &[(0, r(1))])).unwrap();
        let report = sc.validate().unwrap();
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].triple, (0, 1, 2));
    }

    #[test]
    fn abelian_algebra_is_all_center() {
        let sc = StructureConstants::abelian(4);
        assert!(sc.validate().unwrap().is_valid());
        assert_eq!(sc.center().unwrap().len(), 4);
        assert_eq!(sc.generic_rank(5, 0).unwrap().n_a, 4);
        assert!(sc.ad_matrix(2).unwrap().is_zero());
    }

    #[test]
    fn inconsistent_assumptions_are_rejected() {
        let a = Poly::var(Sym::new("a"));
        let list = vec![Assumption::new(a.clone(), AssumptionKind::Zero), Assumption::nonzero(a)];
        assert!(matches!(AssumptionSet::compile(&list), Err(Error::AssumptionInconsistent(_))));
    }

    #[test]
    fn parametric_center_is_detected() {
        // [e1,e2] = a e1: center is trivial unless a = 0.
        let mut sc = StructureConstants::new(2, vec![Sym::new("a")], vec![]).unwrap();
        sc.set_bracket(0, 1, vec_e(2, &[(0, RatFunc::var(Sym::new("a")))])).unwrap();
        assert!(matches!(sc.center(), Err(Error::ParametricCenter(_))));
        sc.add_assumption(Assumption::nonzero(Poly::var(Sym::new("a")))).unwrap();
        assert_eq!(sc.center().unwrap().len(), 0);
    }

    #[test]
    fn decides_sum_of_squares_plus_one() {
        let set = AssumptionSet::default();
        let b = Poly::var(Sym::new("b"));
        let p = b.mul(&b).add(&Poly::one());
        assert!(set.decide_nonzero(&RatFunc::from_poly(p)));
        assert!(!set.decide_nonzero(&RatFunc::from_poly(b)));
    }
}
