//! Closed-form `exp(θ M)` for matrices that permute to block upper-triangular
//! form with 1×1 and 2×2 rotation blocks on the diagonal.
//!
//! Diagonal blocks are exponentiated directly; every off-diagonal block comes
//! from variation of parameters,
//! `X_IJ(θ) = E_I(θ) ∫_0^θ E_I(-s) Σ_{K>I} M_IK X_KJ(s) ds`,
//! filled in from the bottom block row upwards.

use std::collections::BTreeMap;
use std::fmt;

use crate::algebra::{AssumptionSet, ParamMatrix};
use crate::closed_form::ClosedFormExpr;
use crate::error::{Error, Result};
use crate::poly::{RatFunc, Sym};

/// Diagonal block of a [`BlockStructure`], indexed by original coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Block {
    /// `e^{λθ}` on index `index`.
    Scalar { index: usize, lambda: RatFunc },
    /// `[[α, -ω], [ω, α]]` on rows/columns `(p, q)`, `p < q`.
    Rotation { p: usize, q: usize, alpha: RatFunc, omega: RatFunc },
}

impl Block {
    pub fn indices(&self) -> Vec<usize> {
        match self {
            Block::Scalar { index, .. } => vec![*index],
            Block::Rotation { p, q, .. } => vec![*p, *q],
        }
    }

    pub fn size(&self) -> usize {
        self.indices().len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockStructure {
    /// Original indices in block order; conjugating by this permutation makes
    /// the matrix block upper-triangular.
    pub order: Vec<usize>,
    pub blocks: Vec<Block>,
}

impl BlockStructure {
    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Block::size).collect()
    }
}

/// Strongly connected components of the off-diagonal pattern, ordered so
/// that every edge `i → j` (`M[i][j] ≠ 0`) points forward.
pub fn block_structure(m: &ParamMatrix) -> Result<BlockStructure> {
    let n = m.rows();
    if n != m.cols() {
        return Err(Error::InvalidArgument("matrix must be square".into()));
    }
    let adj: Vec<Vec<usize>> =
        (0..n).map(|i| (0..n).filter(|&j| j != i && !m.get(i, j).is_zero()).collect()).collect();
    let mut sccs = tarjan(&adj);
    // Tarjan emits sinks first; reverse so dependencies come later.
    sccs.reverse();
    let mut blocks = Vec::new();
    for mut comp in sccs {
        comp.sort_unstable();
        match comp.as_slice() {
            [i] => blocks.push(Block::Scalar { index: *i, lambda: m.get(*i, *i).clone() }),
            [p, q] => {
                let (p, q) = (*p, *q);
                let omega = m.get(q, p).clone();
                if m.get(p, p) != m.get(q, q) || m.get(p, q) != &omega.neg() || omega.is_zero() {
                    return Err(Error::NotBlockTriangularizable { indices: comp.iter().map(|i| i + 1).collect(), size: 2 });
                }
                blocks.push(Block::Rotation { p, q, alpha: m.get(p, p).clone(), omega });
            }
            _ => {
                return Err(Error::NotBlockTriangularizable {
                    indices: comp.iter().map(|i| i + 1).collect(),
                    size: comp.len(),
                })
            }
        }
    }
    let order = blocks.iter().flat_map(Block::indices).collect();
    Ok(BlockStructure { order, blocks })
}

fn tarjan(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    struct State<'a> {
        adj: &'a [Vec<usize>],
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        out: Vec<Vec<usize>>,
    }
    fn visit(s: &mut State<'_>, v: usize) {
        s.index[v] = Some(s.next);
        s.low[v] = s.next;
        s.next += 1;
        s.stack.push(v);
        s.on_stack[v] = true;
        for &w in &s.adj[v] {
            match s.index[w] {
                None => {
                    visit(s, w);
                    s.low[v] = s.low[v].min(s.low[w]);
                }
                Some(iw) if s.on_stack[w] => s.low[v] = s.low[v].min(iw),
                Some(_) => {}
            }
        }
        if Some(s.low[v]) == s.index[v] {
            let mut comp = Vec::new();
            loop {
                let w = s.stack.pop().expect("vertex on stack");
                s.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            s.out.push(comp);
        }
    }
    let n = adj.len();
    let mut s = State {
        adj,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next: 0,
        out: Vec::new(),
    };
    for v in 0..n {
        if s.index[v].is_none() {
            visit(&mut s, v);
        }
    }
    s.out
}

/// Dense matrix of closed forms sharing one θ arity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosedFormMatrix {
    rows: usize,
    cols: usize,
    nvars: usize,
    entries: Vec<ClosedFormExpr>,
}

impl ClosedFormMatrix {
    pub fn zeros(rows: usize, cols: usize, nvars: usize) -> ClosedFormMatrix {
        ClosedFormMatrix { rows, cols, nvars, entries: vec![ClosedFormExpr::zero(nvars); rows * cols] }
    }

    pub fn identity(n: usize, nvars: usize) -> ClosedFormMatrix {
        let mut m = ClosedFormMatrix::zeros(n, n, nvars);
        for i in 0..n {
            m.set(i, i, ClosedFormExpr::one(nvars));
        }
        m
    }

    /// Constant matrix lifted into closed forms.
    pub fn from_param(m: &ParamMatrix, nvars: usize) -> ClosedFormMatrix {
        let mut out = ClosedFormMatrix::zeros(m.rows(), m.cols(), nvars);
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                out.set(r, c, ClosedFormExpr::constant(nvars, m.get(r, c).clone()));
            }
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn get(&self, r: usize, c: usize) -> &ClosedFormExpr {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: ClosedFormExpr) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn map(&self, f: impl Fn(&ClosedFormExpr) -> ClosedFormExpr) -> ClosedFormMatrix {
        let entries: Vec<ClosedFormExpr> = self.entries.iter().map(f).collect();
        let nvars = entries.first().map_or(self.nvars, ClosedFormExpr::nvars);
        ClosedFormMatrix { rows: self.rows, cols: self.cols, nvars, entries }
    }

    pub fn mul(&self, o: &ClosedFormMatrix) -> Result<ClosedFormMatrix> {
        if self.cols != o.rows {
            return Err(Error::InvalidArgument(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        if self.nvars != o.nvars {
            return Err(Error::ArityMismatch { left: self.nvars, right: o.nvars });
        }
        let mut out = ClosedFormMatrix::zeros(self.rows, o.cols, self.nvars);
        for i in 0..self.rows {
            for j in 0..o.cols {
                let mut acc = ClosedFormExpr::zero(self.nvars);
                for k in 0..self.cols {
                    let (a, b) = (self.get(i, k), o.get(k, j));
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc.add(&a.mul(b));
                    }
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn sub(&self, o: &ClosedFormMatrix) -> ClosedFormMatrix {
        let entries = self.entries.iter().zip(&o.entries).map(|(a, b)| a.sub(b)).collect();
        ClosedFormMatrix { rows: self.rows, cols: self.cols, nvars: self.nvars, entries }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(ClosedFormExpr::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.sub(&ClosedFormMatrix::identity(self.rows, self.nvars)).is_zero()
    }

    pub fn diff(&self, var: usize) -> ClosedFormMatrix {
        self.map(|e| e.diff(var))
    }

    pub fn embed(&self, nvars: usize, map: &[usize]) -> ClosedFormMatrix {
        self.map(|e| e.embed(nvars, map))
    }

    /// Determinant by permutation expansion; intended for n ≤ 6.
    pub fn determinant(&self) -> ClosedFormExpr {
        let n = self.rows;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut total = ClosedFormExpr::zero(self.nvars);
        permute(&mut perm, 0, true, &mut |p, even| {
            let mut prod = ClosedFormExpr::one(self.nvars);
            for (i, &j) in p.iter().enumerate() {
                let e = self.get(i, j);
                if e.is_zero() {
                    return;
                }
                prod = prod.mul(e);
            }
            total = if even { total.add(&prod) } else { total.sub(&prod) };
        });
        total
    }

    pub fn eval_f64(&self, theta: &[f64], env: &dyn Fn(Sym) -> Option<f64>) -> Option<Vec<Vec<f64>>> {
        (0..self.rows).map(|r| (0..self.cols).map(|c| self.get(r, c).eval_f64(theta, env)).collect()).collect()
    }

    pub fn partial_eval(&self, env: &BTreeMap<Sym, num_rational::BigRational>) -> Option<ClosedFormMatrix> {
        let entries = self.entries.iter().map(|e| e.partial_eval(env)).collect::<Option<Vec<_>>>()?;
        Some(ClosedFormMatrix { rows: self.rows, cols: self.cols, nvars: self.nvars, entries })
    }
}

fn permute(p: &mut Vec<usize>, k: usize, even: bool, f: &mut dyn FnMut(&[usize], bool)) {
    if k == p.len() {
        f(p, even);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, if i == k { even } else { !even }, f);
        p.swap(k, i);
    }
}

impl fmt::Display for ClosedFormMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self.get(r, c).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// `exp(θ M)` in the single variable θ.
pub fn exp_theta(m: &ParamMatrix, assumptions: &AssumptionSet) -> Result<ClosedFormMatrix> {
    exp_theta_var(m, assumptions, 1, 0)
}

/// `exp(θ_var M)` as a matrix of closed forms in `nvars` variables.
pub fn exp_theta_var(m: &ParamMatrix, assumptions: &AssumptionSet, nvars: usize, var: usize) -> Result<ClosedFormMatrix> {
    let bs = block_structure(m)?;
    let n = m.rows();
    let unit = |v: RatFunc| {
        let mut w = vec![RatFunc::zero(); nvars];
        w[var] = v;
        w
    };
    // E_I(sign·θ) as a small matrix indexed within the block.
    let diag_exp = |b: &Block, sign: i64| -> Vec<Vec<ClosedFormExpr>> {
        let s = RatFunc::from_int(sign);
        match b {
            Block::Scalar { lambda, .. } => vec![vec![ClosedFormExpr::exp(unit(lambda.mul(&s)))]],
            Block::Rotation { alpha, omega, .. } => {
                let e = ClosedFormExpr::exp(unit(alpha.mul(&s)));
                let c = e.mul(&ClosedFormExpr::cos(unit(omega.mul(&s))));
                let sn = e.mul(&ClosedFormExpr::sin(unit(omega.mul(&s))));
                vec![vec![c.clone(), sn.neg()], vec![sn, c]]
            }
        }
    };
    let nb = bs.blocks.len();
    let idx: Vec<Vec<usize>> = bs.blocks.iter().map(Block::indices).collect();
    let mut x = ClosedFormMatrix::zeros(n, n, nvars);
    for j in 0..nb {
        let ej = diag_exp(&bs.blocks[j], 1);
        for (a, &r) in idx[j].iter().enumerate() {
            for (b, &c) in idx[j].iter().enumerate() {
                x.set(r, c, ej[a][b].clone());
            }
        }
        for i in (0..j).rev() {
            // Σ_{K>I} M_IK X_KJ on the rows of block I and columns of block J.
            let mut forcing = vec![vec![ClosedFormExpr::zero(nvars); idx[j].len()]; idx[i].len()];
            for (a, &r) in idx[i].iter().enumerate() {
                for (b, &c) in idx[j].iter().enumerate() {
                    let mut acc = ClosedFormExpr::zero(nvars);
                    for k in i + 1..=j {
                        for &t in &idx[k] {
                            let mij = m.get(r, t);
                            if !mij.is_zero() && !x.get(t, c).is_zero() {
                                acc = acc.add(&x.get(t, c).scale(mij));
                            }
                        }
                    }
                    forcing[a][b] = acc;
                }
            }
            if forcing.iter().flatten().all(ClosedFormExpr::is_zero) {
                continue;
            }
            let inv = diag_exp(&bs.blocks[i], -1);
            let ei = diag_exp(&bs.blocks[i], 1);
            let size_i = idx[i].len();
            let mut integral = vec![vec![ClosedFormExpr::zero(nvars); idx[j].len()]; size_i];
            for a in 0..size_i {
                for b in 0..idx[j].len() {
                    let mut integrand = ClosedFormExpr::zero(nvars);
                    for (t, row) in forcing.iter().enumerate() {
                        integrand = integrand.add(&inv[a][t].mul(&row[b]));
                    }
                    integral[a][b] = integrand.integrate(var, assumptions)?;
                }
            }
            for (a, &r) in idx[i].iter().enumerate() {
                for (b, &c) in idx[j].iter().enumerate() {
                    let mut acc = ClosedFormExpr::zero(nvars);
                    for t in 0..size_i {
                        acc = acc.add(&ei[a][t].mul(&integral[t][b]));
                    }
                    x.set(r, c, acc);
                }
            }
        }
    }
    Ok(x)
}

/// Scaling-and-squaring Taylor evaluation of `exp(θ M)`.
pub fn exp_numeric(m: &[Vec<f64>], theta: f64) -> Vec<Vec<f64>> {
    let n = m.len();
    let a: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(|v| v * theta).collect()).collect();
    let norm = a.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let a: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|v| v * scale).collect()).collect();
    let mut result = identity_f64(n);
    let mut term = identity_f64(n);
    for k in 1..=30 {
        term = matmul_f64(&term, &a);
        let inv_k = 1.0 / k as f64;
        term.iter_mut().flatten().for_each(|v| *v *= inv_k);
        let mut small = true;
        for (r, t) in result.iter_mut().flatten().zip(term.iter().flatten()) {
            *r += t;
            small &= t.abs() <= f64::EPSILON * r.abs().max(1e-300);
        }
        if small {
            break;
        }
    }
    for _ in 0..squarings {
        result = matmul_f64(&result, &result);
    }
    result
}

pub fn identity_f64(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

pub fn matmul_f64(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (n, k, m) = (a.len(), b.len(), b.first().map_or(0, Vec::len));
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for t in 0..k {
            let v = a[i][t];
            if v == 0.0 {
                continue;
            }
            for j in 0..m {
                out[i][j] += v * b[t][j];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::StructureConstants;

    fn a46() -> StructureConstants {
        let (a, b) = (RatFunc::var(Sym::new("a")), RatFunc::var(Sym::new("b")));
        let mut sc = StructureConstants::new(4, vec![Sym::new("a"), Sym::new("b")], vec![]).unwrap();
        let z = RatFunc::zero;
        sc.set_bracket(0, 3, vec![a, z(), z(), z()]).unwrap();
        sc.set_bracket(1, 3, vec![z(), b.clone(), RatFunc::from_int(-1), z()]).unwrap();
        sc.set_bracket(2, 3, vec![z(), RatFunc::one(), b, z()]).unwrap();
        sc
    }

    #[test]
    fn a46_e4_blocks() {
        let bs = block_structure(&a46().ad_matrix(3).unwrap()).unwrap();
        let mut sizes = bs.sizes();
        sizes.sort();
        assert_eq!(sizes, vec![1, 1, 2]);
        assert!(bs.blocks.iter().any(|b| matches!(b, Block::Rotation { p: 1, q: 2, .. })));
    }

    #[test]
    fn zero_matrix_exponentiates_to_identity() {
        let m = ParamMatrix::zeros(3, 3);
        assert_eq!(block_structure(&m).unwrap().sizes(), vec![1, 1, 1]);
        assert!(exp_theta(&m, &AssumptionSet::default()).unwrap().is_identity());
    }

    #[test]
    fn solves_the_defining_ode() {
        let sc = a46();
        let set = AssumptionSet::default();
        for i in 0..4 {
            let m = sc.ad_matrix(i).unwrap().neg();
            let x = exp_theta(&m, &set).unwrap();
            let mx = ClosedFormMatrix::from_param(&m, 1).mul(&x).unwrap();
            assert!(x.diff(0).sub(&mx).is_zero(), "ad e{}", i + 1);
            assert!(x.map(|e| ClosedFormExpr::constant(1, e.at_origin())).is_identity());
        }
    }

    #[test]
    fn three_cycle_is_rejected() {
        let mut m = ParamMatrix::zeros(3, 3);
        m.set(0, 1, RatFunc::one());
        m.set(1, 2, RatFunc::one());
        m.set(2, 0, RatFunc::one());
        assert!(matches!(block_structure(&m), Err(Error::NotBlockTriangularizable { size: 3, .. })));
    }

    #[test]
    fn numeric_exponential_of_nilpotent() {
        let mut m = vec![vec![0.0; 3]; 3];
        m[0][1] = 1.0;
        m[1][2] = 1.0;
        let e = exp_numeric(&m, 2.0);
        assert!((e[0][2] - 2.0).abs() < 1e-14);
        assert!((e[0][1] - 2.0).abs() < 1e-14);
    }
}
