//! Expression trees for candidate invariants over the coordinates `x1..xn`.
//!
//! Nodes are built through smart constructors that keep a structural normal
//! form: sums and products are flattened, constants folded, like terms and
//! like powers collected, and `exp(c*ln u)` is rewritten to `u^c`. Constants
//! are elements of ℚ(params), so a parameter is simply a non-rational constant.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

use crate::error::DomainKind;
use crate::poly::{format_rational, Monomial, Poly, RatFunc, Sym};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScalarExpr {
    Var(Sym),
    Const(RatFunc),
    Add(Vec<ScalarExpr>),
    Mul(Vec<ScalarExpr>),
    Pow(Box<ScalarExpr>, RatFunc),
    Exp(Box<ScalarExpr>),
    Ln(Box<ScalarExpr>),
    Atan(Box<ScalarExpr>),
}

/// Internal group-parameter symbol `t_i` (1-based), used while eliminating.
pub fn theta_sym(i: usize) -> Sym {
    Sym::new(&format!("t{i}"))
}

fn is_theta(s: Sym) -> bool {
    s.name().strip_prefix('t').is_some_and(|r| !r.is_empty() && r.bytes().all(|b| b.is_ascii_digit()))
}

/// Coordinates and group parameters are tree variables; everything else in a
/// polynomial is a parameter and stays inside constants.
fn is_tree_var(s: Sym) -> bool {
    s.coordinate_index().is_some() || is_theta(s)
}

fn integer_exponent(e: &RatFunc) -> Option<i32> {
    let q = e.to_rational()?;
    if q.is_integer() {
        q.to_integer().to_i32()
    } else {
        None
    }
}

impl ScalarExpr {
    pub fn constant(c: RatFunc) -> ScalarExpr {
        ScalarExpr::Const(c)
    }

    pub fn int(n: i64) -> ScalarExpr {
        ScalarExpr::Const(RatFunc::from_int(n))
    }

    pub fn rational(q: BigRational) -> ScalarExpr {
        ScalarExpr::Const(RatFunc::from_rational(q))
    }

    pub fn zero() -> ScalarExpr {
        ScalarExpr::int(0)
    }

    pub fn one() -> ScalarExpr {
        ScalarExpr::int(1)
    }

    /// Coordinate `x_j`, 1-based to match its printed name.
    pub fn x(j: usize) -> ScalarExpr {
        ScalarExpr::Var(Sym::x(j))
    }

    pub fn var(s: Sym) -> ScalarExpr {
        if is_tree_var(s) {
            ScalarExpr::Var(s)
        } else {
            ScalarExpr::Const(RatFunc::var(s))
        }
    }

    pub fn param(name: &str) -> ScalarExpr {
        ScalarExpr::Const(RatFunc::var(Sym::new(name)))
    }

    pub fn as_const(&self) -> Option<&RatFunc> {
        match self {
            ScalarExpr::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(RatFunc::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.as_const().is_some_and(RatFunc::is_one)
    }

    pub fn add(&self, o: &ScalarExpr) -> ScalarExpr {
        ScalarExpr::sum(vec![self.clone(), o.clone()])
    }

    pub fn sub(&self, o: &ScalarExpr) -> ScalarExpr {
        ScalarExpr::sum(vec![self.clone(), o.neg()])
    }

    pub fn neg(&self) -> ScalarExpr {
        self.scale(&RatFunc::from_int(-1))
    }

    pub fn scale(&self, c: &RatFunc) -> ScalarExpr {
        ScalarExpr::product(vec![ScalarExpr::Const(c.clone()), self.clone()])
    }

    pub fn mul(&self, o: &ScalarExpr) -> ScalarExpr {
        ScalarExpr::product(vec![self.clone(), o.clone()])
    }

    pub fn div(&self, o: &ScalarExpr) -> ScalarExpr {
        ScalarExpr::product(vec![self.clone(), o.pow(RatFunc::from_int(-1))])
    }

    pub fn powi(&self, e: i64) -> ScalarExpr {
        self.pow(RatFunc::from_int(e))
    }

    pub fn sum(items: Vec<ScalarExpr>) -> ScalarExpr {
        let mut constant = RatFunc::zero();
        let mut collected: BTreeMap<ScalarExpr, RatFunc> = BTreeMap::new();
        let mut stack = items;
        while let Some(t) = stack.pop() {
            match t {
                ScalarExpr::Add(inner) => stack.extend(inner),
                ScalarExpr::Const(c) => constant = constant.add(&c),
                other => {
                    let (c, rest) = split_coefficient(other);
                    let slot = collected.entry(rest).or_insert_with(RatFunc::zero);
                    *slot = slot.add(&c);
                }
            }
        }
        let mut terms: Vec<ScalarExpr> = collected
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(rest, c)| attach_coefficient(c, rest))
            .collect();
        if !constant.is_zero() {
            terms.push(ScalarExpr::Const(constant));
        }
        match terms.len() {
            0 => ScalarExpr::zero(),
            1 => terms.pop().expect("one term"),
            _ => ScalarExpr::Add(terms),
        }
    }

    pub fn product(items: Vec<ScalarExpr>) -> ScalarExpr {
        let mut coeff = RatFunc::one();
        let mut powers: BTreeMap<ScalarExpr, RatFunc> = BTreeMap::new();
        let mut exp_args: Vec<ScalarExpr> = Vec::new();
        let mut stack = items;
        loop {
            while let Some(f) = stack.pop() {
                match f {
                    ScalarExpr::Mul(inner) => stack.extend(inner),
                    ScalarExpr::Const(c) => coeff = coeff.mul(&c),
                    ScalarExpr::Exp(a) => exp_args.push(*a),
                    ScalarExpr::Pow(b, e) => {
                        let slot = powers.entry(*b).or_insert_with(RatFunc::zero);
                        *slot = slot.add(&e);
                    }
                    other => {
                        let slot = powers.entry(other).or_insert_with(RatFunc::zero);
                        *slot = slot.add(&RatFunc::one());
                    }
                }
            }
            if exp_args.is_empty() {
                break;
            }
            let arg = ScalarExpr::sum(std::mem::take(&mut exp_args));
            match ScalarExpr::exp_of(arg) {
                ScalarExpr::Exp(a) => {
                    powers.insert(ScalarExpr::Exp(a), RatFunc::one());
                    break;
                }
                other => stack.push(other),
            }
        }
        if coeff.is_zero() {
            return ScalarExpr::zero();
        }
        let mut factors: Vec<ScalarExpr> = Vec::new();
        for (b, e) in powers {
            if e.is_zero() {
                continue;
            }
            if e.is_one() {
                factors.push(b);
            } else {
                match ScalarExpr::pow_of(b, e) {
                    ScalarExpr::Const(c) => coeff = coeff.mul(&c),
                    p => factors.push(p),
                }
            }
        }
        if factors.is_empty() {
            return ScalarExpr::Const(coeff);
        }
        if factors.len() == 1 {
            if coeff.is_one() {
                return factors.pop().expect("one factor");
            }
            if let ScalarExpr::Add(terms) = &factors[0] {
                return ScalarExpr::sum(terms.iter().map(|t| t.scale(&coeff)).collect());
            }
        }
        if !coeff.is_one() {
            factors.insert(0, ScalarExpr::Const(coeff));
        }
        ScalarExpr::Mul(factors)
    }

    pub fn pow(&self, e: RatFunc) -> ScalarExpr {
        ScalarExpr::pow_of(self.clone(), e)
    }

    fn pow_of(base: ScalarExpr, e: RatFunc) -> ScalarExpr {
        if e.is_zero() {
            return ScalarExpr::one();
        }
        if e.is_one() {
            return base;
        }
        let int = integer_exponent(&e);
        match (base, int) {
            (ScalarExpr::Const(c), Some(i)) if !c.is_zero() || i > 0 => ScalarExpr::Const(c.pow(i)),
            (ScalarExpr::Pow(b, e2), Some(_)) => ScalarExpr::pow_of(*b, e2.mul(&e)),
            (ScalarExpr::Mul(fs), Some(_)) => ScalarExpr::product(fs.into_iter().map(|f| f.pow(e.clone())).collect()),
            (ScalarExpr::Exp(a), _) => ScalarExpr::exp_of(a.scale(&e)),
            (b, _) => ScalarExpr::Pow(Box::new(b), e),
        }
    }

    pub fn exp(&self) -> ScalarExpr {
        ScalarExpr::exp_of(self.clone())
    }

    fn exp_of(arg: ScalarExpr) -> ScalarExpr {
        let terms = match arg {
            ScalarExpr::Const(c) if c.is_zero() => return ScalarExpr::one(),
            ScalarExpr::Add(ts) => ts,
            other => vec![other],
        };
        let mut rest = Vec::new();
        let mut factors = Vec::new();
        for t in terms {
            let (c, body) = split_coefficient(t.clone());
            match body {
                ScalarExpr::Ln(u) => factors.push(ScalarExpr::pow_of(*u, c)),
                _ => rest.push(t),
            }
        }
        if factors.is_empty() {
            return ScalarExpr::Exp(Box::new(ScalarExpr::sum(rest)));
        }
        if !rest.is_empty() {
            factors.push(ScalarExpr::Exp(Box::new(ScalarExpr::sum(rest))));
        }
        ScalarExpr::product(factors)
    }

    pub fn ln(&self) -> ScalarExpr {
        match self {
            ScalarExpr::Const(c) if c.is_one() => ScalarExpr::zero(),
            ScalarExpr::Exp(u) => (**u).clone(),
            other => ScalarExpr::Ln(Box::new(other.clone())),
        }
    }

    pub fn atan(&self) -> ScalarExpr {
        match self {
            ScalarExpr::Const(c) if c.is_zero() => ScalarExpr::zero(),
            // arctan is odd.
            other if split_coefficient(other.clone()).0.is_canonically_negative() => other.neg().atan().neg(),
            other => ScalarExpr::Atan(Box::new(other.clone())),
        }
    }

    /// Polynomial in coordinates with parameter-valued coefficients.
    pub fn from_poly(p: &Poly) -> ScalarExpr {
        let mut groups: BTreeMap<Vec<(Sym, u32)>, Poly> = BTreeMap::new();
        for (m, c) in p.terms() {
            let (tree, rest): (Vec<(Sym, u32)>, Vec<(Sym, u32)>) = m.iter().partition(|(s, _)| is_tree_var(*s));
            let rest: Monomial = rest.into_iter().collect();
            let slot = groups.entry(tree).or_insert_with(Poly::zero);
            *slot = slot.add(&Poly::monomial(rest, c.clone()));
        }
        let terms = groups
            .into_iter()
            .map(|(m, coeff)| {
                let mut fs = vec![ScalarExpr::Const(RatFunc::from_poly(coeff))];
                fs.extend(m.into_iter().map(|(s, e)| ScalarExpr::Var(s).powi(e as i64)));
                ScalarExpr::product(fs)
            })
            .collect();
        ScalarExpr::sum(terms)
    }

    pub fn from_ratfunc(r: &RatFunc) -> ScalarExpr {
        if !r.vars().into_iter().any(is_tree_var) {
            return ScalarExpr::Const(r.clone());
        }
        let den = r.denom();
        if !den.vars().into_iter().any(is_tree_var) {
            let inv = RatFunc::from_poly(den.clone()).inv();
            return ScalarExpr::from_poly(r.numer()).scale(&inv);
        }
        ScalarExpr::from_poly(r.numer()).div(&ScalarExpr::from_poly(den))
    }

    /// The value as an element of ℚ(params, x) when the tree is rational.
    pub fn as_ratfunc(&self) -> Option<RatFunc> {
        match self {
            ScalarExpr::Var(s) => Some(RatFunc::var(*s)),
            ScalarExpr::Const(c) => Some(c.clone()),
            ScalarExpr::Add(ts) => ts.iter().try_fold(RatFunc::zero(), |acc, t| Some(acc.add(&t.as_ratfunc()?))),
            ScalarExpr::Mul(fs) => fs.iter().try_fold(RatFunc::one(), |acc, f| Some(acc.mul(&f.as_ratfunc()?))),
            ScalarExpr::Pow(b, e) => {
                let i = integer_exponent(e)?;
                let b = b.as_ratfunc()?;
                (i >= 0 || !b.is_zero()).then(|| b.pow(i))
            }
            _ => None,
        }
    }

    /// Rebuild the rational fragments as canonical fractions.
    pub fn normalize(&self) -> ScalarExpr {
        if let Some(r) = self.as_ratfunc() {
            return ScalarExpr::from_ratfunc(&r);
        }
        self.map_children(&|c| c.normalize())
    }

    fn map_children(&self, f: &dyn Fn(&ScalarExpr) -> ScalarExpr) -> ScalarExpr {
        match self {
            ScalarExpr::Var(_) | ScalarExpr::Const(_) => self.clone(),
            ScalarExpr::Add(ts) => ScalarExpr::sum(ts.iter().map(f).collect()),
            ScalarExpr::Mul(fs) => ScalarExpr::product(fs.iter().map(f).collect()),
            ScalarExpr::Pow(b, e) => f(b).pow(e.clone()),
            ScalarExpr::Exp(a) => f(a).exp(),
            ScalarExpr::Ln(a) => f(a).ln(),
            ScalarExpr::Atan(a) => f(a).atan(),
        }
    }

    pub fn substitute(&self, s: Sym, value: &ScalarExpr) -> ScalarExpr {
        match self {
            ScalarExpr::Var(v) if *v == s => value.clone(),
            _ => self.map_children(&|c| c.substitute(s, value)),
        }
    }

    /// Substitute rational values for parameters inside constants and
    /// exponents.
    pub fn bind_params(&self, env: &BTreeMap<Sym, BigRational>) -> ScalarExpr {
        match self {
            ScalarExpr::Const(c) => ScalarExpr::Const(c.partial_eval(env).unwrap_or_else(|| c.clone())),
            ScalarExpr::Pow(b, e) => b.bind_params(env).pow(e.partial_eval(env).unwrap_or_else(|| e.clone())),
            _ => self.map_children(&|c| c.bind_params(env)),
        }
    }

    /// Tree variables (coordinates and group parameters).
    pub fn free_vars(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let ScalarExpr::Var(s) = e {
                out.insert(*s);
            }
        });
        out
    }

    /// Parameters appearing in constants or exponents.
    pub fn params(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| match e {
            ScalarExpr::Const(c) | ScalarExpr::Pow(_, c) => out.extend(c.vars()),
            _ => {}
        });
        out
    }

    pub fn max_coordinate(&self) -> usize {
        self.free_vars().iter().filter_map(Sym::coordinate_index).max().unwrap_or(0)
    }

    pub fn depends_on(&self, s: Sym) -> bool {
        self.free_vars().contains(&s)
    }

    pub fn is_transcendental(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| {
            found |= matches!(e, ScalarExpr::Exp(_) | ScalarExpr::Ln(_) | ScalarExpr::Atan(_))
                || matches!(e, ScalarExpr::Pow(_, ex) if integer_exponent(ex).is_none());
        });
        found
    }

    fn visit(&self, f: &mut dyn FnMut(&ScalarExpr)) {
        f(self);
        match self {
            ScalarExpr::Var(_) | ScalarExpr::Const(_) => {}
            ScalarExpr::Add(cs) | ScalarExpr::Mul(cs) => cs.iter().for_each(|c| c.visit(f)),
            ScalarExpr::Pow(a, _) | ScalarExpr::Exp(a) | ScalarExpr::Ln(a) | ScalarExpr::Atan(a) => a.visit(f),
        }
    }

    pub fn node_count(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    /// Exact symbolic derivative with respect to a tree variable.
    pub fn diff(&self, v: Sym) -> ScalarExpr {
        match self {
            ScalarExpr::Var(s) => ScalarExpr::int((*s == v) as i64),
            ScalarExpr::Const(_) => ScalarExpr::zero(),
            ScalarExpr::Add(ts) => ScalarExpr::sum(ts.iter().map(|t| t.diff(v)).collect()),
            ScalarExpr::Mul(fs) => {
                let mut terms = Vec::new();
                for i in 0..fs.len() {
                    let d = fs[i].diff(v);
                    if d.is_zero() {
                        continue;
                    }
                    let mut parts: Vec<ScalarExpr> =
                        fs.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, f)| f.clone()).collect();
                    parts.push(d);
                    terms.push(ScalarExpr::product(parts));
                }
                ScalarExpr::sum(terms)
            }
            ScalarExpr::Pow(b, e) => {
                let d = b.diff(v);
                if d.is_zero() {
                    return ScalarExpr::zero();
                }
                ScalarExpr::product(vec![ScalarExpr::Const(e.clone()), b.pow(e.sub(&RatFunc::one())), d])
            }
            ScalarExpr::Exp(a) => self.mul(&a.diff(v)),
            ScalarExpr::Ln(a) => a.diff(v).div(a),
            ScalarExpr::Atan(a) => {
                let denom = ScalarExpr::one().add(&a.powi(2));
                a.diff(v).div(&denom)
            }
        }
    }

    pub fn eval(&self, env: &dyn Fn(Sym) -> Option<f64>) -> Result<f64, DomainKind> {
        self.eval_with(env, 0.0, &mut None)
    }

    /// Evaluation that rejects divisions by values smaller than `min_den` in
    /// magnitude and optionally records the sign of every divisor.
    pub fn eval_with(
        &self,
        env: &dyn Fn(Sym) -> Option<f64>,
        min_den: f64,
        trace: &mut Option<&mut Vec<bool>>,
    ) -> Result<f64, DomainKind> {
        let konst = |c: &RatFunc| c.eval_f64(env).filter(|v| v.is_finite()).ok_or(DomainKind::Unbound);
        let v = match self {
            ScalarExpr::Var(s) => env(*s).ok_or(DomainKind::Unbound)?,
            ScalarExpr::Const(c) => konst(c)?,
            ScalarExpr::Add(ts) => {
                let mut s = 0.0;
                for t in ts {
                    s += t.eval_with(env, min_den, trace)?;
                }
                s
            }
            ScalarExpr::Mul(fs) => {
                let mut p = 1.0;
                for f in fs {
                    p *= f.eval_with(env, min_den, trace)?;
                }
                p
            }
            ScalarExpr::Pow(b, e) => {
                let base = b.eval_with(env, min_den, trace)?;
                let ev = konst(e)?;
                if ev < 0.0 {
                    if base == 0.0 || base.abs() < min_den {
                        return Err(DomainKind::DivisionByZero);
                    }
                    if let Some(t) = trace.as_deref_mut() {
                        t.push(base > 0.0);
                    }
                }
                match integer_exponent(e) {
                    Some(i) => base.powi(i),
                    None if base < 0.0 => return Err(DomainKind::NegativeBaseRealPower),
                    None => base.powf(ev),
                }
            }
            ScalarExpr::Exp(a) => a.eval_with(env, min_den, trace)?.exp(),
            ScalarExpr::Ln(a) => {
                let u = a.eval_with(env, min_den, trace)?;
                if u <= 0.0 {
                    return Err(DomainKind::LnNonpositive);
                }
                u.ln()
            }
            ScalarExpr::Atan(a) => a.eval_with(env, min_den, trace)?.atan(),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(DomainKind::DivisionByZero)
        }
    }
}

fn split_coefficient(t: ScalarExpr) -> (RatFunc, ScalarExpr) {
    match t {
        ScalarExpr::Mul(mut fs) if matches!(fs.first(), Some(ScalarExpr::Const(_))) => {
            let ScalarExpr::Const(c) = fs.remove(0) else { unreachable!() };
            let rest = if fs.len() == 1 { fs.pop().expect("one factor") } else { ScalarExpr::Mul(fs) };
            (c, rest)
        }
        ScalarExpr::Const(c) => (c, ScalarExpr::one()),
        other => (RatFunc::one(), other),
    }
}

fn attach_coefficient(c: RatFunc, rest: ScalarExpr) -> ScalarExpr {
    if c.is_one() {
        return rest;
    }
    match rest {
        ScalarExpr::Mul(mut fs) => {
            fs.insert(0, ScalarExpr::Const(c));
            ScalarExpr::Mul(fs)
        }
        other => ScalarExpr::Mul(vec![ScalarExpr::Const(c), other]),
    }
}

// ---- printing ----

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_POW: u8 = 3;

fn const_is_atom(c: &RatFunc) -> bool {
    match c.to_rational() {
        Some(q) => q.is_integer() && !q.is_negative(),
        None => c.is_polynomial() && c.numer().num_terms() == 1 && {
            let (m, k) = c.numer().terms().next().expect("one term");
            k.is_one() && m.len() == 1 && m[0].1 == 1
        },
    }
}

fn const_is_negative(c: &RatFunc) -> bool {
    c.is_canonically_negative()
}

/// `-e` when `e` prints with a leading minus, so sums can print `a - b`.
fn negated(e: &ScalarExpr) -> Option<ScalarExpr> {
    match e {
        ScalarExpr::Const(c) if const_is_negative(c) => Some(ScalarExpr::Const(c.neg())),
        ScalarExpr::Mul(fs) => match fs.first() {
            Some(ScalarExpr::Const(c)) if const_is_negative(c) => Some(e.neg()),
            _ => None,
        },
        _ => None,
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &ScalarExpr, ctx: u8) -> fmt::Result {
    match e {
        ScalarExpr::Var(s) => write!(f, "{s}"),
        ScalarExpr::Const(c) => {
            if const_is_atom(c) || (ctx <= PREC_ADD && !c.numer().is_zero()) {
                write!(f, "{c}")
            } else if ctx <= PREC_MUL && c.to_rational().is_some_and(|q| !q.is_negative()) {
                f.write_str(&format_rational(&c.to_rational().expect("rational")))
            } else {
                write!(f, "({c})")
            }
        }
        ScalarExpr::Add(ts) => {
            if ctx > PREC_ADD {
                f.write_str("(")?;
            }
            // Positive terms first reads closer to hand-written formulas.
            let ordered = ts.iter().filter(|t| negated(t).is_none()).chain(ts.iter().filter(|t| negated(t).is_some()));
            for (i, t) in ordered.enumerate() {
                match negated(t) {
                    Some(pos) => {
                        f.write_str(if i == 0 { "-" } else { " - " })?;
                        write_expr(f, &pos, PREC_MUL)?;
                    }
                    None => {
                        if i > 0 {
                            f.write_str(" + ")?;
                        }
                        write_expr(f, t, PREC_ADD + 1)?;
                    }
                }
            }
            if ctx > PREC_ADD {
                f.write_str(")")?;
            }
            Ok(())
        }
        ScalarExpr::Mul(_) | ScalarExpr::Pow(..) => write_product(f, e, ctx),
        ScalarExpr::Exp(a) => write_call(f, "exp", a),
        ScalarExpr::Ln(a) => write_call(f, "ln", a),
        ScalarExpr::Atan(a) => write_call(f, "arctan", a),
    }
}

fn write_call(f: &mut fmt::Formatter<'_>, name: &str, a: &ScalarExpr) -> fmt::Result {
    write!(f, "{name}(")?;
    write_expr(f, a, 0)?;
    f.write_str(")")
}

fn write_power(f: &mut fmt::Formatter<'_>, b: &ScalarExpr, e: &RatFunc) -> fmt::Result {
    write_expr(f, b, PREC_POW + 1)?;
    if e.is_one() {
        return Ok(());
    }
    match e.to_rational() {
        Some(q) if q.is_integer() && q.is_positive() => write!(f, "^{q}"),
        _ => write!(f, "^({e})"),
    }
}

/// Products print as `num/den`, with negative rational powers moved under
/// the bar and a rational coefficient split across both sides.
fn write_product(f: &mut fmt::Formatter<'_>, e: &ScalarExpr, ctx: u8) -> fmt::Result {
    let factors: Vec<ScalarExpr> = match e {
        ScalarExpr::Mul(fs) => fs.clone(),
        other => vec![other.clone()],
    };
    let mut num: Vec<String> = Vec::new();
    let mut den: Vec<String> = Vec::new();
    let mut num_first = String::new();
    for fac in &factors {
        match fac {
            ScalarExpr::Const(c) => match c.to_rational() {
                Some(q) => {
                    let (p, d) = (q.numer().clone(), q.denom().clone());
                    if p.is_negative() {
                        num_first.push('-');
                    }
                    if !p.abs().is_one() {
                        num.push(p.abs().to_string());
                    }
                    if !d.is_one() {
                        den.push(d.to_string());
                    }
                }
                None => num.push(Wrapper(fac, PREC_MUL + 1).to_string()),
            },
            ScalarExpr::Pow(b, ex) if ex.to_rational().is_some_and(|q| q.is_negative()) => {
                den.push(PowWrapper(b, ex.neg()).to_string());
            }
            ScalarExpr::Pow(b, ex) => num.push(PowWrapper(b, ex.clone()).to_string()),
            other => num.push(Wrapper(other, PREC_MUL + 1).to_string()),
        }
    }
    let needs_parens = ctx > PREC_MUL || (ctx == PREC_MUL && !num_first.is_empty());
    if needs_parens {
        f.write_str("(")?;
    }
    f.write_str(&num_first)?;
    if num.is_empty() {
        f.write_str("1")?;
    } else {
        f.write_str(&num.join("*"))?;
    }
    if !den.is_empty() {
        if den.len() == 1 {
            write!(f, "/{}", den[0])?;
        } else {
            write!(f, "/({})", den.join("*"))?;
        }
    }
    if needs_parens {
        f.write_str(")")?;
    }
    Ok(())
}

struct Wrapper<'a>(&'a ScalarExpr, u8);

impl fmt::Display for Wrapper<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self.0, self.1)
    }
}

struct PowWrapper<'a>(&'a ScalarExpr, RatFunc);

impl fmt::Display for PowWrapper<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_power(f, self.0, &self.1)
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, 0)
    }
}

impl fmt::Debug for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarExpr({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(j: usize) -> ScalarExpr {
        ScalarExpr::x(j)
    }

    fn env<'a>(vals: &'a [(&'a str, f64)]) -> impl Fn(Sym) -> Option<f64> + 'a {
        move |s| vals.iter().find(|(n, _)| *n == s.name()).map(|&(_, v)| v)
    }

    #[test]
    fn like_terms_collect() {
        let e = x(1).add(&x(2)).add(&x(1));
        assert_eq!(e, x(1).scale(&RatFunc::from_int(2)).add(&x(2)));
        assert!(x(1).sub(&x(1)).is_zero());
    }

    #[test]
    fn like_powers_collect() {
        let e = x(1).mul(&x(1)).div(&x(1));
        assert_eq!(e, x(1));
    }

    #[test]
    fn exp_of_scaled_log_is_a_power() {
        let c = RatFunc::var(Sym::new("a")).inv().scale(&BigRational::from_integer((-2).into()));
        let e = x(1).ln().scale(&c).exp();
        assert_eq!(e, ScalarExpr::Pow(Box::new(x(1)), c));
    }

    #[test]
    fn derivative_of_absent_variable_is_zero() {
        let f = x(2).powi(2).sub(&x(1).mul(&x(3)).scale(&RatFunc::from_int(2)));
        assert!(f.diff(Sym::x(4)).is_zero());
        assert!(x(1).diff(Sym::x(1)).is_one());
    }

    #[test]
    fn rational_power_of_negative_base_is_a_domain_error() {
        let f = x(1).pow(RatFunc::from_ratio(1, 2));
        assert_eq!(f.eval(&env(&[("x1", -1.0)])), Err(DomainKind::NegativeBaseRealPower));
        assert_eq!(f.eval(&env(&[("x1", 4.0)])), Ok(2.0));
        assert_eq!(x(1).ln().eval(&env(&[("x1", 0.0)])), Err(DomainKind::LnNonpositive));
    }

    #[test]
    fn param_power_evaluates() {
        // x1^b/(x2^2+x3^2)^a at a=1, b=2, x=(2,1,1,0).
        let (a, b) = (RatFunc::var(Sym::new("a")), RatFunc::var(Sym::new("b")));
        let f = x(1).pow(b).div(&x(2).powi(2).add(&x(3).powi(2)).pow(a));
        let v = f.eval(&env(&[("a", 1.0), ("b", 2.0), ("x1", 2.0), ("x2", 1.0), ("x3", 1.0), ("x4", 0.0)])).unwrap();
        assert!((v - 2.0).abs() < 1e-15);
    }

    #[test]
    fn ratfunc_round_trip() {
        let r = RatFunc::new(
            Poly::var(Sym::x(5)).mul(&Poly::var(Sym::x(1))).add(&Poly::var(Sym::x(2)).mul(&Poly::var(Sym::x(3)))),
            Poly::var(Sym::x(1)),
        );
        let e = ScalarExpr::from_ratfunc(&r);
        assert_eq!(e.as_ratfunc().unwrap(), r);
    }

    #[test]
    fn display_is_readable() {
        let f = x(5).add(&x(2).mul(&x(3)).div(&x(1)));
        assert_eq!(f.to_string(), "x5 + x2*x3/x1");
        let g = x(2).powi(2).sub(&x(1).mul(&x(3)).scale(&RatFunc::from_int(2)));
        assert_eq!(g.to_string(), "x2^2 - 2*x1*x3");
        let h = x(1).mul(&x(2).div(&x(1)).neg().exp());
        assert_eq!(h.to_string(), "x1*exp(-x2/x1)");
    }
}
