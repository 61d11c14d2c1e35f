//! Exact multivariate polynomials and rational functions over ℚ.
//!
//! Variables are interned symbols ([`Sym`]). Algebra parameters (`a`, `b`, ...)
//! and dual coordinates (`x1`, `x2`, ...) live in the same variable space, so
//! coefficients of lifted invariants are elements of ℚ(params, x).
//!
//! [`RatFunc`] is kept in a canonical form: numerator and denominator are
//! coprime and the denominator is monic with respect to the lexicographic
//! monomial order. Two rational functions are equal iff their canonical
//! representations are identical, which makes derived `Eq`/`Hash`/`Ord` usable
//! as map keys.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use smallvec::SmallVec;

static INTERNER: Mutex<Option<HashSet<&'static str>>> = Mutex::new(None);

/// Interned variable name. Ordered by the name itself, so iteration order never
/// depends on interning order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sym(&'static str);

impl Sym {
    pub fn new(name: &str) -> Sym {
        let mut guard = INTERNER.lock().expect("interner poisoned");
        let set = guard.get_or_insert_with(HashSet::new);
        if let Some(s) = set.get(name) {
            return Sym(s);
        }
        let leaked: &'static str = Box::leak(name.to_owned().into_boxed_str());
        set.insert(leaked);
        Sym(leaked)
    }

    /// The dual coordinate `x_j` (1-based).
    pub fn x(j: usize) -> Sym {
        Sym::new(&format!("x{j}"))
    }

    pub fn name(&self) -> &'static str {
        self.0
    }

    /// Index `j` if this is the coordinate symbol `x_j`.
    pub fn coordinate_index(&self) -> Option<usize> {
        let rest = self.0.strip_prefix('x')?;
        if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) || rest.starts_with('0') {
            return None;
        }
        rest.parse().ok()
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.0)
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.0)
    }
}

/// Sparse monomial: strictly increasing variables with positive exponents.
pub type Monomial = SmallVec<[(Sym, u32); 4]>;

/// Largest monomial dividing every monomial in `ms`.
fn common_monomial<'a>(mut ms: impl Iterator<Item = &'a Monomial>) -> Monomial {
    let Some(first) = ms.next() else { return Monomial::new() };
    let mut out = first.clone();
    for m in ms {
        out = out
            .iter()
            .filter_map(|&(v, e)| m.iter().find(|(w, _)| *w == v).map(|&(_, f)| (v, e.min(f))))
            .collect();
        if out.is_empty() {
            break;
        }
    }
    out
}

fn mono_mul(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out = Monomial::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                out.push((a[i].0, a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// `a / b` if `b` divides `a` as monomials.
fn mono_div(a: &Monomial, b: &Monomial) -> Option<Monomial> {
    let mut out = Monomial::new();
    let mut j = 0;
    for &(v, e) in a {
        if j < b.len() && b[j].0 < v {
            return None;
        }
        if j < b.len() && b[j].0 == v {
            if b[j].1 > e {
                return None;
            }
            if e > b[j].1 {
                out.push((v, e - b[j].1));
            }
            j += 1;
        } else {
            out.push((v, e));
        }
    }
    if j < b.len() {
        return None;
    }
    Some(out)
}

fn mono_degree_in(m: &Monomial, v: Sym) -> u32 {
    m.iter().find(|(s, _)| *s == v).map_or(0, |&(_, e)| e)
}

fn mono_total_degree(m: &Monomial) -> u32 {
    m.iter().map(|&(_, e)| e).sum()
}

/// Lexicographic order with the smallest symbol most significant.
fn lex_cmp(a: &Monomial, b: &Monomial) -> Ordering {
    let (mut i, mut j) = (0, 0);
    loop {
        match (a.get(i), b.get(j)) {
            (None, None) => return Ordering::Equal,
            (Some(_), None) => return Ordering::Greater,
            (None, Some(_)) => return Ordering::Less,
            (Some(&(va, ea)), Some(&(vb, eb))) => match va.cmp(&vb) {
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
                Ordering::Equal => match ea.cmp(&eb) {
                    Ordering::Equal => {
                        i += 1;
                        j += 1;
                    }
                    other => return other,
                },
            },
        }
    }
}

/// Multivariate polynomial with rational coefficients.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn one() -> Poly {
        Poly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Poly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::new(), c);
        }
        Poly { terms }
    }

    pub fn from_int(c: i64) -> Poly {
        Poly::constant(BigRational::from_integer(BigInt::from(c)))
    }

    pub fn var(s: Sym) -> Poly {
        let mut m = Monomial::new();
        m.push((s, 1));
        Poly::monomial(m, BigRational::one())
    }

    pub fn monomial(m: Monomial, c: BigRational) -> Poly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_empty())
    }

    pub fn is_one(&self) -> bool {
        self.constant_value().is_some_and(|c| c.is_one())
    }

    pub fn constant_value(&self) -> Option<BigRational> {
        if self.is_zero() {
            return Some(BigRational::zero());
        }
        if self.is_constant() {
            return self.terms.values().next().cloned();
        }
        None
    }

    pub fn vars(&self) -> BTreeSet<Sym> {
        self.terms.keys().flat_map(|m| m.iter().map(|&(s, _)| s)).collect()
    }

    pub fn degree_in(&self, v: Sym) -> u32 {
        self.terms.keys().map(|m| mono_degree_in(m, v)).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(mono_total_degree).max().unwrap_or(0)
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect() }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(mono_mul(ma, mb), ca * cb);
            }
        }
        out
    }

    fn mul_monomial(&self, m: &Monomial, c: &BigRational) -> Poly {
        Poly { terms: self.terms.iter().map(|(k, v)| (mono_mul(k, m), v * c)).collect() }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut out = Poly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                out = out.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        out
    }

    /// Leading term under the lexicographic order.
    pub fn leading_term(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().max_by(|a, b| lex_cmp(a.0, b.0))
    }

    pub fn leading_coefficient(&self) -> BigRational {
        self.leading_term().map(|(_, c)| c.clone()).unwrap_or_else(BigRational::zero)
    }

    pub fn derivative(&self, v: Sym) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = mono_degree_in(m, v);
            if e == 0 {
                continue;
            }
            let mut m2 = Monomial::new();
            for &(s, k) in m.iter() {
                if s == v {
                    if k > 1 {
                        m2.push((s, k - 1));
                    }
                } else {
                    m2.push((s, k));
                }
            }
            out.add_term(m2, c * BigRational::from_integer(BigInt::from(e)));
        }
        out
    }

    /// Substitute `v := value`.
    pub fn substitute(&self, v: Sym, value: &Poly) -> Poly {
        if !self.vars().contains(&v) {
            return self.clone();
        }
        let uni = self.to_univariate(v);
        let mut out = Poly::zero();
        for coeff in uni.iter().rev() {
            out = out.mul(value).add(coeff);
        }
        out
    }

    /// Replace the bound symbols by exact rationals, leaving the others free.
    pub fn partial_eval(&self, env: &BTreeMap<Sym, BigRational>) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut c = c.clone();
            let mut rest = Monomial::new();
            for &(s, e) in m.iter() {
                match env.get(&s) {
                    Some(v) => c *= num_traits::pow(v.clone(), e as usize),
                    None => rest.push((s, e)),
                }
            }
            out.add_term(rest, c);
        }
        out
    }

    pub fn eval_rational(&self, env: &BTreeMap<Sym, BigRational>) -> Option<BigRational> {
        self.partial_eval(env).constant_value()
    }

    pub fn eval_f64(&self, env: &dyn Fn(Sym) -> Option<f64>) -> Option<f64> {
        let mut total = 0.0;
        for (m, c) in &self.terms {
            let mut t = c.to_f64()?;
            for &(s, e) in m.iter() {
                t *= env(s)?.powi(e as i32);
            }
            total += t;
        }
        Some(total)
    }

    /// Coefficients as a polynomial in `v`: index = degree.
    pub fn to_univariate(&self, v: Sym) -> Vec<Poly> {
        let mut out: Vec<Poly> = vec![Poly::zero(); self.degree_in(v) as usize + 1];
        for (m, c) in &self.terms {
            let e = mono_degree_in(m, v);
            let rest: Monomial = m.iter().copied().filter(|&(s, _)| s != v).collect();
            out[e as usize].add_term(rest, c.clone());
        }
        out
    }

    pub fn from_univariate(v: Sym, coeffs: &[Poly]) -> Poly {
        let mut out = Poly::zero();
        for (e, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut m = Monomial::new();
            if e > 0 {
                m.push((v, e as u32));
            }
            out = out.add(&c.mul_monomial(&m, &BigRational::one()));
        }
        out
    }

    /// Exact division; `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        assert!(!d.is_zero(), "division by zero polynomial");
        if let Some(c) = d.constant_value() {
            return Some(self.scale(&c.recip()));
        }
        let (lm, lc) = d.leading_term().map(|(m, c)| (m.clone(), c.clone()))?;
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        while let Some((m, c)) = rem.leading_term().map(|(m, c)| (m.clone(), c.clone())) {
            let qm = mono_div(&m, &lm)?;
            let qc = c / &lc;
            rem = rem.sub(&d.mul_monomial(&qm, &qc));
            quot.add_term(qm, qc);
        }
        Some(quot)
    }

    /// Scale so that the lexicographic leading coefficient is 1.
    pub fn monic(&self) -> Poly {
        match self.leading_term() {
            None => Poly::zero(),
            Some((_, c)) => {
                let inv = c.recip();
                self.scale(&inv)
            }
        }
    }

    /// Monic greatest common divisor.
    pub fn gcd(a: &Poly, b: &Poly) -> Poly {
        if a.is_zero() {
            return b.monic();
        }
        if b.is_zero() {
            return a.monic();
        }
        if a.is_constant() || b.is_constant() {
            return Poly::one();
        }
        if a == b {
            return a.monic();
        }
        if a.terms.len() == 1 || b.terms.len() == 1 {
            return Poly::monomial(common_monomial(a.terms.keys().chain(b.terms.keys())), BigRational::one());
        }
        let vars: BTreeSet<Sym> = a.vars().union(&b.vars()).copied().collect();
        let v = *vars.iter().next().expect("non-constant polynomial has a variable");
        let (da, db) = (a.degree_in(v), b.degree_in(v));
        if da == 0 {
            return Poly::gcd(a, &content(&b.to_univariate(v)));
        }
        if db == 0 {
            return Poly::gcd(&content(&a.to_univariate(v)), b);
        }
        let ua = a.to_univariate(v);
        let ub = b.to_univariate(v);
        let ca = content(&ua);
        let cb = content(&ub);
        let c = Poly::gcd(&ca, &cb);
        let pa = divide_coeffs(&ua, &ca);
        let pb = divide_coeffs(&ub, &cb);
        let (mut f, mut g) = if pa.len() >= pb.len() { (pa, pb) } else { (pb, pa) };
        loop {
            let r = prem(&f, &g);
            if r.is_empty() {
                break;
            }
            if r.len() == 1 {
                return c.monic();
            }
            let cr = content(&r);
            f = g;
            g = divide_coeffs(&r, &cr);
        }
        let cg = content(&g);
        let g = divide_coeffs(&g, &cg);
        c.mul(&Poly::from_univariate(v, &g)).monic()
    }

    pub fn fmt_with(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|a, b| {
            mono_total_degree(b.0).cmp(&mono_total_degree(a.0)).then_with(|| lex_cmp(b.0, a.0))
        });
        for (i, (m, c)) in terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            let mut parts: Vec<String> = Vec::new();
            if !abs.is_one() || m.is_empty() {
                parts.push(format_rational(&abs));
            }
            for &(s, e) in m.iter() {
                if e == 1 {
                    parts.push(s.to_string());
                } else {
                    parts.push(format!("{s}^{e}"));
                }
            }
            f.write_str(&parts.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with(f)
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}

pub fn format_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn trim(v: &mut Vec<Poly>) {
    while v.last().is_some_and(|p| p.is_zero()) {
        v.pop();
    }
}

fn content(coeffs: &[Poly]) -> Poly {
    let mut g = Poly::zero();
    for c in coeffs {
        if c.is_zero() {
            continue;
        }
        g = Poly::gcd(&g, c);
        if g.is_constant() {
            return Poly::one();
        }
    }
    if g.is_zero() {
        Poly::one()
    } else {
        g
    }
}

fn divide_coeffs(coeffs: &[Poly], d: &Poly) -> Vec<Poly> {
    coeffs
        .iter()
        .map(|c| c.div_exact(d).expect("content divides every coefficient"))
        .collect()
}

/// Sparse pseudo-remainder of univariate polynomials over ℚ[other vars].
fn prem(f: &[Poly], g: &[Poly]) -> Vec<Poly> {
    let mut r: Vec<Poly> = f.to_vec();
    trim(&mut r);
    let dg = g.len() - 1;
    let lcg = &g[dg];
    while !r.is_empty() && r.len() > dg {
        let dr = r.len() - 1;
        let lcr = r[dr].clone();
        let shift = dr - dg;
        let mut next: Vec<Poly> = r.iter().map(|c| c.mul(lcg)).collect();
        for (k, gk) in g.iter().enumerate() {
            next[k + shift] = next[k + shift].sub(&gk.mul(&lcr));
        }
        trim(&mut next);
        r = next;
    }
    r
}

/// Element of ℚ(vars) in canonical form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl Default for RatFunc {
    fn default() -> Self {
        RatFunc::zero()
    }
}

impl RatFunc {
    pub fn zero() -> RatFunc {
        RatFunc { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> RatFunc {
        RatFunc::from_poly(Poly::one())
    }

    pub fn from_int(c: i64) -> RatFunc {
        RatFunc::from_poly(Poly::from_int(c))
    }

    pub fn from_rational(q: BigRational) -> RatFunc {
        RatFunc::from_poly(Poly::constant(q))
    }

    pub fn from_ratio(n: i64, d: i64) -> RatFunc {
        RatFunc::from_rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn var(s: Sym) -> RatFunc {
        RatFunc::from_poly(Poly::var(s))
    }

    pub fn from_poly(p: Poly) -> RatFunc {
        RatFunc { num: p, den: Poly::one() }
    }

    pub fn new(num: Poly, den: Poly) -> RatFunc {
        assert!(!den.is_zero(), "rational function with zero denominator");
        if num.is_zero() {
            return RatFunc::zero();
        }
        if let Some(c) = den.constant_value() {
            return RatFunc { num: num.scale(&c.recip()), den: Poly::one() };
        }
        let g = Poly::gcd(&num, &den);
        let (num, den) = if g.is_constant() {
            (num, den)
        } else {
            (num.div_exact(&g).expect("gcd divides"), den.div_exact(&g).expect("gcd divides"))
        };
        let lc = den.leading_coefficient().recip();
        RatFunc { num: num.scale(&lc), den: den.scale(&lc) }
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_constant() && self.num == Poly::one()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        if self.is_constant() {
            self.num.constant_value()
        } else {
            None
        }
    }

    pub fn vars(&self) -> BTreeSet<Sym> {
        let mut v = self.num.vars();
        v.extend(self.den.vars());
        v
    }

    /// Sign convention used for canonical trig frequencies: the sign of the
    /// lexicographic leading coefficient of the numerator.
    pub fn is_canonically_negative(&self) -> bool {
        self.num.leading_coefficient().is_negative()
    }

    pub fn add(&self, o: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            if self.den.is_constant() {
                return RatFunc::from_poly(self.num.add(&o.num));
            }
            return RatFunc::new(self.num.add(&o.num), self.den.clone());
        }
        RatFunc::new(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den))
    }

    pub fn sub(&self, o: &RatFunc) -> RatFunc {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn mul(&self, o: &RatFunc) -> RatFunc {
        if self.is_zero() || o.is_zero() {
            return RatFunc::zero();
        }
        if self.den.is_constant() && o.den.is_constant() {
            return RatFunc::from_poly(self.num.mul(&o.num));
        }
        RatFunc::new(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    pub fn scale(&self, c: &BigRational) -> RatFunc {
        RatFunc { num: self.num.scale(c), den: if c.is_zero() { Poly::one() } else { self.den.clone() } }
    }

    pub fn inv(&self) -> RatFunc {
        assert!(!self.is_zero(), "inverse of zero");
        RatFunc::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, o: &RatFunc) -> RatFunc {
        self.mul(&o.inv())
    }

    pub fn pow(&self, e: i32) -> RatFunc {
        if e >= 0 {
            RatFunc { num: self.num.pow(e as u32), den: self.den.pow(e as u32) }
        } else {
            self.inv().pow(-e)
        }
    }

    pub fn derivative(&self, v: Sym) -> RatFunc {
        let n = self.num.derivative(v).mul(&self.den).sub(&self.num.mul(&self.den.derivative(v)));
        RatFunc::new(n, self.den.mul(&self.den))
    }

    pub fn partial_eval(&self, env: &BTreeMap<Sym, BigRational>) -> Option<RatFunc> {
        let den = self.den.partial_eval(env);
        if den.is_zero() {
            return None;
        }
        Some(RatFunc::new(self.num.partial_eval(env), den))
    }

    pub fn substitute(&self, v: Sym, value: &RatFunc) -> RatFunc {
        if !self.vars().contains(&v) {
            return self.clone();
        }
        let sub_poly = |p: &Poly| -> RatFunc {
            let uni = p.to_univariate(v);
            let mut out = RatFunc::zero();
            for c in uni.iter().rev() {
                out = out.mul(value).add(&RatFunc::from_poly(c.clone()));
            }
            out
        };
        sub_poly(&self.num).div(&sub_poly(&self.den))
    }

    pub fn eval_rational(&self, env: &BTreeMap<Sym, BigRational>) -> Option<BigRational> {
        let d = self.den.eval_rational(env)?;
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval_rational(env)? / d)
    }

    pub fn eval_f64(&self, env: &dyn Fn(Sym) -> Option<f64>) -> Option<f64> {
        Some(self.num.eval_f64(env)? / self.den.eval_f64(env)?)
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_constant() {
            return write!(f, "{}", self.num);
        }
        let n = if self.num.num_terms() > 1 { format!("({})", self.num) } else { self.num.to_string() };
        let d = if self.den.num_terms() > 1 || !self.den.terms().all(|(m, c)| m.len() <= 1 && c.is_one()) {
            format!("({})", self.den)
        } else {
            self.den.to_string()
        };
        write!(f, "{n}/{d}")
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatFunc({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Poly {
        Poly::var(Sym::new(s))
    }

    #[test]
    fn gcd_of_shared_factor() {
        let (a, b) = (p("a"), p("b"));
        let f = a.add(&b); // a + b
        let g = a.sub(&b); // a - b
        let x = f.mul(&f).mul(&g);
        let y = f.mul(&g.mul(&g)).mul(&a);
        let d = Poly::gcd(&x, &y);
        assert_eq!(d, f.mul(&g).monic());
    }

    #[test]
    fn ratfunc_cancels_to_canonical_form() {
        let (a, b) = (p("a"), p("b"));
        let num = a.mul(&a).sub(&b.mul(&b));
        let den = a.sub(&b).scale(&BigRational::from_integer(BigInt::from(3)));
        let r = RatFunc::new(num, den);
        assert_eq!(r, RatFunc::from_poly(a.add(&b).scale(&BigRational::new(1.into(), 3.into()))));
    }

    #[test]
    fn sum_of_inverses_normalizes() {
        let a = RatFunc::var(Sym::new("a"));
        let s = a.inv().add(&a.inv()).sub(&RatFunc::from_int(2).div(&a));
        assert!(s.is_zero());
    }

    #[test]
    fn coordinate_symbols() {
        assert_eq!(Sym::x(12).coordinate_index(), Some(12));
        assert_eq!(Sym::new("a").coordinate_index(), None);
        assert_eq!(Sym::new("x0").coordinate_index(), None);
    }

    #[test]
    fn exact_division_rejects_non_divisors() {
        let (a, b) = (p("a"), p("b"));
        assert!(a.mul(&b).add(&Poly::one()).div_exact(&a).is_none());
        assert_eq!(a.mul(&b).div_exact(&b), Some(a));
    }
}
