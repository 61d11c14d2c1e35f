//! Exact sums of `coeff · θ^m · exp(rate·θ) · trig(freq·θ)` over ℚ(params).
//!
//! Every value is kept canonical: zero coefficients are dropped, a zero
//! frequency turns `cos` into the constant atom and kills `sin`, and each
//! frequency vector has its first nonzero component of positive canonical
//! sign (`sin` absorbs the flip). Products of trig atoms are expanded with the
//! product-to-sum identities, so zero testing is syntactic.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::algebra::AssumptionSet;
use crate::error::{Error, Result};
use crate::format::latex_ratfunc;
use crate::poly::{RatFunc, Sym};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Trig {
    One,
    Cos,
    Sin,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermKey {
    pub mono: Vec<u32>,
    pub rate: Vec<RatFunc>,
    pub freq: Vec<RatFunc>,
    pub trig: Trig,
}

impl TermKey {
    fn unit(nvars: usize) -> TermKey {
        TermKey {
            mono: vec![0; nvars],
            rate: vec![RatFunc::zero(); nvars],
            freq: vec![RatFunc::zero(); nvars],
            trig: Trig::One,
        }
    }

    pub fn has_trig(&self) -> bool {
        self.trig != Trig::One
    }

    pub fn has_exp(&self) -> bool {
        self.rate.iter().any(|r| !r.is_zero())
    }

    pub fn is_constant(&self) -> bool {
        self.mono.iter().all(|&m| m == 0) && !self.has_exp() && !self.has_trig()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClosedFormExpr {
    nvars: usize,
    terms: BTreeMap<TermKey, RatFunc>,
}

fn half() -> RatFunc {
    RatFunc::from_ratio(1, 2)
}

fn vec_add(a: &[RatFunc], b: &[RatFunc]) -> Vec<RatFunc> {
    a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
}

fn vec_sub(a: &[RatFunc], b: &[RatFunc]) -> Vec<RatFunc> {
    a.iter().zip(b).map(|(x, y)| x.sub(y)).collect()
}

fn factorial_ratio(m: u32, k: u32) -> BigRational {
    // m! / (m - k)!
    let mut acc = BigInt::one();
    for t in (m - k + 1)..=m {
        acc *= BigInt::from(t);
    }
    BigRational::from_integer(acc)
}

fn binomial(m: u32, k: u32) -> BigRational {
    let mut acc = BigRational::one();
    for t in 0..k {
        acc = acc * BigRational::from_integer(BigInt::from(m - t)) / BigRational::from_integer(BigInt::from(t + 1));
    }
    acc
}

impl ClosedFormExpr {
    pub fn zero(nvars: usize) -> ClosedFormExpr {
        ClosedFormExpr { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: RatFunc) -> ClosedFormExpr {
        let mut out = ClosedFormExpr::zero(nvars);
        out.push(TermKey::unit(nvars), c);
        out
    }

    pub fn one(nvars: usize) -> ClosedFormExpr {
        ClosedFormExpr::constant(nvars, RatFunc::one())
    }

    /// The coordinate `θ_var`.
    pub fn theta(nvars: usize, var: usize) -> ClosedFormExpr {
        let mut key = TermKey::unit(nvars);
        key.mono[var] = 1;
        let mut out = ClosedFormExpr::zero(nvars);
        out.push(key, RatFunc::one());
        out
    }

    /// `exp(rate·θ)`.
    pub fn exp(rate: Vec<RatFunc>) -> ClosedFormExpr {
        let nvars = rate.len();
        let mut key = TermKey::unit(nvars);
        key.rate = rate;
        let mut out = ClosedFormExpr::zero(nvars);
        out.push(key, RatFunc::one());
        out
    }

    pub fn cos(freq: Vec<RatFunc>) -> ClosedFormExpr {
        ClosedFormExpr::trig_atom(freq, Trig::Cos)
    }

    pub fn sin(freq: Vec<RatFunc>) -> ClosedFormExpr {
        ClosedFormExpr::trig_atom(freq, Trig::Sin)
    }

    fn trig_atom(freq: Vec<RatFunc>, trig: Trig) -> ClosedFormExpr {
        let nvars = freq.len();
        let mut key = TermKey::unit(nvars);
        key.freq = freq;
        key.trig = trig;
        let mut out = ClosedFormExpr::zero(nvars);
        out.push(key, RatFunc::one());
        out
    }

    /// Single term `coeff · θ^mono · exp(rate·θ) · trig(freq·θ)`.
    pub fn term(key: TermKey, coeff: RatFunc) -> ClosedFormExpr {
        let mut out = ClosedFormExpr::zero(key.mono.len());
        out.push(key, coeff);
        out
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TermKey, &RatFunc)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The coefficient when the expression is free of θ.
    pub fn as_constant(&self) -> Option<RatFunc> {
        match self.terms.len() {
            0 => Some(RatFunc::zero()),
            1 => {
                let (k, c) = self.terms.iter().next().expect("one term");
                k.is_constant().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn depends_on(&self, var: usize) -> bool {
        self.terms.keys().any(|k| k.mono[var] > 0 || !k.rate[var].is_zero() || !k.freq[var].is_zero())
    }

    pub fn has_trig(&self) -> bool {
        self.terms.keys().any(TermKey::has_trig)
    }

    /// Insert a term after bringing its key to canonical form.
    fn push(&mut self, mut key: TermKey, mut coeff: RatFunc) {
        if coeff.is_zero() {
            return;
        }
        match key.freq.iter().find(|f| !f.is_zero()) {
            None => match key.trig {
                Trig::Sin => return,
                Trig::Cos | Trig::One => key.trig = Trig::One,
            },
            Some(first) => {
                if key.trig == Trig::One {
                    key.freq = vec![RatFunc::zero(); self.nvars];
                } else if first.is_canonically_negative() {
                    key.freq = key.freq.iter().map(RatFunc::neg).collect();
                    if key.trig == Trig::Sin {
                        coeff = coeff.neg();
                    }
                }
            }
        }
        let slot = self.terms.entry(key).or_insert_with(RatFunc::zero);
        *slot = slot.add(&coeff);
        if slot.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    fn check_arity(&self, o: &ClosedFormExpr) -> Result<()> {
        if self.nvars != o.nvars {
            return Err(Error::ArityMismatch { left: self.nvars, right: o.nvars });
        }
        Ok(())
    }

    pub fn try_add(&self, o: &ClosedFormExpr) -> Result<ClosedFormExpr> {
        self.check_arity(o)?;
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.push(k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, o: &ClosedFormExpr) -> Result<ClosedFormExpr> {
        self.check_arity(o)?;
        let mut out = ClosedFormExpr::zero(self.nvars);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &o.terms {
                out.push_product(ka, kb, ca.mul(cb));
            }
        }
        Ok(out)
    }

    /// Panicking variants for callers that construct matching arities.
    pub fn add(&self, o: &ClosedFormExpr) -> ClosedFormExpr {
        self.try_add(o).expect("matching theta arity")
    }

    pub fn mul(&self, o: &ClosedFormExpr) -> ClosedFormExpr {
        self.try_mul(o).expect("matching theta arity")
    }

    pub fn sub(&self, o: &ClosedFormExpr) -> ClosedFormExpr {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> ClosedFormExpr {
        self.scale(&RatFunc::from_int(-1))
    }

    pub fn scale(&self, c: &RatFunc) -> ClosedFormExpr {
        let mut out = ClosedFormExpr::zero(self.nvars);
        if c.is_zero() {
            return out;
        }
        out.terms = self.terms.iter().map(|(k, v)| (k.clone(), v.mul(c))).collect();
        out
    }

    fn push_product(&mut self, ka: &TermKey, kb: &TermKey, c: RatFunc) {
        let mono: Vec<u32> = ka.mono.iter().zip(&kb.mono).map(|(a, b)| a + b).collect();
        let rate = vec_add(&ka.rate, &kb.rate);
        let base = |freq: Vec<RatFunc>, trig: Trig| TermKey { mono: mono.clone(), rate: rate.clone(), freq, trig };
        let (sum, diff) = (vec_add(&ka.freq, &kb.freq), vec_sub(&ka.freq, &kb.freq));
        let h = c.mul(&half());
        match (ka.trig, kb.trig) {
            (Trig::One, t) => self.push(base(kb.freq.clone(), t), c),
            (t, Trig::One) => self.push(base(ka.freq.clone(), t), c),
            (Trig::Cos, Trig::Cos) => {
                self.push(base(diff, Trig::Cos), h.clone());
                self.push(base(sum, Trig::Cos), h);
            }
            (Trig::Sin, Trig::Sin) => {
                self.push(base(diff, Trig::Cos), h.clone());
                self.push(base(sum, Trig::Cos), h.neg());
            }
            (Trig::Sin, Trig::Cos) => {
                self.push(base(sum, Trig::Sin), h.clone());
                self.push(base(diff, Trig::Sin), h);
            }
            (Trig::Cos, Trig::Sin) => {
                self.push(base(sum, Trig::Sin), h.clone());
                self.push(base(diff, Trig::Sin), h.neg());
            }
        }
    }

    /// Exact partial derivative in `θ_var`.
    pub fn diff(&self, var: usize) -> ClosedFormExpr {
        let mut out = ClosedFormExpr::zero(self.nvars);
        for (k, c) in &self.terms {
            let m = k.mono[var];
            if m > 0 {
                let mut key = k.clone();
                key.mono[var] -= 1;
                out.push(key, c.mul(&RatFunc::from_int(m as i64)));
            }
            if !k.rate[var].is_zero() {
                out.push(k.clone(), c.mul(&k.rate[var]));
            }
            let f = &k.freq[var];
            if !f.is_zero() {
                let mut key = k.clone();
                match k.trig {
                    Trig::Cos => {
                        key.trig = Trig::Sin;
                        out.push(key, c.mul(f).neg());
                    }
                    Trig::Sin => {
                        key.trig = Trig::Cos;
                        out.push(key, c.mul(f));
                    }
                    Trig::One => {}
                }
            }
        }
        out
    }

    /// Antiderivative in `θ_var` that vanishes at `θ_var = 0`.
    pub fn integrate(&self, var: usize, assumptions: &AssumptionSet) -> Result<ClosedFormExpr> {
        let mut g = ClosedFormExpr::zero(self.nvars);
        for (k, c) in &self.terms {
            let part = integrate_term(k, c, var, assumptions)?;
            for (kk, cc) in part.terms {
                g.push(kk, cc);
            }
        }
        let at_zero = g.substitute_zero(var);
        Ok(g.sub(&at_zero))
    }

    /// Value at `θ_var = 0`, still a function of the other θ.
    pub fn substitute_zero(&self, var: usize) -> ClosedFormExpr {
        let mut out = ClosedFormExpr::zero(self.nvars);
        for (k, c) in &self.terms {
            if k.mono[var] > 0 {
                continue;
            }
            let mut key = k.clone();
            key.rate[var] = RatFunc::zero();
            key.freq[var] = RatFunc::zero();
            out.push(key, c.clone());
        }
        out
    }

    /// Substitute `θ_var → -θ_var`.
    pub fn negate_var(&self, var: usize) -> ClosedFormExpr {
        let mut out = ClosedFormExpr::zero(self.nvars);
        for (k, c) in &self.terms {
            let mut key = k.clone();
            key.rate[var] = key.rate[var].neg();
            key.freq[var] = key.freq[var].neg();
            let c = if k.mono[var] % 2 == 1 { c.neg() } else { c.clone() };
            out.push(key, c);
        }
        out
    }

    /// Value at `θ = 0` in every variable.
    pub fn at_origin(&self) -> RatFunc {
        self.terms
            .iter()
            .filter(|(k, _)| k.mono.iter().all(|&m| m == 0) && k.trig != Trig::Sin)
            .fold(RatFunc::zero(), |acc, (_, c)| acc.add(c))
    }

    /// Substitute `θ_var → θ_var + θ_other`.
    pub fn shift_sum(&self, var: usize, other: usize) -> ClosedFormExpr {
        let mut out = ClosedFormExpr::zero(self.nvars);
        for (k, c) in &self.terms {
            let m = k.mono[var];
            let mut rate = k.rate.clone();
            rate[other] = rate[other].add(&k.rate[var]);
            let mut freq = k.freq.clone();
            freq[other] = freq[other].add(&k.freq[var]);
            for j in 0..=m {
                let mut mono = k.mono.clone();
                mono[var] = j;
                mono[other] += m - j;
                let key = TermKey { mono, rate: rate.clone(), freq: freq.clone(), trig: k.trig };
                out.push(key, c.mul(&RatFunc::from_rational(binomial(m, j))));
            }
        }
        out
    }

    /// Re-index into `nvars` variables; old variable `i` becomes `map[i]`.
    pub fn embed(&self, nvars: usize, map: &[usize]) -> ClosedFormExpr {
        let mut out = ClosedFormExpr::zero(nvars);
        for (k, c) in &self.terms {
            let mut key = TermKey::unit(nvars);
            key.trig = k.trig;
            for (i, &j) in map.iter().enumerate() {
                key.mono[j] += k.mono[i];
                key.rate[j] = key.rate[j].add(&k.rate[i]);
                key.freq[j] = key.freq[j].add(&k.freq[i]);
            }
            out.push(key, c.clone());
        }
        out
    }

    /// Substitute rational values for symbols inside coefficients, rates and
    /// frequencies. Returns `None` if a coefficient has a pole there.
    pub fn partial_eval(&self, env: &BTreeMap<Sym, BigRational>) -> Option<ClosedFormExpr> {
        let mut out = ClosedFormExpr::zero(self.nvars);
        for (k, c) in &self.terms {
            let key = TermKey {
                mono: k.mono.clone(),
                rate: k.rate.iter().map(|r| r.partial_eval(env)).collect::<Option<_>>()?,
                freq: k.freq.iter().map(|r| r.partial_eval(env)).collect::<Option<_>>()?,
                trig: k.trig,
            };
            out.push(key, c.partial_eval(env)?);
        }
        Some(out)
    }

    pub fn eval_f64(&self, theta: &[f64], env: &dyn Fn(Sym) -> Option<f64>) -> Option<f64> {
        let mut total = 0.0;
        for (k, c) in &self.terms {
            let mut v = c.eval_f64(env)?;
            for (t, &m) in theta.iter().zip(&k.mono) {
                v *= t.powi(m as i32);
            }
            let lin = |w: &[RatFunc]| -> Option<f64> {
                let mut s = 0.0;
                for (r, t) in w.iter().zip(theta) {
                    if !r.is_zero() {
                        s += r.eval_f64(env)? * t;
                    }
                }
                Some(s)
            };
            if k.has_exp() {
                v *= lin(&k.rate)?.exp();
            }
            match k.trig {
                Trig::One => {}
                Trig::Cos => v *= lin(&k.freq)?.cos(),
                Trig::Sin => v *= lin(&k.freq)?.sin(),
            }
            total += v;
        }
        Some(total)
    }
}

/// Complex number over ℚ(params), used for the `e^{(a+ib)θ}` integrals.
#[derive(Clone)]
struct Cplx(RatFunc, RatFunc);

impl Cplx {
    fn mul(&self, o: &Cplx) -> Cplx {
        Cplx(self.0.mul(&o.0).sub(&self.1.mul(&o.1)), self.0.mul(&o.1).add(&self.1.mul(&o.0)))
    }
}

fn integrate_term(k: &TermKey, c: &RatFunc, var: usize, set: &AssumptionSet) -> Result<ClosedFormExpr> {
    let nvars = k.mono.len();
    let m = k.mono[var];
    let (a, b) = (&k.rate[var], &k.freq[var]);
    let mut out = ClosedFormExpr::zero(nvars);
    if a.is_zero() && b.is_zero() {
        let mut key = k.clone();
        key.mono[var] += 1;
        out.push(key, c.div(&RatFunc::from_int(m as i64 + 1)));
        return Ok(out);
    }
    let modulus = a.mul(a).add(&b.mul(b));
    let decided = if b.is_zero() {
        set.decide_nonzero(a)
    } else if a.is_zero() {
        set.decide_nonzero(b)
    } else {
        set.decide_nonzero(a) || set.decide_nonzero(b) || set.decide_nonzero(&modulus)
    };
    if !decided {
        let culprit = if b.is_zero() {
            a
        } else if a.is_zero() {
            b
        } else {
            &modulus
        };
        return Err(Error::UndecidableCaseSplit { polynomial: culprit.numer().to_string() });
    }
    // ∫ θ^m e^{zθ} = e^{zθ} Σ_k (-1)^k m!/(m-k)! θ^{m-k} / z^{k+1},  z = a + ib,
    // and 1/z = (a - ib)/|z|^2.
    let inv = Cplx(a.div(&modulus), b.neg().div(&modulus));
    let mut power = inv.clone();
    for step in 0..=m {
        let sign = if step % 2 == 0 { 1 } else { -1 };
        let f = RatFunc::from_rational(factorial_ratio(m, step)).mul(&RatFunc::from_int(sign)).mul(c);
        let (u, v) = (power.0.mul(&f), power.1.mul(&f));
        let mut key = k.clone();
        key.mono[var] = m - step;
        match k.trig {
            // Re((u + iv) e^{iψ}) = u cos ψ - v sin ψ.
            Trig::One | Trig::Cos => {
                out.push(TermKey { trig: Trig::Cos, ..key.clone() }, u);
                out.push(TermKey { trig: Trig::Sin, ..key }, v.neg());
            }
            // Im((u + iv) e^{iψ}) = u sin ψ + v cos ψ.
            Trig::Sin => {
                out.push(TermKey { trig: Trig::Sin, ..key.clone() }, u);
                out.push(TermKey { trig: Trig::Cos, ..key }, v);
            }
        }
        power = power.mul(&inv);
    }
    Ok(out)
}

fn fmt_linear(f: &mut fmt::Formatter<'_>, w: &[RatFunc]) -> fmt::Result {
    let mut first = true;
    for (i, r) in w.iter().enumerate() {
        if r.is_zero() {
            continue;
        }
        if !first {
            f.write_str(" + ")?;
        }
        first = false;
        if r.is_one() {
            write!(f, "t{}", i + 1)?;
        } else {
            write!(f, "({r})*t{}", i + 1)?;
        }
    }
    Ok(())
}

fn latex_linear(w: &[RatFunc]) -> String {
    let mut out = String::new();
    for (i, r) in w.iter().enumerate().filter(|(_, r)| !r.is_zero()) {
        if !out.is_empty() {
            out.push_str(" + ");
        }
        if r.is_one() {
            out.push_str(&format!("\\theta_{{{}}}", i + 1));
        } else {
            out.push_str(&format!("\\left({}\\right)\\theta_{{{}}}", latex_ratfunc(r), i + 1));
        }
    }
    out
}

impl ClosedFormExpr {
    /// LaTeX with group parameters written `\theta_{t}`.
    pub fn to_latex(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (k, c) in &self.terms {
            let mut factors = Vec::new();
            for (i, &m) in k.mono.iter().enumerate() {
                match m {
                    0 => {}
                    1 => factors.push(format!("\\theta_{{{}}}", i + 1)),
                    _ => factors.push(format!("\\theta_{{{}}}^{{{m}}}", i + 1)),
                }
            }
            if k.has_exp() {
                factors.push(format!("e^{{{}}}", latex_linear(&k.rate)));
            }
            match k.trig {
                Trig::One => {}
                Trig::Cos => factors.push(format!("\\cos\\left({}\\right)", latex_linear(&k.freq))),
                Trig::Sin => factors.push(format!("\\sin\\left({}\\right)", latex_linear(&k.freq))),
            }
            let coeff = if c.is_one() && !factors.is_empty() {
                String::new()
            } else if c.to_rational().is_some() || factors.is_empty() {
                latex_ratfunc(c)
            } else {
                format!("\\left({}\\right)", latex_ratfunc(c))
            };
            let body = factors.join(" ");
            parts.push(match (coeff.as_str(), body.is_empty()) {
                ("-1", false) => format!("-{body}"),
                (_, true) => coeff,
                ("", false) => body,
                (_, false) => format!("{coeff} {body}"),
            });
        }
        parts.join(" + ").replace("+ -", "- ")
    }
}

impl fmt::Display for ClosedFormExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, (k, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({c})")?;
            for (i, &m) in k.mono.iter().enumerate() {
                match m {
                    0 => {}
                    1 => write!(f, "*t{}", i + 1)?,
                    _ => write!(f, "*t{}^{}", i + 1, m)?,
                }
            }
            if k.has_exp() {
                f.write_str("*exp(")?;
                fmt_linear(f, &k.rate)?;
                f.write_str(")")?;
            }
            match k.trig {
                Trig::One => {}
                Trig::Cos => {
                    f.write_str("*cos(")?;
                    fmt_linear(f, &k.freq)?;
                    f.write_str(")")?;
                }
                Trig::Sin => {
                    f.write_str("*sin(")?;
                    fmt_linear(f, &k.freq)?;
                    f.write_str(")")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Assumption, AssumptionKind};
    use crate::poly::Poly;

    fn p(name: &str) -> RatFunc {
        RatFunc::var(Sym::new(name))
    }

    fn one_var(c: RatFunc) -> Vec<RatFunc> {
        vec![c]
    }

    #[test]
    fn cos_squared_is_half_plus_half_cos_double() {
        let c = ClosedFormExpr::cos(one_var(RatFunc::one()));
        let sq = c.mul(&c);
        let expected = ClosedFormExpr::constant(1, half()).add(&ClosedFormExpr::cos(one_var(RatFunc::from_int(2))).scale(&half()));
        assert_eq!(sq, expected);
    }

    #[test]
    fn pythagoras_cancels() {
        let c = ClosedFormExpr::cos(one_var(RatFunc::one()));
        let s = ClosedFormExpr::sin(one_var(RatFunc::one()));
        assert!(c.mul(&c).add(&s.mul(&s)).sub(&ClosedFormExpr::one(1)).is_zero());
    }

    #[test]
    fn rotated_squares_leave_pure_exponential() {
        let e = ClosedFormExpr::exp(one_var(p("b")));
        let c = e.mul(&ClosedFormExpr::cos(one_var(RatFunc::one())));
        let s = e.mul(&ClosedFormExpr::sin(one_var(RatFunc::one())));
        let sum = c.mul(&c).add(&s.mul(&s));
        assert_eq!(sum, ClosedFormExpr::exp(one_var(p("b").scale(&BigRational::from_integer(2.into())))));
    }

    #[test]
    fn negative_frequency_is_folded() {
        let s = ClosedFormExpr::sin(one_var(RatFunc::from_int(-3)));
        assert_eq!(s, ClosedFormExpr::sin(one_var(RatFunc::from_int(3))).neg());
        let c = ClosedFormExpr::cos(one_var(RatFunc::from_int(-3)));
        assert_eq!(c, ClosedFormExpr::cos(one_var(RatFunc::from_int(3))));
    }

    #[test]
    fn distinct_rates_stay_distinct() {
        let d = ClosedFormExpr::exp(one_var(p("a"))).sub(&ClosedFormExpr::exp(one_var(p("b"))));
        assert!(!d.is_zero());
    }

    #[test]
    fn derivative_of_polynomial_times_exponential() {
        let t = ClosedFormExpr::theta(1, 0);
        let f = t.mul(&t).mul(&ClosedFormExpr::exp(one_var(p("a"))));
        let expected = t
            .scale(&RatFunc::from_int(2))
            .add(&t.mul(&t).scale(&p("a")))
            .mul(&ClosedFormExpr::exp(one_var(p("a"))));
        assert_eq!(f.diff(0), expected);
    }

    #[test]
    fn exponential_integral_needs_nonzero_rate() {
        let f = ClosedFormExpr::exp(one_var(p("a")));
        let err = f.integrate(0, &AssumptionSet::default()).unwrap_err();
        assert!(matches!(err, Error::UndecidableCaseSplit { .. }));
        let set = AssumptionSet::compile(&[Assumption::new(Poly::var(Sym::new("a")), AssumptionKind::NonZero)]).unwrap();
        let g = f.integrate(0, &set).unwrap();
        let expected = f.scale(&p("a").inv()).sub(&ClosedFormExpr::constant(1, p("a").inv()));
        assert_eq!(g, expected);
    }

    #[test]
    fn damped_cosine_integral() {
        let b = p("b");
        let f = ClosedFormExpr::exp(one_var(b.clone())).mul(&ClosedFormExpr::cos(one_var(RatFunc::one())));
        let g = f.integrate(0, &AssumptionSet::default()).unwrap();
        let m = b.mul(&b).add(&RatFunc::one());
        let e = ClosedFormExpr::exp(one_var(b.clone()));
        let expected = e
            .mul(&ClosedFormExpr::cos(one_var(RatFunc::one())).scale(&b).add(&ClosedFormExpr::sin(one_var(RatFunc::one()))))
            .scale(&m.inv())
            .sub(&ClosedFormExpr::constant(1, b.div(&m)));
        assert_eq!(g, expected);
        assert_eq!(g.diff(0), f);
    }

    #[test]
    fn monomial_integral() {
        let t = ClosedFormExpr::theta(1, 0);
        let g = t.integrate(0, &AssumptionSet::default()).unwrap();
        assert_eq!(g, t.mul(&t).scale(&half()));
    }

    #[test]
    fn shift_sum_realizes_addition_law() {
        let f = ClosedFormExpr::exp(vec![p("a"), RatFunc::zero()]);
        let g = f.shift_sum(0, 1);
        let expected = f.mul(&ClosedFormExpr::exp(vec![RatFunc::zero(), p("a")]));
        assert_eq!(g, expected);
    }

    #[test]
    fn arity_mismatch_is_an_error() {
        let a = ClosedFormExpr::one(1);
        let b = ClosedFormExpr::one(2);
        assert!(matches!(a.try_add(&b), Err(Error::ArityMismatch { left: 1, right: 2 })));
    }
}
