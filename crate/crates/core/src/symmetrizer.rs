//! Symmetrization of commutative invariants into elements written in
//! non-commuting basis symbols `e1, e2, ...`.
//!
//! Each monomial `e_{i1}...e_{ir}` is replaced by the average of its `r!`
//! orderings. Rational parts with monomial denominators are first expanded
//! term by term, so `x5 + x2*x3/x1` becomes `e5 + (e2*e3+e3*e2)/(2*e1)`.
//! Denominators stay commutative. Arguments of `exp`, `ln`, `arctan` and of
//! fractional powers are symmetrized the same way, and the result is then
//! marked formal.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::poly::{Monomial, Poly, RatFunc, Sym};
use crate::scalar::ScalarExpr;

/// Linear combination of words in the basis symbols. Letters are the 1-based
/// indices of `e_j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct NCPolynomial {
    terms: BTreeMap<Vec<usize>, RatFunc>,
}

impl NCPolynomial {
    pub fn zero() -> NCPolynomial {
        NCPolynomial::default()
    }

    pub fn word(word: Vec<usize>, coeff: RatFunc) -> NCPolynomial {
        let mut p = NCPolynomial::zero();
        p.push(word, coeff);
        p
    }

    fn push(&mut self, word: Vec<usize>, coeff: RatFunc) {
        if coeff.is_zero() {
            return;
        }
        let sum = match self.terms.remove(&word) {
            Some(c) => c.add(&coeff),
            None => coeff,
        };
        if !sum.is_zero() {
            self.terms.insert(word, sum);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &RatFunc)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, word: &[usize]) -> RatFunc {
        self.terms.get(word).cloned().unwrap_or_else(RatFunc::zero)
    }

    pub fn add(&self, o: &NCPolynomial) -> NCPolynomial {
        let mut out = self.clone();
        for (w, c) in &o.terms {
            out.push(w.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &RatFunc) -> NCPolynomial {
        let mut out = NCPolynomial::zero();
        for (w, v) in &self.terms {
            out.push(w.clone(), v.mul(c));
        }
        out
    }

    /// Symmetrizes every word.
    pub fn symmetrize(&self) -> NCPolynomial {
        self.terms.iter().fold(NCPolynomial::zero(), |acc, (w, c)| acc.add(&symmetrize_monomial(w).scale(c)))
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetrize() == *self
    }

    /// Reading with commuting symbols: `e_j ↦ x_j`.
    pub fn collapse(&self) -> RatFunc {
        self.terms.iter().fold(RatFunc::zero(), |acc, (w, c)| acc.add(&RatFunc::from_poly(word_poly(w)).mul(c)))
    }

    /// Words grouped by their sorted letters; within a group produced by
    /// symmetrization all coefficients agree.
    fn orbits(&self) -> Vec<(Vec<usize>, Vec<(&Vec<usize>, &RatFunc)>)> {
        let mut groups: BTreeMap<Vec<usize>, Vec<(&Vec<usize>, &RatFunc)>> = BTreeMap::new();
        for (w, c) in &self.terms {
            let mut key = w.clone();
            key.sort_unstable();
            groups.entry(key).or_default().push((w, c));
        }
        groups.into_iter().collect()
    }
}

/// Average of all orderings of `word`, with repeated orderings merged.
pub fn symmetrize_monomial(word: &[usize]) -> NCPolynomial {
    let mut sorted = word.to_vec();
    sorted.sort_unstable();
    let perms = distinct_permutations(&sorted);
    let weight = BigRational::new(BigInt::one(), BigInt::from(perms.len()));
    let mut out = NCPolynomial::zero();
    for p in perms {
        out.push(p, RatFunc::from_rational(weight.clone()));
    }
    out
}

/// Distinct permutations of a sorted multiset, in lexicographic order.
fn distinct_permutations(sorted: &[usize]) -> Vec<Vec<usize>> {
    let mut cur = sorted.to_vec();
    let mut out = vec![cur.clone()];
    loop {
        let Some(i) = (1..cur.len()).rev().find(|&i| cur[i - 1] < cur[i]) else { return out };
        let j = (i..cur.len()).rev().find(|&j| cur[j] > cur[i - 1]).expect("successor exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

/// A rational piece `numerator / denominator` with a commutative denominator.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTerm {
    pub numerator: NCPolynomial,
    pub denominator: Poly,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SymExpr {
    /// Sum of rational pieces, one per distinct denominator.
    Rational(Vec<SymTerm>),
    Const(RatFunc),
    Add(Vec<SymExpr>),
    Mul(Vec<SymExpr>),
    Pow(Box<SymExpr>, RatFunc),
    Exp(Box<SymExpr>),
    Ln(Box<SymExpr>),
    Atan(Box<SymExpr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrizedInvariant {
    pub expr: SymExpr,
    /// Set when an ordering-sensitive product sits inside a transcendental
    /// function or a fractional power, where symmetrization is notational.
    pub formal: bool,
    pub original: ScalarExpr,
}

impl SymmetrizedInvariant {
    /// Whether any word needed reordering, i.e. symmetrization did more
    /// than rename `x_j` to `e_j`.
    pub fn is_nontrivial(&self) -> bool {
        fn walk(e: &SymExpr) -> bool {
            match e {
                SymExpr::Rational(ts) => ts.iter().any(|t| t.numerator.num_terms() > t.numerator.orbits().len()),
                SymExpr::Const(_) => false,
                SymExpr::Add(xs) | SymExpr::Mul(xs) => xs.iter().any(walk),
                SymExpr::Pow(b, _) => walk(b),
                SymExpr::Exp(a) | SymExpr::Ln(a) | SymExpr::Atan(a) => walk(a),
            }
        }
        walk(&self.expr)
    }

    /// The commutative reading, which equals the original function.
    pub fn collapse(&self) -> ScalarExpr {
        collapse(&self.expr)
    }

    /// Every numerator polynomial in the expression, in display order.
    pub fn numerators(&self) -> Vec<&NCPolynomial> {
        fn walk<'a>(e: &'a SymExpr, out: &mut Vec<&'a NCPolynomial>) {
            match e {
                SymExpr::Rational(ts) => out.extend(ts.iter().map(|t| &t.numerator)),
                SymExpr::Const(_) => {}
                SymExpr::Add(xs) | SymExpr::Mul(xs) => xs.iter().for_each(|x| walk(x, out)),
                SymExpr::Pow(b, _) => walk(b, out),
                SymExpr::Exp(a) | SymExpr::Ln(a) | SymExpr::Atan(a) => walk(a, out),
            }
        }
        let mut out = Vec::new();
        walk(&self.expr, &mut out);
        out
    }

    pub fn to_latex(&self) -> String {
        latex(&self.expr, 0)
    }
}

fn collapse(e: &SymExpr) -> ScalarExpr {
    match e {
        SymExpr::Rational(ts) => ScalarExpr::sum(
            ts.iter()
                .map(|t| {
                    let num = ScalarExpr::from_ratfunc(&t.numerator.collapse());
                    num.div(&ScalarExpr::from_poly(&t.denominator))
                })
                .collect(),
        ),
        SymExpr::Const(c) => ScalarExpr::constant(c.clone()),
        SymExpr::Add(xs) => ScalarExpr::sum(xs.iter().map(collapse).collect()),
        SymExpr::Mul(xs) => ScalarExpr::product(xs.iter().map(collapse).collect()),
        SymExpr::Pow(b, x) => collapse(b).pow(x.clone()),
        SymExpr::Exp(a) => collapse(a).exp(),
        SymExpr::Ln(a) => collapse(a).ln(),
        SymExpr::Atan(a) => collapse(a).atan(),
    }
}

fn is_coordinate(s: Sym) -> bool {
    s.coordinate_index().is_some()
}

/// Splits a monomial into its coordinate word and its parameter part.
fn split_monomial(m: &Monomial) -> (Vec<usize>, Monomial) {
    let mut word = Vec::new();
    let mut rest = Monomial::new();
    for &(s, e) in m.iter() {
        match s.coordinate_index() {
            Some(j) => word.extend(std::iter::repeat_n(j, e as usize)),
            None => rest.push((s, e)),
        }
    }
    word.sort_unstable();
    (word, rest)
}

/// `p = c · m` with `c` free of coordinates and `m` a coordinate monomial.
fn as_scaled_monomial(p: &Poly) -> Option<(Poly, Vec<usize>)> {
    let mut word = None;
    let mut coeff = Poly::zero();
    for (m, c) in p.terms() {
        let (w, rest) = split_monomial(m);
        if word.get_or_insert_with(|| w.clone()) != &w {
            return None;
        }
        coeff = coeff.add(&Poly::monomial(rest, c.clone()));
    }
    Some((coeff, word.unwrap_or_default()))
}

fn word_poly(word: &[usize]) -> Poly {
    word.iter().fold(Poly::one(), |m, &j| m.mul(&Poly::var(Sym::x(j))))
}

/// Removes from `word` the letters of `den`, returning what is left of each.
fn cancel(word: &[usize], den: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut num = word.to_vec();
    let mut rest = Vec::new();
    for &d in den {
        match num.iter().position(|&j| j == d) {
            Some(i) => {
                num.remove(i);
            }
            None => rest.push(d),
        }
    }
    (num, rest)
}

fn symmetrize_poly(p: &Poly) -> NCPolynomial {
    p.terms().fold(NCPolynomial::zero(), |acc, (m, c)| {
        let (word, rest) = split_monomial(m);
        let coeff = RatFunc::from_poly(Poly::monomial(rest, c.clone()));
        acc.add(&symmetrize_monomial(&word).scale(&coeff))
    })
}

fn rational_slot(r: &RatFunc) -> SymExpr {
    match as_scaled_monomial(r.denom()) {
        Some((dc, dword)) => {
            // Expand over the monomial denominator and cancel letter by letter.
            let dc = RatFunc::from_poly(dc);
            let mut by_den: BTreeMap<Vec<usize>, NCPolynomial> = BTreeMap::new();
            for (m, c) in r.numer().terms() {
                let (word, rest) = split_monomial(m);
                let (num, den) = cancel(&word, &dword);
                let coeff = RatFunc::from_poly(Poly::monomial(rest, c.clone())).div(&dc);
                let slot = by_den.entry(den).or_default();
                *slot = slot.add(&symmetrize_monomial(&num).scale(&coeff));
            }
            SymExpr::Rational(
                by_den
                    .into_iter()
                    .filter(|(_, n)| !n.is_zero())
                    .map(|(den, numerator)| SymTerm { numerator, denominator: word_poly(&den) })
                    .collect(),
            )
        }
        None => SymExpr::Rational(vec![SymTerm { numerator: symmetrize_poly(r.numer()), denominator: r.denom().clone() }]),
    }
}

fn mixes_symbols(e: &ScalarExpr) -> bool {
    e.free_vars().into_iter().filter(|&s| is_coordinate(s)).count() >= 2
}

fn build(e: &ScalarExpr, formal: &mut bool) -> SymExpr {
    if let Some(r) = e.as_ratfunc() {
        if r.vars().iter().any(|&s| is_coordinate(s)) {
            return rational_slot(&r);
        }
        return SymExpr::Const(r);
    }
    let inner = |a: &ScalarExpr, formal: &mut bool| {
        if mixes_symbols(a) {
            *formal = true;
        }
        Box::new(build(a, formal))
    };
    match e {
        ScalarExpr::Add(ts) => {
            // Collect the rational summands into a single slot.
            let (rat, other): (Vec<&ScalarExpr>, Vec<&ScalarExpr>) = ts.iter().partition(|t| t.as_ratfunc().is_some());
            let mut parts = Vec::new();
            if !rat.is_empty() {
                parts.push(build(&ScalarExpr::sum(rat.into_iter().cloned().collect()), formal));
            }
            parts.extend(other.into_iter().map(|t| build(t, formal)));
            if parts.len() == 1 {
                parts.pop().expect("one part")
            } else {
                SymExpr::Add(parts)
            }
        }
        ScalarExpr::Mul(fs) => {
            let (rat, other): (Vec<&ScalarExpr>, Vec<&ScalarExpr>) = fs.iter().partition(|t| t.as_ratfunc().is_some());
            let mut parts = Vec::new();
            if !rat.is_empty() {
                parts.push(build(&ScalarExpr::product(rat.into_iter().cloned().collect()), formal));
            }
            parts.extend(other.into_iter().map(|t| build(t, formal)));
            if parts.len() == 1 {
                parts.pop().expect("one part")
            } else {
                SymExpr::Mul(parts)
            }
        }
        ScalarExpr::Pow(b, x) => SymExpr::Pow(inner(b, formal), x.clone()),
        ScalarExpr::Exp(a) => SymExpr::Exp(inner(a, formal)),
        ScalarExpr::Ln(a) => SymExpr::Ln(inner(a, formal)),
        ScalarExpr::Atan(a) => SymExpr::Atan(inner(a, formal)),
        ScalarExpr::Var(_) | ScalarExpr::Const(_) => unreachable!("rational leaves handled above"),
    }
}

pub fn symmetrize(f: &ScalarExpr) -> SymmetrizedInvariant {
    let mut formal = false;
    let expr = build(f, &mut formal);
    SymmetrizedInvariant { expr, formal, original: f.clone() }
}

// ---- text output ----

fn word_text(word: &[usize], sep: &str, latex: bool) -> String {
    let mut parts = Vec::new();
    let mut i = 0;
    while i < word.len() {
        let j = word[i];
        let mut k = i;
        while k < word.len() && word[k] == j {
            k += 1;
        }
        let run = k - i;
        let sym = if latex { format!("e_{{{j}}}") } else { format!("e{j}") };
        parts.push(match (run, latex) {
            (1, _) => sym,
            (_, true) => format!("{sym}^{{{run}}}"),
            (_, false) => format!("{sym}^{run}"),
        });
        i = k;
    }
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join(sep)
    }
}

fn poly_text(p: &Poly) -> String {
    let s = p.to_string();
    let chars: Vec<char> = s.chars().collect();
    let mut out = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let after_ident = i > 0 && (chars[i - 1].is_alphanumeric() || chars[i - 1] == '_');
        if c == 'x' && !after_ident && chars.get(i + 1).is_some_and(char::is_ascii_digit) {
            out.push('e');
        } else {
            out.push(c);
        }
    }
    out
}

/// One orbit printed as `±[p*](w1+w2+...)[/(q*D)]`; returns (negative, body).
fn orbit_text(words: &[(&Vec<usize>, &RatFunc)], den: &Poly) -> (bool, String) {
    let c = words[0].1;
    let uniform = words.iter().all(|(_, v)| *v == c);
    let (neg, num_coeff, den_coeff) = match c.to_rational().filter(|_| uniform) {
        Some(q) => (q.is_negative(), q.numer().abs(), q.denom().clone()),
        None => (false, BigInt::zero(), BigInt::zero()),
    };
    if !uniform || num_coeff.is_zero() {
        // Coefficients involving parameters: print the words individually.
        let parts: Vec<String> = words.iter().map(|(w, v)| format!("({v})*{}", word_text(w, "*", false))).collect();
        let body = format!("({})", parts.join("+"));
        return (false, with_denominator(body, &BigInt::one(), den));
    }
    let sum = words.iter().map(|(w, _)| word_text(w, "*", false)).collect::<Vec<_>>().join("+");
    let single = words.len() == 1;
    let mut body = if single { sum } else { format!("({sum})") };
    if !num_coeff.is_one() {
        body = format!("{num_coeff}*{body}");
    }
    (neg, with_denominator(body, &den_coeff, den))
}

fn with_denominator(body: String, q: &BigInt, den: &Poly) -> String {
    let den_is_one = den.is_one();
    let den_s = poly_text(den);
    let den_simple = den.num_terms() == 1 && !den_s.contains('*');
    match (q.is_one(), den_is_one) {
        (true, true) => body,
        (true, false) if den_simple => format!("{body}/{den_s}"),
        (true, false) => format!("{body}/({den_s})"),
        (false, true) => format!("{body}/{q}"),
        (false, false) if den.num_terms() == 1 => format!("{body}/({q}*{den_s})"),
        (false, false) => format!("{body}/({q}*({den_s}))"),
    }
}

fn rational_text(ts: &[SymTerm]) -> String {
    let mut pieces: Vec<(bool, String)> = Vec::new();
    // Polynomial part first, then by growing denominator.
    let mut order: Vec<&SymTerm> = ts.iter().collect();
    order.sort_by_key(|t| (!t.denominator.is_one(), t.denominator.total_degree()));
    for t in order {
        for (_, words) in t.numerator.orbits() {
            pieces.push(orbit_text(&words, &t.denominator));
        }
    }
    join_signed(pieces)
}

fn join_signed(mut pieces: Vec<(bool, String)>) -> String {
    pieces.sort_by_key(|(neg, _)| *neg);
    let mut out = String::new();
    for (i, (neg, s)) in pieces.into_iter().enumerate() {
        match (i, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        out.push_str(&s);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

fn needs_parens(e: &SymExpr) -> bool {
    match e {
        SymExpr::Add(_) => true,
        SymExpr::Rational(ts) => ts.iter().map(|t| t.numerator.orbits().len()).sum::<usize>() > 1 || text(e).starts_with('-'),
        SymExpr::Const(c) => !c.is_polynomial() || c.numer().num_terms() > 1 || c.is_canonically_negative(),
        _ => false,
    }
}

fn text(e: &SymExpr) -> String {
    match e {
        SymExpr::Rational(ts) => rational_text(ts),
        SymExpr::Const(c) => c.to_string(),
        SymExpr::Add(xs) => {
            let pieces = xs
                .iter()
                .map(|x| {
                    let s = text(x);
                    match s.strip_prefix('-') {
                        Some(rest) if !matches!(x, SymExpr::Add(_)) => (true, rest.to_string()),
                        _ => (false, s),
                    }
                })
                .collect();
            join_signed(pieces)
        }
        SymExpr::Mul(xs) => xs
            .iter()
            .map(|x| if needs_parens(x) { format!("({})", text(x)) } else { text(x) })
            .collect::<Vec<_>>()
            .join("*"),
        SymExpr::Pow(b, x) => {
            let base = if needs_parens(b) || matches!(**b, SymExpr::Mul(_)) { format!("({})", text(b)) } else { text(b) };
            let exp = x.to_string();
            let simple = x.to_rational().is_some_and(|q| q.is_integer() && !q.is_negative());
            if simple {
                format!("{base}^{exp}")
            } else {
                format!("{base}^({exp})")
            }
        }
        SymExpr::Exp(a) => format!("exp({})", text(a)),
        SymExpr::Ln(a) => format!("ln({})", text(a)),
        SymExpr::Atan(a) => format!("arctan({})", text(a)),
    }
}

impl fmt::Display for SymExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&text(self))
    }
}

impl fmt::Display for SymmetrizedInvariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.expr)
    }
}

impl fmt::Display for NCPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pieces = self.orbits().into_iter().map(|(_, words)| orbit_text(&words, &Poly::one())).collect();
        f.write_str(&join_signed(pieces))
    }
}

// ---- LaTeX ----

fn latex_poly(p: &Poly) -> String {
    let terms: Vec<String> = p
        .terms()
        .map(|(m, c)| {
            let (word, rest) = split_monomial(m);
            let coeff = Poly::monomial(rest, c.clone());
            let w = if word.is_empty() { String::new() } else { word_text(&word, "", true) };
            match (coeff.is_one(), w.is_empty()) {
                (true, false) => w,
                (_, true) => coeff.to_string(),
                (false, false) if coeff.num_terms() == 1 => format!("{} {w}", coeff.to_string().replace('*', " ")),
                (false, false) => format!("\\left({coeff}\\right) {w}"),
            }
        })
        .collect();
    terms.join(" + ").replace("+ -", "- ")
}

fn latex_ratfunc(c: &RatFunc) -> String {
    if c.is_polynomial() {
        c.to_string().replace('*', " ")
    } else {
        format!("\\frac{{{}}}{{{}}}", c.numer().to_string().replace('*', " "), c.denom().to_string().replace('*', " "))
    }
}

fn latex_rational(ts: &[SymTerm]) -> String {
    let mut pieces = Vec::new();
    let mut order: Vec<&SymTerm> = ts.iter().collect();
    order.sort_by_key(|t| (!t.denominator.is_one(), t.denominator.total_degree()));
    for t in order {
        for (_, words) in t.numerator.orbits() {
            let c = words[0].1;
            let uniform = words.iter().all(|(_, v)| *v == c);
            let sum = words.iter().map(|(w, _)| word_text(w, "", true)).collect::<Vec<_>>().join(" + ");
            let (neg, p, q) = match c.to_rational().filter(|_| uniform) {
                Some(r) => (r.is_negative(), r.numer().abs(), r.denom().clone()),
                None => {
                    let parts: Vec<String> =
                        words.iter().map(|(w, v)| format!("\\left({}\\right) {}", latex_ratfunc(v), word_text(w, "", true))).collect();
                    let num = parts.join(" + ");
                    let body = if t.denominator.is_one() { num } else { format!("\\frac{{{num}}}{{{}}}", latex_poly(&t.denominator)) };
                    pieces.push((false, body));
                    continue;
                }
            };
            let num = match (p.is_one(), words.len() == 1) {
                (true, _) => sum,
                (false, true) => format!("{p} {sum}"),
                (false, false) => format!("{p}\\left({sum}\\right)"),
            };
            let den = match (q.is_one(), t.denominator.is_one()) {
                (true, true) => None,
                (true, false) => Some(latex_poly(&t.denominator)),
                (false, true) => Some(q.to_string()),
                (false, false) => Some(format!("{q} {}", latex_poly(&t.denominator))),
            };
            pieces.push((neg, match den {
                Some(d) => format!("\\frac{{{num}}}{{{d}}}"),
                None => num,
            }));
        }
    }
    let mut out = String::new();
    for (i, (neg, s)) in pieces.into_iter().enumerate() {
        match (i, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        out.push_str(&s);
    }
    out
}

fn latex(e: &SymExpr, ctx: u8) -> String {
    let wrap = |s: String, needed: bool| if needed { format!("\\left({s}\\right)") } else { s };
    match e {
        SymExpr::Rational(ts) => wrap(latex_rational(ts), ctx >= 2 && needs_parens(e)),
        SymExpr::Const(c) => wrap(latex_ratfunc(c), ctx >= 2 && needs_parens(e)),
        SymExpr::Add(xs) => {
            let s = xs.iter().map(|x| latex(x, 1)).collect::<Vec<_>>().join(" + ").replace("+ -", "- ");
            wrap(s, ctx >= 2)
        }
        SymExpr::Mul(xs) => wrap(xs.iter().map(|x| latex(x, 2)).collect::<Vec<_>>().join(" "), ctx >= 3),
        SymExpr::Pow(b, x) => format!("{}^{{{}}}", latex(b, 3), latex_ratfunc(x)),
        SymExpr::Exp(a) => format!("\\exp\\left({}\\right)", latex(a, 0)),
        SymExpr::Ln(a) => format!("\\ln\\left({}\\right)", latex(a, 0)),
        SymExpr::Atan(a) => format!("\\arctan\\left({}\\right)", latex(a, 0)),
    }
}

/// Multinomial count of distinct orderings of `word`.
pub fn orbit_size(word: &[usize]) -> BigInt {
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    for &j in word {
        *counts.entry(j).or_default() += 1;
    }
    let fact = |k: u64| (1..=k).fold(BigInt::one(), |a, i| a * BigInt::from(i));
    let total = fact(word.len() as u64);
    counts.values().fold(total, |acc, &c| acc.div_floor(&fact(c)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_invariant_expr;

    fn half() -> RatFunc {
        RatFunc::from_ratio(1, 2)
    }

    #[test]
    fn two_letters() {
        let p = symmetrize_monomial(&[2, 3]);
        assert_eq!(p.num_terms(), 2);
        assert_eq!(p.coefficient(&[2, 3]), half());
        assert_eq!(p.coefficient(&[3, 2]), half());
    }

    #[test]
    fn single_letter_is_fixed() {
        assert_eq!(symmetrize_monomial(&[1]), NCPolynomial::word(vec![1], RatFunc::one()));
    }

    #[test]
    fn repeated_letters_merge() {
        let p = symmetrize_monomial(&[1, 1, 2]);
        let third = RatFunc::from_ratio(1, 3);
        assert_eq!(p.num_terms(), 3);
        for w in [[1, 1, 2], [1, 2, 1], [2, 1, 1]] {
            assert_eq!(p.coefficient(&w), third);
        }
        assert_eq!(orbit_size(&[1, 1, 2]), BigInt::from(3));
    }

    #[test]
    fn table_style_text() {
        let f = parse_invariant_expr("x5 + x2*x3/x1", 5, &[]).unwrap();
        let s = symmetrize(&f);
        assert_eq!(s.to_string(), "e5 + (e2*e3+e3*e2)/(2*e1)");
        assert!(!s.formal);
        assert!(s.is_nontrivial());

        let g = parse_invariant_expr("x2^2 - 2*x1*x3", 3, &[]).unwrap();
        assert_eq!(symmetrize(&g).to_string(), "e2^2 - (e1*e3+e3*e1)");
        assert_eq!(symmetrize(&ScalarExpr::x(1)).to_string(), "e1");
    }

    #[test]
    fn combined_fraction_is_expanded() {
        let f = parse_invariant_expr("(x1*x5 + x2*x3)/x1", 5, &[]).unwrap();
        assert_eq!(symmetrize(&f).to_string(), "e5 + (e2*e3+e3*e2)/(2*e1)");
    }

    #[test]
    fn transcendental_arguments_are_formal() {
        let f = parse_invariant_expr("x1*exp(-x2/x1)", 2, &[]).unwrap();
        let s = symmetrize(&f);
        assert!(s.formal);
        assert_eq!(s.to_string(), "e1*exp(-e2/e1)");
        assert!(!symmetrize(&parse_invariant_expr("x1^2 + x2^2", 2, &[]).unwrap()).formal);
    }

    #[test]
    fn collapse_recovers_original() {
        for text in ["x5 + x2*x3/x1", "x2^2 - 2*x1*x3", "x1*exp(-x2/x1)", "(x2^2+x3^2)*exp(-2*arctan(x3/x2))"] {
            let f = parse_invariant_expr(text, 5, &[]).unwrap();
            let back = symmetrize(&f).collapse();
            match (f.as_ratfunc(), back.as_ratfunc()) {
                (Some(a), Some(b)) => assert_eq!(a, b, "{text}"),
                _ => assert_eq!(back.normalize(), f.normalize(), "{text}"),
            }
        }
    }

    #[test]
    fn latex_output() {
        let f = parse_invariant_expr("x5 + x2*x3/x1", 5, &[]).unwrap();
        assert_eq!(symmetrize(&f).to_latex(), "e_{5} + \\frac{e_{2}e_{3} + e_{3}e_{2}}{2 e_{1}}");
    }
}
