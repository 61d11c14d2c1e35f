//! Text formats: algebra definition files, infix invariant expressions, the
//! bracketed prefix form and a LaTeX emitter.
//!
//! Algebra files look like
//!
//! ```text
//! algebra A4.6
//! dim 4
//! params a b
//! assume a > 0
//! [1,4] = a*e1
//! [2,4] = b*e2 - e3
//! [3,4] = e2 + b*e3
//! ```
//!
//! Indices are 1-based; `#` starts a comment; unlisted brackets are zero.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::algebra::{Assumption, AssumptionKind, StructureConstants};
use crate::error::{Error, Result};
use crate::poly::{format_rational, Poly, RatFunc, Sym};
use crate::scalar::ScalarExpr;

// ---- infix expressions ----

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Op(char),
}

fn tokenize(text: &str, line: usize, col0: usize) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = col0 + i;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                return Err(Error::Parse { line, column: col0 + i, message: "decimal literals are not exact; write p/q".into() });
            }
            let s: String = chars[start..i].iter().collect();
            out.push((Tok::Num(s.parse().expect("digits")), col));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else if "+-*/^(),".contains(c) {
            out.push((Tok::Op(c), col));
            i += 1;
        } else {
            return Err(Error::Parse { line, column: col, message: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

/// How identifiers resolve while parsing.
struct Scope<'a> {
    n: usize,
    params: &'a [Sym],
    /// Report undeclared identifiers as semantic errors (algebra files).
    semantic: bool,
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
    end_col: usize,
    scope: Scope<'a>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |(_, c)| *c)
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse { line: self.line, column: self.col(), message: message.into() }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn expr(&mut self) -> Result<ScalarExpr> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term()?);
            } else if self.eat('-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<ScalarExpr> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc.mul(&self.unary()?);
            } else if self.eat('/') {
                let col = self.col();
                let d = self.unary()?;
                if d.is_zero() {
                    return Err(Error::Parse { line: self.line, column: col, message: "division by zero".into() });
                }
                acc = acc.div(&d);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<ScalarExpr> {
        if self.eat('-') {
            return Ok(self.unary()?.neg());
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<ScalarExpr> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let col = self.col();
        let e = self.unary()?;
        match e.as_const() {
            Some(c) => {
                if base.is_zero() && c.to_rational().is_none_or(|q| !q.is_positive()) {
                    return Err(Error::Parse { line: self.line, column: col, message: "zero to a non-positive power".into() });
                }
                Ok(base.pow(c.clone()))
            }
            None => Err(Error::Parse {
                line: self.line,
                column: col,
                message: "exponent must be an exact rational or parameter expression".into(),
            }),
        }
    }

    fn atom(&mut self) -> Result<ScalarExpr> {
        let col = self.col();
        match self.toks.get(self.pos).cloned() {
            Some((Tok::Num(v), _)) => {
                self.pos += 1;
                Ok(ScalarExpr::rational(BigRational::from_integer(v)))
            }
            Some((Tok::Op('('), _)) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some((Tok::Ident(name), _)) => {
                self.pos += 1;
                if self.peek() == Some(&Tok::Op('(')) {
                    let f: fn(&ScalarExpr) -> ScalarExpr = match name.as_str() {
                        "exp" => ScalarExpr::exp,
                        "ln" | "log" => ScalarExpr::ln,
                        "arctan" | "atan" => ScalarExpr::atan,
                        _ => return Err(Error::Parse { line: self.line, column: col, message: format!("unknown function `{name}`") }),
                    };
                    self.pos += 1;
                    let a = self.expr()?;
                    self.expect(')')?;
                    return Ok(f(&a));
                }
                self.ident(&name, col)
            }
            Some((Tok::Op(c), _)) => Err(self.err(format!("unexpected `{c}`"))),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn ident(&self, name: &str, col: usize) -> Result<ScalarExpr> {
        for prefix in ['x', 'e'] {
            if let Some(rest) = name.strip_prefix(prefix) {
                if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
                    let j: usize = rest.parse().map_err(|_| self.err("index too large"))?;
                    if j == 0 || j > self.scope.n {
                        if self.scope.semantic {
                            return Err(Error::Semantic {
                                line: self.line,
                                message: format!("index {j} out of range for dimension {}", self.scope.n),
                            });
                        }
                        return Err(Error::UnknownSymbol(name.to_string()));
                    }
                    return Ok(ScalarExpr::x(j));
                }
            }
        }
        let s = Sym::new(name);
        if self.scope.params.contains(&s) {
            return Ok(ScalarExpr::param(name));
        }
        if self.scope.semantic {
            return Err(Error::Semantic { line: self.line, message: format!("undeclared parameter `{name}` (column {col})") });
        }
        Err(Error::UnknownSymbol(name.to_string()))
    }
}

fn parse_with_scope(text: &str, line: usize, col0: usize, scope: Scope<'_>) -> Result<ScalarExpr> {
    let toks = tokenize(text, line, col0)?;
    let end_col = col0 + text.chars().count();
    let mut p = Parser { toks, pos: 0, line, end_col, scope };
    if p.toks.is_empty() {
        return Err(p.err("empty expression"));
    }
    let e = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

/// Parse an invariant over `x1..xn` (`e1..en` accepted as aliases).
pub fn parse_invariant_expr(text: &str, n: usize, params: &[Sym]) -> Result<ScalarExpr> {
    parse_with_scope(text, 1, 1, Scope { n, params, semantic: false })
}

// ---- algebra files ----

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn valid_param_name(name: &str) -> bool {
    let reserved = ["x", "e", "t"].iter().any(|p| {
        name.strip_prefix(p).is_some_and(|r| !r.is_empty() && r.bytes().all(|b| b.is_ascii_digit()))
    });
    let functions = ["exp", "ln", "log", "arctan", "atan"];
    !reserved
        && !functions.contains(&name)
        && name.chars().next().is_some_and(|c| c.is_alphabetic())
        && name.chars().all(|c| c.is_alphanumeric() || c == '_')
}

/// Parse an assumption such as `a - 1 != 0`, `b > 0` or `s + 1 = 0`.
pub fn parse_assumption(text: &str, params: &[Sym]) -> Result<Assumption> {
    assumption_at(text.trim(), 1, 1, params)
}

fn assumption_at(rest: &str, line_no: usize, rest_col: usize, params: &[Sym]) -> Result<Assumption> {
    let perr = |column: usize, message: String| Error::Parse { line: line_no, column, message };
    let (lhs, op, rhs) = ["!=", ">", "="]
        .iter()
        .find_map(|op| rest.split_once(op).map(|(l, r)| (l, *op, r)))
        .ok_or_else(|| perr(rest_col, "expected `!=`, `=` or `>`".into()))?;
    if rhs.trim() != "0" {
        return Err(perr(rest_col + lhs.len() + op.len(), "right-hand side must be 0".into()));
    }
    let e = parse_with_scope(lhs, line_no, rest_col, Scope { n: 0, params, semantic: true })?;
    let target = e
        .as_ratfunc()
        .filter(RatFunc::is_polynomial)
        .ok_or_else(|| perr(rest_col, "assumption target must be a polynomial in the parameters".into()))?
        .numer()
        .clone();
    let kind = match op {
        "!=" => AssumptionKind::NonZero,
        ">" => AssumptionKind::Positive,
        _ => AssumptionKind::Zero,
    };
    Ok(Assumption::new(target, kind))
}

pub fn parse_algebra_file(text: &str) -> Result<StructureConstants> {
    let mut id: Option<String> = None;
    let mut n: Option<usize> = None;
    let mut params: Vec<Sym> = Vec::new();
    let mut assumptions: Vec<Assumption> = Vec::new();
    let mut brackets: Vec<(usize, usize, usize, Vec<RatFunc>)> = Vec::new();
    let mut stage = 0;
    for (ln0, raw) in text.lines().enumerate() {
        let line_no = ln0 + 1;
        let body = strip_comment(raw);
        if body.trim().is_empty() {
            continue;
        }
        let indent = body.len() - body.trim_start().len();
        let trimmed = body.trim();
        let (kw, rest) = trimmed.split_once(char::is_whitespace).unwrap_or((trimmed, ""));
        let rest_col = indent + kw.len() + 1 + (rest.len() - rest.trim_start().len()) + 1;
        let rest = rest.trim();
        let perr = |column: usize, message: String| Error::Parse { line: line_no, column, message };
        match kw {
            "algebra" if stage == 0 => {
                if rest.is_empty() || rest.contains(char::is_whitespace) {
                    return Err(perr(rest_col, "expected a single algebra id".into()));
                }
                id = Some(rest.to_string());
                stage = 1;
            }
            "dim" if stage == 1 => {
                let d: usize = rest.parse().map_err(|_| perr(rest_col, format!("invalid dimension `{rest}`")))?;
                if d == 0 {
                    return Err(Error::Semantic { line: line_no, message: "dimension must be positive".into() });
                }
                n = Some(d);
                stage = 2;
            }
            "params" if stage == 2 => {
                for name in rest.split_whitespace() {
                    if !valid_param_name(name) {
                        return Err(Error::Semantic { line: line_no, message: format!("invalid parameter name `{name}`") });
                    }
                    let s = Sym::new(name);
                    if params.contains(&s) {
                        return Err(Error::Semantic { line: line_no, message: format!("parameter `{name}` declared twice") });
                    }
                    params.push(s);
                }
                stage = 3;
            }
            "assume" if (2..=4).contains(&stage) => {
                assumptions.push(assumption_at(rest, line_no, rest_col, &params)?);
                stage = 4;
            }
            _ if trimmed.starts_with('[') && stage >= 2 => {
                let dim = n.expect("dimension parsed");
                let close = trimmed.find(']').ok_or_else(|| perr(indent + 1, "missing `]`".into()))?;
                let inner = &trimmed[1..close];
                let (a, b) = inner.split_once(',').ok_or_else(|| perr(indent + 2, "expected `[i,j]`".into()))?;
                let parse_idx = |s: &str| -> Result<usize> {
                    s.trim().parse::<usize>().map_err(|_| perr(indent + 2, format!("invalid index `{}`", s.trim())))
                };
                let (i, j) = (parse_idx(a)?, parse_idx(b)?);
                for k in [i, j] {
                    if k == 0 || k > dim {
                        return Err(Error::Semantic { line: line_no, message: format!("index {k} out of range for dimension {dim}") });
                    }
                }
                if i == j {
                    return Err(Error::Semantic { line: line_no, message: format!("diagonal bracket [{i},{j}] is zero by antisymmetry") });
                }
                let after = trimmed[close + 1..].trim_start();
                let eq_col = indent + trimmed.len() - after.len() + 1;
                let rhs = after.strip_prefix('=').ok_or_else(|| perr(eq_col, "expected `=`".into()))?;
                let rhs_col = eq_col + 1 + (rhs.len() - rhs.trim_start().len());
                let e = parse_with_scope(rhs.trim(), line_no, rhs_col, Scope { n: dim, params: &params, semantic: true })?;
                let coeffs = linear_coefficients(&e, dim)
                    .ok_or_else(|| perr(rhs_col, "right-hand side must be a linear combination of e1..en".into()))?;
                if brackets.iter().any(|(_, bi, bj, _)| (bi.min(bj), bi.max(bj)) == (&i.min(j), &i.max(j))) {
                    return Err(Error::Semantic { line: line_no, message: format!("duplicate bracket [{i},{j}]") });
                }
                brackets.push((line_no, i, j, coeffs));
                stage = 5;
            }
            _ => {
                let expected = match stage {
                    0 => "`algebra <id>`",
                    1 => "`dim <n>`",
                    _ => "`params`, `assume` or a bracket line",
                };
                return Err(perr(indent + 1, format!("expected {expected}, found `{kw}`")));
            }
        }
    }
    let n = n.ok_or_else(|| Error::Parse { line: text.lines().count().max(1), column: 1, message: "missing `dim` line".into() })?;
    let mut sc = StructureConstants::new(n, params, assumptions)?;
    if let Some(id) = id {
        sc = sc.with_id(id);
    }
    for (_, i, j, coeffs) in brackets {
        sc.set_bracket(i - 1, j - 1, coeffs)?;
    }
    Ok(sc)
}

/// Coefficients of a linear form in `x1..xn` with ℚ(params) coefficients.
fn linear_coefficients(e: &ScalarExpr, n: usize) -> Option<Vec<RatFunc>> {
    let r = e.as_ratfunc()?;
    if r.denom().vars().iter().any(|s| s.coordinate_index().is_some()) {
        return None;
    }
    let den = RatFunc::from_poly(r.denom().clone());
    let mut coeffs = vec![RatFunc::zero(); n];
    for (m, c) in r.numer().terms() {
        let coords: Vec<_> = m.iter().filter(|(s, _)| s.coordinate_index().is_some()).collect();
        if coords.len() != 1 || coords[0].1 != 1 {
            return None;
        }
        let k = coords[0].0.coordinate_index().expect("coordinate") - 1;
        let rest: crate::poly::Monomial = m.iter().filter(|(s, _)| s.coordinate_index().is_none()).copied().collect();
        let piece = Poly::monomial(rest, c.clone());
        coeffs[k] = coeffs[k].add(&RatFunc::from_poly(piece).div(&den));
    }
    Some(coeffs)
}

fn coefficient_text(c: &RatFunc) -> (bool, String) {
    let neg = c.is_canonically_negative();
    let abs = if neg { c.neg() } else { c.clone() };
    if abs.is_one() {
        return (neg, String::new());
    }
    let s = abs.to_string();
    let simple = match abs.to_rational() {
        Some(q) => q.is_integer(),
        None => abs.is_polynomial() && abs.numer().num_terms() == 1,
    };
    if simple {
        (neg, format!("{s}*"))
    } else {
        (neg, format!("({s})*"))
    }
}

/// Linear combination `Σ c_k e_k` in file syntax.
pub fn format_combination(coeffs: &[RatFunc]) -> String {
    let mut out = String::new();
    for (k, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let (neg, coef) = coefficient_text(c);
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let _ = write!(out, "{coef}e{}", k + 1);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Canonical text of an algebra file. Brackets are listed by their second
/// index, then their first, the order in which the tables print them.
pub fn serialize_algebra(sc: &StructureConstants) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "algebra {}", sc.id().unwrap_or("unnamed"));
    let _ = writeln!(out, "dim {}", sc.dim());
    if !sc.params().is_empty() {
        let names: Vec<&str> = sc.params().iter().map(Sym::name).collect();
        let _ = writeln!(out, "params {}", names.join(" "));
    }
    for a in sc.assumptions() {
        let _ = writeln!(out, "assume {a}");
    }
    let mut stored: Vec<_> = sc.stored().collect();
    stored.sort_by_key(|(&(i, j), _)| (j, i));
    for (&(i, j), coeffs) in stored {
        let _ = writeln!(out, "[{},{}] = {}", i + 1, j + 1, format_combination(coeffs));
    }
    out
}

// ---- bracketed prefix form ----

fn poly_prefix(p: &Poly) -> String {
    let terms: Vec<String> = p
        .terms()
        .map(|(m, c)| {
            let mut fs: Vec<String> = Vec::new();
            if !c.is_one() || m.is_empty() {
                fs.push(format_rational(c));
            }
            for &(s, e) in m.iter() {
                fs.push(if e == 1 { s.to_string() } else { format!("(^ {s} {e})") });
            }
            if fs.len() == 1 {
                fs.pop().expect("one factor")
            } else {
                format!("(* {})", fs.join(" "))
            }
        })
        .collect();
    match terms.len() {
        0 => "0".into(),
        1 => terms.into_iter().next().expect("one term"),
        _ => format!("(+ {})", terms.join(" ")),
    }
}

fn ratfunc_prefix(r: &RatFunc) -> String {
    if let Some(q) = r.to_rational() {
        return format_rational(&q);
    }
    if r.denom().is_one() {
        return poly_prefix(r.numer());
    }
    format!("(* {} (^ {} -1))", poly_prefix(r.numer()), poly_prefix(r.denom()))
}

pub fn to_prefix(e: &ScalarExpr) -> String {
    match e {
        ScalarExpr::Var(s) => s.to_string(),
        ScalarExpr::Const(c) => ratfunc_prefix(c),
        ScalarExpr::Add(ts) => format!("(+ {})", ts.iter().map(to_prefix).collect::<Vec<_>>().join(" ")),
        ScalarExpr::Mul(fs) => format!("(* {})", fs.iter().map(to_prefix).collect::<Vec<_>>().join(" ")),
        ScalarExpr::Pow(b, x) => format!("(^ {} {})", to_prefix(b), ratfunc_prefix(x)),
        ScalarExpr::Exp(a) => format!("(exp {})", to_prefix(a)),
        ScalarExpr::Ln(a) => format!("(ln {})", to_prefix(a)),
        ScalarExpr::Atan(a) => format!("(atan {})", to_prefix(a)),
    }
}

#[derive(Debug)]
enum Sexp {
    Atom(String, usize),
    List(Vec<Sexp>, usize),
}

fn read_sexp(chars: &[char], i: &mut usize) -> Result<Sexp> {
    while *i < chars.len() && chars[*i].is_whitespace() {
        *i += 1;
    }
    let col = *i + 1;
    match chars.get(*i) {
        None => Err(Error::Parse { line: 1, column: col, message: "unexpected end of input".into() }),
        Some('(') => {
            *i += 1;
            let mut items = Vec::new();
            loop {
                while *i < chars.len() && chars[*i].is_whitespace() {
                    *i += 1;
                }
                match chars.get(*i) {
                    Some(')') => {
                        *i += 1;
                        return Ok(Sexp::List(items, col));
                    }
                    None => return Err(Error::Parse { line: 1, column: *i + 1, message: "missing `)`".into() }),
                    _ => items.push(read_sexp(chars, i)?),
                }
            }
        }
        Some(')') => Err(Error::Parse { line: 1, column: col, message: "unexpected `)`".into() }),
        Some(_) => {
            let start = *i;
            while *i < chars.len() && !chars[*i].is_whitespace() && chars[*i] != '(' && chars[*i] != ')' {
                *i += 1;
            }
            Ok(Sexp::Atom(chars[start..*i].iter().collect(), col))
        }
    }
}

fn sexp_to_expr(s: &Sexp, n: usize, params: &[Sym]) -> Result<ScalarExpr> {
    match s {
        Sexp::Atom(a, col) => {
            if let Some((p, q)) = a.split_once('/') {
                let p: BigInt = p.parse().map_err(|_| Error::Parse { line: 1, column: *col, message: format!("bad rational `{a}`") })?;
                let q: BigInt = q.parse().map_err(|_| Error::Parse { line: 1, column: *col, message: format!("bad rational `{a}`") })?;
                if q.is_zero() {
                    return Err(Error::Parse { line: 1, column: *col, message: "zero denominator".into() });
                }
                return Ok(ScalarExpr::rational(BigRational::new(p, q)));
            }
            if let Ok(v) = a.parse::<BigInt>() {
                return Ok(ScalarExpr::rational(BigRational::from_integer(v)));
            }
            parse_with_scope(a, 1, *col, Scope { n, params, semantic: false })
        }
        Sexp::List(items, col) => {
            let perr = |m: &str| Error::Parse { line: 1, column: *col, message: m.into() };
            let Some(Sexp::Atom(op, _)) = items.first() else { return Err(perr("expected an operator")) };
            let args: Vec<ScalarExpr> = items[1..].iter().map(|a| sexp_to_expr(a, n, params)).collect::<Result<_>>()?;
            match (op.as_str(), args.len()) {
                ("+", k) if k >= 1 => Ok(ScalarExpr::sum(args)),
                ("*", k) if k >= 1 => Ok(ScalarExpr::product(args)),
                ("^", 2) => match args[1].as_const() {
                    Some(c) => Ok(args[0].pow(c.clone())),
                    None => Err(perr("exponent must be constant")),
                },
                ("exp", 1) => Ok(args[0].exp()),
                ("ln", 1) => Ok(args[0].ln()),
                ("atan", 1) => Ok(args[0].atan()),
                _ => Err(perr(&format!("bad operator or arity: `{op}` with {} arguments", args.len()))),
            }
        }
    }
}

pub fn parse_prefix(text: &str, n: usize, params: &[Sym]) -> Result<ScalarExpr> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let s = read_sexp(&chars, &mut i)?;
    while i < chars.len() && chars[i].is_whitespace() {
        i += 1;
    }
    if i < chars.len() {
        return Err(Error::Parse { line: 1, column: i + 1, message: "unexpected trailing input".into() });
    }
    sexp_to_expr(&s, n, params)
}

// ---- LaTeX ----

fn latex_poly(p: &Poly) -> String {
    p.to_string().replace('*', " ").split('^').enumerate().fold(String::new(), |mut acc, (i, part)| {
        if i == 0 {
            acc.push_str(part);
        } else {
            let digits: String = part.chars().take_while(char::is_ascii_digit).collect();
            let _ = write!(acc, "^{{{digits}}}{}", &part[digits.len()..]);
        }
        acc
    })
}

/// LaTeX for a coefficient in ℚ(params) or ℚ(params, x).
pub fn latex_ratfunc(r: &RatFunc) -> String {
    if let Some(q) = r.to_rational() {
        if q.is_integer() {
            return q.to_string();
        }
        let sign = if q.is_negative() { "-" } else { "" };
        return format!("{sign}\\frac{{{}}}{{{}}}", q.numer().abs(), q.denom());
    }
    if r.denom().is_one() {
        return latex_poly(r.numer());
    }
    format!("\\frac{{{}}}{{{}}}", latex_poly(r.numer()), latex_poly(r.denom()))
}

fn latex_sym(s: Sym, base: char) -> String {
    match s.coordinate_index() {
        Some(j) => format!("{base}_{{{j}}}"),
        None => match s.name().strip_prefix('t') {
            Some(r) if r.bytes().all(|b| b.is_ascii_digit()) && !r.is_empty() => format!("\\theta_{{{r}}}"),
            _ => s.to_string(),
        },
    }
}

fn latex_inner(e: &ScalarExpr, base: char, ctx: u8) -> String {
    match e {
        ScalarExpr::Var(s) => latex_sym(*s, base),
        ScalarExpr::Const(c) => {
            let s = latex_ratfunc(c);
            let compound = c.numer().num_terms() > 1 && c.denom().is_one();
            if (compound && ctx >= 2) || (ctx >= 2 && c.is_canonically_negative()) {
                format!("\\left({s}\\right)")
            } else {
                s
            }
        }
        ScalarExpr::Add(ts) => {
            let mut out = String::new();
            for (i, t) in ts.iter().enumerate() {
                let s = latex_inner(t, base, 1);
                if i > 0 && !s.starts_with('-') {
                    out.push_str(" + ");
                } else if i > 0 {
                    out.push(' ');
                }
                out.push_str(&s);
            }
            if ctx >= 2 {
                format!("\\left({out}\\right)")
            } else {
                out
            }
        }
        ScalarExpr::Mul(_) | ScalarExpr::Pow(..) => {
            let fs: Vec<ScalarExpr> = match e {
                ScalarExpr::Mul(fs) => fs.clone(),
                other => vec![other.clone()],
            };
            let mut num = Vec::new();
            let mut den = Vec::new();
            let mut sign = "";
            for f in &fs {
                match f {
                    ScalarExpr::Const(c) if c.to_rational().is_some() => {
                        let q = c.to_rational().expect("rational");
                        if q.is_negative() {
                            sign = "-";
                        }
                        if !q.numer().abs().is_one() {
                            num.push(q.numer().abs().to_string());
                        }
                        if !q.denom().is_one() {
                            den.push(q.denom().to_string());
                        }
                    }
                    ScalarExpr::Pow(b, x) if x.to_rational().is_some_and(|q| q.is_negative()) => {
                        den.push(latex_pow(b, &x.neg(), base));
                    }
                    ScalarExpr::Pow(b, x) => num.push(latex_pow(b, x, base)),
                    other => num.push(latex_inner(other, base, 2)),
                }
            }
            let num_s = if num.is_empty() { "1".to_string() } else { num.join(" ") };
            let body = if den.is_empty() { num_s } else { format!("\\frac{{{num_s}}}{{{}}}", den.join(" ")) };
            if ctx >= 3 || (ctx == 2 && !sign.is_empty()) {
                format!("\\left({sign}{body}\\right)")
            } else {
                format!("{sign}{body}")
            }
        }
        ScalarExpr::Exp(a) => format!("\\exp\\left({}\\right)", latex_inner(a, base, 0)),
        ScalarExpr::Ln(a) => format!("\\ln\\left({}\\right)", latex_inner(a, base, 0)),
        ScalarExpr::Atan(a) => format!("\\arctan\\left({}\\right)", latex_inner(a, base, 0)),
    }
}

fn latex_pow(b: &ScalarExpr, x: &RatFunc, base: char) -> String {
    let b = latex_inner(b, base, 3);
    if x.is_one() {
        b
    } else {
        format!("{b}^{{{}}}", latex_ratfunc(x))
    }
}

/// LaTeX with coordinates written `x_{j}`.
pub fn to_latex(e: &ScalarExpr) -> String {
    latex_inner(e, 'x', 0)
}

/// LaTeX with coordinates written as basis elements `e_{j}`.
pub fn to_latex_basis(e: &ScalarExpr) -> String {
    latex_inner(e, 'e', 0)
}

/// Infix text with `e_j` in place of `x_j`, the style of invariant tables.
pub fn to_basis_text(e: &ScalarExpr) -> String {
    let s = e.to_string();
    let mut out = String::with_capacity(s.len());
    let chars: Vec<char> = s.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        let prev_ident = i > 0 && (chars[i - 1].is_alphanumeric() || chars[i - 1] == '_');
        if c == 'x' && !prev_ident && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) {
            out.push('e');
        } else {
            out.push(c);
        }
    }
    out
}

/// Parameters mentioned by a set of expressions, sorted by name.
pub fn mentioned_params(es: &[ScalarExpr]) -> BTreeSet<Sym> {
    es.iter().flat_map(ScalarExpr::params).collect()
}

/// Exact rational values for `name=value` bindings such as `a=1/2`.
pub fn parse_binding(text: &str) -> Result<(Sym, BigRational)> {
    let (name, value) = text
        .split_once('=')
        .ok_or_else(|| Error::InvalidArgument(format!("expected name=value, got `{text}`")))?;
    let e = parse_invariant_expr(value.trim(), 0, &[])?;
    let q = e
        .as_const()
        .and_then(RatFunc::to_rational)
        .ok_or_else(|| Error::InvalidArgument(format!("`{value}` is not an exact rational")))?;
    Ok((Sym::new(name.trim()), q))
}

#[cfg(test)]
mod tests {
    use super::*;

    const A46: &str = "algebra A4.6\ndim 4\nparams a b\nassume a > 0\n[1,4] = a*e1\n[2,4] = b*e2 - e3\n[3,4] = e2 + b*e3\n";

    #[test]
    fn parses_and_round_trips() {
        let sc = parse_algebra_file(A46).unwrap();
        assert_eq!(sc.dim(), 4);
        assert!(sc.validate().unwrap().is_valid());
        let text = serialize_algebra(&sc);
        assert_eq!(text, A46);
        assert_eq!(parse_algebra_file(&text).unwrap(), sc);
    }

    #[test]
    fn empty_bracket_list_is_abelian() {
        let sc = parse_algebra_file("algebra 2A1\ndim 2\n").unwrap();
        assert_eq!(sc.stored().count(), 0);
    }

    #[test]
    fn diagonal_bracket_is_semantic_error() {
        let err = parse_algebra_file("algebra X\ndim 2\n[1,1] = e2\n").unwrap_err();
        assert!(matches!(err, Error::Semantic { line: 3, .. }));
    }

    #[test]
    fn duplicate_and_out_of_range_brackets() {
        let dup = parse_algebra_file("algebra X\ndim 3\n[1,2] = e3\n[2,1] = e3\n").unwrap_err();
        assert!(matches!(dup, Error::Semantic { line: 4, .. }));
        let oor = parse_algebra_file("algebra X\ndim 3\n[1,4] = e3\n").unwrap_err();
        assert!(matches!(oor, Error::Semantic { .. }));
        let undeclared = parse_algebra_file("algebra X\ndim 3\n[1,2] = c*e3\n").unwrap_err();
        assert!(matches!(undeclared, Error::Semantic { .. }));
    }

    #[test]
    fn parse_errors_carry_positions() {
        let err = parse_algebra_file("algebra X\ndim 3\n[1,2] = e3 +\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        let err = parse_algebra_file("dim 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, column: 1, .. }));
    }

    #[test]
    fn invariant_expressions() {
        let b = Sym::new("b");
        let e = parse_invariant_expr("(x2^2+x3^2)*exp(-2*b*arctan(x3/x2))", 4, &[b]).unwrap();
        assert!(matches!(e, ScalarExpr::Mul(_)));
        assert_eq!(parse_invariant_expr("x1", 1, &[]).unwrap(), ScalarExpr::x(1));
        let h = parse_invariant_expr("x1^(1/2)", 1, &[]).unwrap();
        assert_eq!(h, ScalarExpr::Pow(Box::new(ScalarExpr::x(1)), RatFunc::from_ratio(1, 2)));
        assert!(matches!(parse_invariant_expr("x5", 4, &[]), Err(Error::UnknownSymbol(_))));
        assert!(matches!(parse_invariant_expr("x1^x2", 2, &[]), Err(Error::Parse { .. })));
    }

    #[test]
    fn prefix_round_trip() {
        let a = Sym::new("a");
        let e = parse_invariant_expr("x1*exp(-x2/x1) + a*ln(x3)^2 - arctan(x2/x3)/3", 3, &[a]).unwrap();
        let p = to_prefix(&e);
        assert_eq!(parse_prefix(&p, 3, &[a]).unwrap(), e);
    }

    #[test]
    fn display_round_trip() {
        let e = parse_invariant_expr("x5 + x2*x3/x1", 5, &[]).unwrap();
        assert_eq!(parse_invariant_expr(&e.to_string(), 5, &[]).unwrap(), e);
    }

    #[test]
    fn latex_output() {
        let e = parse_invariant_expr("x5 + x2*x3/x1", 5, &[]).unwrap();
        assert_eq!(to_latex(&e), "x_{5} + \\frac{x_{2} x_{3}}{x_{1}}");
    }
}
