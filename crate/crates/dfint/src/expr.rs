//! The expression language: parsing and canonical printing of operators,
//! rational functions and module elements. The grammar has integer and
//! rational literals, the symbols x, t, n, D, Dt, Sn, the operators
//! + - * / ^ and parentheses; products are noncommutative and associate
//! left to right.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::coeff::{K, PPoly};
use crate::error::{Error, Result};
use crate::ore::{ModuleElement, OreOperator};
use crate::poly::Poly;
use crate::ratfunc::RatFunc;

/// Which noncommutative generator the operator variable stands for; it
/// fixes the commutation rule used during parsing and the symbol used
/// when printing.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum OpVar {
    /// D = d/dx: D a(x) = a D + a'
    Dx,
    /// Dt = d/dt acting on the parameter: Dt c(t) = c Dt + dc/dt
    Dt,
    /// Sn: the shift n -> n+1 on the parameter: Sn c(n) = c(n+1) Sn
    Sn,
}

impl OpVar {
    pub fn symbol(self) -> &'static str {
        match self {
            OpVar::Dx => "D",
            OpVar::Dt => "Dt",
            OpVar::Sn => "Sn",
        }
    }
    /// the name of the scalar parameter this variable acts on
    pub fn param_name(self) -> char {
        match self {
            OpVar::Dx | OpVar::Dt => 't',
            OpVar::Sn => 'n',
        }
    }
}

/// the product var * b under the commutation rule of `var`
fn left_mul_var(b: &OreOperator, var: OpVar) -> Result<OreOperator> {
    let ord = b.order().unwrap_or(0);
    let mut out = vec![RatFunc::zero(); ord + 2];
    for j in 0..=ord {
        let c = b.coeff(j);
        if c.is_zero() {
            continue;
        }
        match var {
            OpVar::Dx => {
                out[j + 1] = out[j + 1].add(&c);
                out[j] = out[j].add(&c.derivative());
            }
            OpVar::Dt => {
                out[j + 1] = out[j + 1].add(&c);
                out[j] = out[j].add(&c.d_param()?);
            }
            OpVar::Sn => {
                out[j + 1] = out[j + 1].add(&c.shift_param()?);
            }
        }
    }
    Ok(OreOperator::from_coeffs(out))
}

/// the noncommutative product a * b under the commutation rule of `var`
pub fn op_mul(a: &OreOperator, b: &OreOperator, var: OpVar) -> Result<OreOperator> {
    if var == OpVar::Dx {
        return Ok(a.mul(b));
    }
    let mut out = OreOperator::zero();
    let mut varpow_b = b.clone();
    let mut i = 0usize;
    loop {
        let ai = a.coeff(i);
        if !ai.is_zero() {
            out = out.add(&varpow_b.scale(&ai));
        }
        if Some(i) == a.order() || a.is_zero() {
            break;
        }
        varpow_b = left_mul_var(&varpow_b, var)?;
        i += 1;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// lexer

#[derive(Clone, PartialEq, Eq, Debug)]
enum Tok {
    Num(BigInt),
    Id(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = vec![];
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push((i, Tok::Plus));
                i += 1;
            }
            '-' | '\u{2212}' => {
                out.push((i, Tok::Minus));
                i += c.len_utf8();
            }
            '*' => {
                out.push((i, Tok::Star));
                i += 1;
            }
            '/' => {
                out.push((i, Tok::Slash));
                i += 1;
            }
            '^' => {
                out.push((i, Tok::Caret));
                i += 1;
            }
            '(' => {
                out.push((i, Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push((i, Tok::RParen));
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = text[start..i].parse().expect("digits parse");
                out.push((start, Tok::Num(n)));
            }
            'a'..='z' | 'A'..='Z' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                out.push((start, Tok::Id(text[start..i].to_string())));
            }
            _ => {
                return Err(Error::Parse {
                    pos: i,
                    msg: format!("unexpected character '{}'", c),
                })
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// parser

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    var: OpVar,
    end: usize,
    seen_param: Option<char>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }
    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }
    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        self.err_at(self.here(), msg)
    }
    fn err_at<T>(&self, pos: usize, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos,
            msg: msg.into(),
        })
    }

    fn expr(&mut self) -> Result<OreOperator> {
        let mut acc = match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                self.term()?.neg()
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<OreOperator> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    let rhs = self.factor()?;
                    acc = op_mul(&acc, &rhs, self.var)?;
                }
                Some(Tok::Slash) => {
                    self.bump();
                    let rhs = self.factor()?;
                    let Some(0) = rhs.order() else {
                        return self.err("division by a non-scalar operator");
                    };
                    let inv = rhs.coeff(0).inv().map_err(|_| Error::Parse {
                        pos: self.here(),
                        msg: "division by zero".into(),
                    })?;
                    acc = acc.scale(&inv);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<OreOperator> {
        if let Some(Tok::Minus) = self.peek() {
            self.bump();
            return Ok(self.factor()?.neg());
        }
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.bump();
            let e = self.exponent()?;
            return self.power(&base, e);
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i64> {
        let mut neg = false;
        let mut parens = false;
        if let Some(Tok::LParen) = self.peek() {
            self.bump();
            parens = true;
        }
        if let Some(Tok::Minus) = self.peek() {
            self.bump();
            neg = true;
        }
        let Some(Tok::Num(n)) = self.bump() else {
            return self.err("expected an integer exponent");
        };
        if parens {
            let Some(Tok::RParen) = self.bump() else {
                return self.err("expected ')' after exponent");
            };
        }
        let v: i64 = n
            .try_into()
            .map_err(|_| Error::Parse {
                pos: self.here(),
                msg: "exponent too large".into(),
            })?;
        Ok(if neg { -v } else { v })
    }

    fn power(&mut self, base: &OreOperator, e: i64) -> Result<OreOperator> {
        if e < 0 {
            let Some(0) = base.order() else {
                return self.err("negative power of a non-scalar operator");
            };
            let r = base.coeff(0).pow(e).map_err(|_| Error::Parse {
                pos: self.here(),
                msg: "negative power of zero".into(),
            })?;
            return Ok(OreOperator::from_ratfunc(r));
        }
        let mut acc = OreOperator::one();
        for _ in 0..e {
            acc = op_mul(&acc, base, self.var)?;
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<OreOperator> {
        let at = self.here();
        match self.bump() {
            Some(Tok::Num(n)) => Ok(OreOperator::from_ratfunc(RatFunc::constant(K::from_big(
                BigRational::from(n),
            )))),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                let Some(Tok::RParen) = self.bump() else {
                    return self.err("expected ')'");
                };
                Ok(e)
            }
            Some(Tok::Id(name)) => self.symbol(&name, at),
            _ => self.err("expected a number, symbol or '('"),
        }
    }

    fn symbol(&mut self, name: &str, at: usize) -> Result<OreOperator> {
        match name {
            "x" => {
                if self.var != OpVar::Dx {
                    return self.err_at(at, "x is not allowed here");
                }
                Ok(OreOperator::from_ratfunc(RatFunc::x()))
            }
            "t" | "n" => {
                let c = name.chars().next().unwrap();
                match self.seen_param {
                    Some(p) if p != c => {
                        return self.err_at(at, format!("mixed parameters '{}' and '{}'", p, c))
                    }
                    _ => self.seen_param = Some(c),
                }
                if self.var == OpVar::Dt && c == 'n' || self.var == OpVar::Sn && c == 't' {
                    return self.err_at(at, format!("parameter '{}' does not match the operator", c));
                }
                Ok(OreOperator::from_ratfunc(RatFunc::constant(K::param())))
            }
            "D" if self.var == OpVar::Dx => Ok(OreOperator::d()),
            "Dt" if self.var == OpVar::Dt => Ok(OreOperator::d()),
            "Sn" if self.var == OpVar::Sn => Ok(OreOperator::d()),
            "D" | "Dt" | "Sn" => self.err_at(at, format!("'{}' is not valid in this context", name)),
            _ => self.err_at(at, format!("unknown symbol '{}'", name)),
        }
    }
}

/// Result of parsing: the operator and the parameter letter that occurred
/// in the text, if any.
pub struct Parsed {
    pub op: OreOperator,
    pub param: Option<char>,
}

/// Parse an operator expression; `var` selects which of D, Dt, Sn is the
/// operator symbol and fixes the commutation rule.
pub fn parse_operator(text: &str, var: OpVar) -> Result<Parsed> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        var,
        end: text.len(),
        seen_param: None,
    };
    let op = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(Parsed {
        op,
        param: p.seen_param,
    })
}

/// Parse an element of A = C(x)[D]/<L>: an operator in D of order below
/// the order of L (standard coordinates).
pub fn parse_element(text: &str, n: usize) -> Result<ModuleElement> {
    let parsed = parse_operator(text, OpVar::Dx)?;
    if parsed.op.order().map_or(false, |o| o >= n) {
        return Err(Error::Parse {
            pos: 0,
            msg: format!("element order must be below {}", n),
        });
    }
    let mut coords = vec![RatFunc::zero(); n];
    for (i, c) in coords.iter_mut().enumerate() {
        *c = parsed.op.coeff(i);
    }
    Ok(ModuleElement::from_coords(coords))
}

// ---------------------------------------------------------------------------
// canonical printer

fn big_str(r: &BigRational) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// signed terms of a parameter polynomial, highest degree first
fn ppoly_terms(p: &PPoly, pname: char) -> Vec<(bool, String)> {
    let mut out = vec![];
    for (i, c) in p.c.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let neg = c.is_negative();
        let mag = c.abs();
        let s = if i == 0 {
            big_str(&mag)
        } else {
            let v = if i == 1 {
                pname.to_string()
            } else {
                format!("{}^{}", pname, i)
            };
            if mag.is_one() {
                v
            } else {
                format!("{}*{}", big_str(&mag), v)
            }
        };
        out.push((neg, s));
    }
    out
}

fn join_terms(terms: &[(bool, String)]) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (neg, s)) in terms.iter().enumerate() {
        if i == 0 {
            if *neg {
                out.push('-');
            }
        } else {
            out.push_str(if *neg { " - " } else { " + " });
        }
        out.push_str(s);
    }
    out
}

fn ppoly_string(p: &PPoly, pname: char) -> String {
    join_terms(&ppoly_terms(p, pname))
}

/// a coefficient as a product factor: sign, text, and whether the text is a
/// single factor (else the caller sees it already parenthesized)
fn k_factor(k: &K, pname: char) -> (bool, String) {
    match k {
        K::Q(r) => (r.is_negative(), big_str(&r.abs())),
        K::P { num, den } => {
            if *den == PPoly::one() {
                let terms = ppoly_terms(num, pname);
                if terms.len() == 1 {
                    let (neg, s) = terms.into_iter().next().unwrap();
                    (neg, s)
                } else {
                    (false, format!("({})", join_terms(&terms)))
                }
            } else {
                (false, format!("({})/({})", ppoly_string(num, pname), ppoly_string(den, pname)))
            }
        }
    }
}

fn k_is_one(k: &K) -> bool {
    k.is_one()
}

/// signed terms of a polynomial in x, highest degree first
fn poly_terms(p: &Poly, pname: char) -> Vec<(bool, String)> {
    let mut out = vec![];
    let mut exps: Vec<usize> = p.c.keys().cloned().collect();
    exps.sort_unstable_by(|a, b| b.cmp(a));
    for e in exps {
        let k = p.coeff(e);
        if k.is_zero() {
            continue;
        }
        if e == 0 {
            // constant terms flow into the sum instead of being one factor
            if let K::P { num, den } = &k {
                if *den == PPoly::one() {
                    out.extend(ppoly_terms(num, pname));
                    continue;
                }
            }
            out.push(k_factor(&k, pname));
            continue;
        }
        let (neg, ks) = k_factor(&k, pname);
        let s = {
            let v = if e == 1 {
                "x".to_string()
            } else {
                format!("x^{}", e)
            };
            if k_is_one(&k) {
                v
            } else if k == K::from_i64(-1) {
                return_minus_var(&mut out, v);
                continue;
            } else {
                format!("{}*{}", ks, v)
            }
        };
        out.push((neg, s));
    }
    out
}

fn return_minus_var(out: &mut Vec<(bool, String)>, v: String) {
    out.push((true, v));
}

pub fn poly_string(p: &Poly, pname: char) -> String {
    join_terms(&poly_terms(p, pname))
}

/// a rational function as a product factor
fn ratfunc_factor(r: &RatFunc, pname: char) -> (bool, String) {
    if r.is_zero() {
        return (false, "0".into());
    }
    if r.is_polynomial() {
        let terms = poly_terms(&r.num, pname);
        if terms.len() == 1 {
            terms.into_iter().next().unwrap()
        } else {
            (false, format!("({})", join_terms(&terms)))
        }
    } else {
        let den = format!("({})", poly_string(&r.den, pname));
        let terms = poly_terms(&r.num, pname);
        if terms.len() == 1 {
            let (neg, s) = terms.into_iter().next().unwrap();
            (neg, format!("{}/{}", s, den))
        } else {
            (false, format!("({})/{}", join_terms(&terms), den))
        }
    }
}

pub fn ratfunc_string(r: &RatFunc, pname: char) -> String {
    if r.is_polynomial() {
        poly_string(&r.num, pname)
    } else {
        let (neg, s) = ratfunc_factor(r, pname);
        if neg {
            format!("-{}", s)
        } else {
            s
        }
    }
}

/// terms of `coeff * sym` for a generator symbol (operator power or basis
/// element); coeff may contribute several terms when sym is empty
fn coeff_sym_terms(r: &RatFunc, sym: &str, pname: char) -> Vec<(bool, String)> {
    if r.is_zero() {
        return vec![];
    }
    if sym.is_empty() {
        if r.is_polynomial() {
            return poly_terms(&r.num, pname);
        }
        return vec![ratfunc_factor(r, pname)];
    }
    if r == &RatFunc::one() {
        return vec![(false, sym.to_string())];
    }
    if r == &RatFunc::from_i64(-1) {
        return vec![(true, sym.to_string())];
    }
    let (neg, s) = ratfunc_factor(r, pname);
    vec![(neg, format!("{}*{}", s, sym))]
}

pub fn operator_string(op: &OreOperator, var: OpVar, pname: char) -> String {
    if op.is_zero() {
        return "0".into();
    }
    let mut terms = vec![];
    let ord = op.order().unwrap();
    for i in (0..=ord).rev() {
        let sym = match i {
            0 => String::new(),
            1 => var.symbol().to_string(),
            _ => format!("{}^{}", var.symbol(), i),
        };
        terms.extend(coeff_sym_terms(&op.coeff(i), &sym, pname));
    }
    join_terms(&terms)
}

/// a module element as a sum over named basis elements: "(x - 4/9)*w2"
pub fn element_string(f: &ModuleElement, basis: &str, pname: char) -> String {
    if f.is_zero() {
        return "0".into();
    }
    let mut terms = vec![];
    for (i, c) in f.coords.iter().enumerate() {
        let sym = format!("{}{}", basis, i + 1);
        terms.extend(coeff_sym_terms(c, &sym, pname));
    }
    join_terms(&terms)
}

/// a module element in standard coordinates as an operator expression in D
pub fn element_operator_string(f: &ModuleElement, pname: char) -> String {
    operator_string(&f.as_operator(), OpVar::Dx, pname)
}

/// a telescoper sum c_i var^i from its coefficient list
pub fn telescoper_string(coeffs: &[K], var: OpVar, pname: char) -> String {
    let op = OreOperator::from_coeffs(coeffs.iter().map(|c| RatFunc::constant(c.clone())).collect());
    operator_string(&op, var, pname)
}
