//! Local analysis: generalized series solutions at a place, valuations, and
//! the value function val that defines integrality.
//!
//! At a place with local parameter z (x - alpha at finite places, 1/x at
//! infinity) every solution is a combination of terms
//! z^r exp(p(z^{-1/s})) log(z)^l (power series in z^{1/s}). Exponential
//! parts come from the Newton polygon, exponents and log structure from the
//! theta-rewritten recurrence (Frobenius).

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use once_cell::sync::Lazy;

use crate::coeff::{Expo, K};
use crate::error::{Error, Result};
use crate::linalg::{self, Fld, Matrix};
use crate::ore::{ModuleElement, OreOperator};
use crate::poly::Poly;
use crate::ratfunc::RatFunc;
use crate::residue::Res;
use crate::series::{ratfunc_series_at, ratfunc_series_at_infinity, LSeries};

/// truncation marker for series that are exact (finitely many terms)
const EXACT: i64 = 1 << 40;

#[derive(Clone, PartialEq, Debug)]
pub enum Place {
    /// x = alpha with alpha in the constant field
    Finite(K),
    /// all roots of a squarefree polynomial v at once
    FiniteSquarefree(Poly),
    Infinity,
}

impl Place {
    /// the shift mu_z entering val(g') <= val(g) + mu_z
    pub fn mu_z(&self) -> i64 {
        match self {
            Place::Infinity => 1,
            _ => -1,
        }
    }
    fn key(&self) -> String {
        format!("{self:?}")
    }
}

/// Coefficient fields usable for local computations.
pub trait LocalField: Fld {
    fn embed(k: &K) -> Self;
    fn try_k(&self) -> Option<K>;
    fn sqrt(&self) -> Option<Self>;
    fn expand(r: &RatFunc, place: &Place, trunc: i64) -> Result<LSeries<Self>>;
    /// rational function whose residue class this element is
    fn lift(&self) -> RatFunc;
}

impl LocalField for K {
    fn embed(k: &K) -> Self {
        k.clone()
    }
    fn try_k(&self) -> Option<K> {
        Some(self.clone())
    }
    fn sqrt(&self) -> Option<Self> {
        K::sqrt(self)
    }
    fn expand(r: &RatFunc, place: &Place, trunc: i64) -> Result<LSeries<K>> {
        match place {
            Place::Finite(alpha) => ratfunc_series_at(r, alpha, trunc, &|c: &K| c.clone()),
            Place::Infinity => ratfunc_series_at_infinity(r, trunc),
            Place::FiniteSquarefree(_) => Err(Error::Internal(
                "squarefree place needs residue coefficients".into(),
            )),
        }
    }
    fn lift(&self) -> RatFunc {
        RatFunc::constant(self.clone())
    }
}

impl LocalField for Res {
    fn embed(k: &K) -> Self {
        Res::constant(k.clone())
    }
    fn try_k(&self) -> Option<K> {
        self.as_k()
    }
    fn sqrt(&self) -> Option<Self> {
        // only constants; x-dependent square roots leave the supported field
        self.as_k().and_then(|k| k.sqrt()).map(Res::constant)
    }
    fn expand(r: &RatFunc, place: &Place, trunc: i64) -> Result<LSeries<Res>> {
        match place {
            Place::FiniteSquarefree(v) => {
                let m = Arc::new(v.clone());
                let alpha = Res::generator(&m);
                ratfunc_series_at(r, &alpha, trunc, &|c: &K| Res::constant(c.clone()))
            }
            _ => Err(Error::Internal("residue coefficients need a squarefree place".into())),
        }
    }
    fn lift(&self) -> RatFunc {
        RatFunc::from_poly(self.rep.clone())
    }
}

// ---------------------------------------------------------------------------
// local operators: sum of series coefficients times powers of d/dw

#[derive(Clone, Debug)]
struct LocalOp<F: Fld> {
    coeffs: Vec<LSeries<F>>,
}

impl<F: Fld> LocalOp<F> {
    fn zero() -> Self {
        LocalOp { coeffs: vec![] }
    }
    fn identity() -> Self {
        LocalOp {
            coeffs: vec![LSeries::monomial(F::one(), 0, EXACT)],
        }
    }
    fn coeff(&self, i: usize) -> LSeries<F> {
        self.coeffs.get(i).cloned().unwrap_or_else(|| LSeries::zero(EXACT))
    }
    fn add(&self, o: &LocalOp<F>) -> LocalOp<F> {
        let n = self.coeffs.len().max(o.coeffs.len());
        LocalOp {
            coeffs: (0..n).map(|i| self.coeff(i).add(&o.coeff(i))).collect(),
        }
    }
    fn scale_series(&self, s: &LSeries<F>) -> LocalOp<F> {
        LocalOp {
            coeffs: self.coeffs.iter().map(|c| c.mul(s)).collect(),
        }
    }
    /// operator composition with D: coefficients b_j go to b_j' D^j + b_j D^{j+1}
    fn d_times(&self) -> LocalOp<F> {
        let mut out = vec![LSeries::zero(EXACT); self.coeffs.len() + 1];
        for (j, c) in self.coeffs.iter().enumerate() {
            out[j] = out[j].add(&c.derivative());
            out[j + 1] = out[j + 1].add(c);
        }
        LocalOp { coeffs: out }
    }
}

/// assemble sum a_i G^i where G = g(w) D + u(w) replaces the derivation
fn assemble<F: Fld>(
    coeffs: &[LSeries<F>],
    g: Option<&LSeries<F>>,
    u: Option<&LSeries<F>>,
) -> LocalOp<F> {
    let mut acc = LocalOp::zero();
    let mut pow = LocalOp::identity();
    for (i, a) in coeffs.iter().enumerate() {
        if i > 0 {
            let mut next = pow.d_times();
            if let Some(g) = g {
                next = next.scale_series(g);
            }
            if let Some(u) = u {
                next = next.add(&pow.scale_series(u));
            }
            pow = next;
        }
        if !a.is_zero() {
            acc = acc.add(&pow.scale_series(a));
        }
    }
    acc
}

fn local_op<F: LocalField>(l: &OreOperator, place: &Place, trunc: i64) -> Result<LocalOp<F>> {
    let coeffs = l
        .coeffs
        .iter()
        .map(|c| F::expand(c, place, trunc))
        .collect::<Result<Vec<_>>>()?;
    Ok(match place {
        Place::Infinity => {
            // d/dx = -z^2 d/dz
            let g = LSeries::monomial(F::from_i64(-1), 2, EXACT);
            assemble(&coeffs, Some(&g), None)
        }
        _ => assemble(&coeffs, None, None),
    })
}

/// substitute w_old = w_new^sigma; d/dw_old = (1/sigma) w^{1-sigma} d/dw
fn ramify<F: Fld>(op: &LocalOp<F>, sigma: i64) -> Result<LocalOp<F>> {
    let coeffs: Vec<LSeries<F>> = op.coeffs.iter().map(|c| c.stretch(sigma)).collect();
    let g = LSeries::monomial(F::from_i64(sigma).inv()?, 1 - sigma, EXACT);
    Ok(assemble(&coeffs, Some(&g), None))
}

/// conjugate by exp(q) with q' = u: D goes to D + u
fn conjugate<F: Fld>(op: &LocalOp<F>, u: &LSeries<F>) -> LocalOp<F> {
    assemble(&op.coeffs, None, Some(u))
}

// ---------------------------------------------------------------------------
// polynomial helpers over a generic field (dense, lowest degree first)

fn fpoly_trim<F: Fld>(p: &mut Vec<F>) {
    while p.last().map_or(false, |c| c.is_zero()) {
        p.pop();
    }
}

fn fpoly_mul<F: Fld>(a: &[F], b: &[F]) -> Vec<F> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![F::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].add(&x.mul(y));
        }
    }
    out
}

fn fpoly_derivative<F: Fld>(a: &[F]) -> Vec<F> {
    a.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c.mul(&F::from_i64(i as i64)))
        .collect()
}

fn fpoly_eval<F: Fld>(a: &[F], x: &F) -> F {
    let mut acc = F::zero();
    for c in a.iter().rev() {
        acc = acc.mul(x).add(c);
    }
    acc
}

/// divide by (c - root), assuming the remainder vanishes
fn fpoly_deflate<F: Fld>(a: &[F], root: &F) -> Vec<F> {
    let mut out = vec![F::zero(); a.len() - 1];
    let mut carry = F::zero();
    for i in (0..a.len() - 1).rev() {
        carry = a[i + 1].add(&carry.mul(root));
        out[i] = carry.clone();
    }
    out
}

fn bigint_divisors(n: &BigInt) -> Vec<BigInt> {
    let m = n.abs();
    let mut out = vec![];
    let mut d = BigInt::from(1);
    let limit = BigInt::from(1_000_000);
    while &d * &d <= m {
        if (&m % &d).is_zero() {
            out.push(d.clone());
            out.push(&m / &d);
        }
        d += 1;
        if d > limit {
            break;
        }
    }
    out
}

/// one rational root of a polynomial with rational coefficients, if any
fn one_rational_root(a: &[BigRational]) -> Option<BigRational> {
    let mut den = BigInt::from(1);
    for c in a {
        den = num_integer::lcm(den, c.denom().clone());
    }
    let ints: Vec<BigInt> = a.iter().map(|c| (c * BigRational::from(den.clone())).to_integer()).collect();
    let a0 = ints.first()?.clone();
    let an = ints.last()?.clone();
    if a0.is_zero() {
        return Some(BigRational::zero());
    }
    for p in bigint_divisors(&a0) {
        for q in bigint_divisors(&an) {
            for sign in [1, -1] {
                let cand = BigRational::new(&p * BigInt::from(sign), q.clone());
                let mut acc = BigRational::zero();
                for c in a.iter().rev() {
                    acc = acc * &cand + c;
                }
                if acc.is_zero() {
                    return Some(cand);
                }
            }
        }
    }
    None
}

/// all roots of a polynomial over F, with multiplicities; errors with
/// "unsupported constant field" when some root lies outside F's reach
fn fpoly_roots<F: LocalField>(phi: &[F]) -> Result<Vec<(F, usize)>> {
    let mut p = phi.to_vec();
    fpoly_trim(&mut p);
    if p.len() <= 1 {
        return Err(Error::Internal("root finding on a constant".into()));
    }
    let mut found: Vec<F> = vec![];
    while p.first().map_or(false, |c| c.is_zero()) {
        found.push(F::zero());
        p.remove(0);
    }
    loop {
        match p.len() {
            0 | 1 => break,
            2 => {
                found.push(p[0].neg().mul(&p[1].inv()?));
                break;
            }
            3 => {
                // quadratic formula; discriminant must be a square in F
                let (a, b, c) = (p[2].clone(), p[1].clone(), p[0].clone());
                let disc = b.mul(&b).sub(&F::from_i64(4).mul(&a).mul(&c));
                let s = disc.sqrt().ok_or_else(|| {
                    Error::UnsupportedConstantField("non-square discriminant of local equation".into())
                })?;
                let half = F::from_i64(2).mul(&a).inv()?;
                found.push(b.neg().add(&s).mul(&half));
                found.push(b.neg().sub(&s).mul(&half));
                break;
            }
            _ => {
                // peel off rational roots; anything harder is out of scope
                let qs: Option<Vec<BigRational>> = p
                    .iter()
                    .map(|c| c.try_k().and_then(|k| k.as_rational().cloned()))
                    .collect();
                let root = qs.as_deref().and_then(one_rational_root).ok_or_else(|| {
                    Error::UnsupportedConstantField(
                        "local equation of degree > 2 without rational roots".into(),
                    )
                })?;
                let r = F::embed(&K::from_big(root));
                found.push(r.clone());
                p = fpoly_deflate(&p, &r);
            }
        }
    }
    // group equal roots
    let mut out: Vec<(F, usize)> = vec![];
    'next: for r in found {
        for (s, m) in out.iter_mut() {
            if *s == r {
                *m += 1;
                continue 'next;
            }
        }
        out.push((r, 1));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Newton polygon and exponential parts

/// an exponential part: sum of c * w^{-a} entries with a >= 1, in the
/// ramified variable w = z^{1/s}
pub type ExpPart<F> = Vec<(i64, F)>;

#[derive(Clone, Debug)]
pub struct RawPart<F: Fld> {
    pub s: i64,
    pub p: ExpPart<F>,
    pub mult: usize,
}

fn lower_hull(points: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut hull: Vec<(i64, i64)> = vec![];
    for &pt in points {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // pop b unless slope(a,b) < slope(b,pt)
            if (b.1 - a.1) * (pt.0 - b.0) < (pt.1 - b.1) * (b.0 - a.0) {
                break;
            }
            hull.pop();
        }
        hull.push(pt);
    }
    hull
}

fn exp_parts_rec<F: LocalField>(
    op: LocalOp<F>,
    mut s: i64,
    mut acc: ExpPart<F>,
    mut bound: Option<i64>,
    out: &mut Vec<RawPart<F>>,
) -> Result<usize> {
    let mut op = op;
    loop {
        let points: Vec<(i64, i64)> = op
            .coeffs
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.valuation().map(|v| (i as i64, v)))
            .collect();
        if points.is_empty() {
            return Err(Error::Internal("locally zero operator".into()));
        }
        let hull = lower_hull(&points);
        // abscissa limit: solutions with u-order < bound only
        let i_b = match bound {
            None => hull.last().unwrap().0,
            Some(b) => {
                let mut lim = hull[0].0;
                for e in hull.windows(2) {
                    // slope >= b (exclusive bound) stops the walk
                    if e[1].1 - e[0].1 >= b * (e[1].0 - e[0].0) {
                        break;
                    }
                    lim = e[1].0;
                }
                lim
            }
        };
        // edges with slope in (1, bound), i.e. genuine exponential parts
        let mut used: Vec<((i64, i64), (i64, i64))> = vec![];
        for e in hull.windows(2) {
            if e[1].0 > i_b {
                break;
            }
            let (di, dv) = (e[1].0 - e[0].0, e[1].1 - e[0].1);
            if dv > di {
                used.push((e[0], e[1]));
            }
        }
        // ramify until every used slope is an integer
        let mut sigma = 1i64;
        for &(a, b) in &used {
            let di = b.0 - a.0;
            let dv = b.1 - a.1;
            let g = num_integer::gcd(di, dv);
            sigma = num_integer::lcm(sigma, di / g);
        }
        if sigma > 1 {
            op = ramify(&op, sigma)?;
            s *= sigma;
            acc = acc.iter().map(|(a, c)| (a * sigma, c.clone())).collect();
            bound = bound.map(|b| sigma * (b - 1) + 1);
            continue;
        }
        let i_reg = used.first().map(|e| e.0 .0).unwrap_or(i_b);
        let mut total = 0usize;
        if i_reg > 0 {
            out.push(RawPart {
                s,
                p: acc.clone(),
                mult: i_reg as usize,
            });
            total += i_reg as usize;
        }
        for &((i1, v1), (i2, v2)) in &used {
            let rho = (v2 - v1) / (i2 - i1);
            // characteristic equation from the points on this edge
            let mut phi = vec![F::zero(); (i2 - i1 + 1) as usize];
            for &(i, v) in &points {
                if i >= i1 && i <= i2 && v == v1 + rho * (i - i1) {
                    phi[(i - i1) as usize] = op.coeffs[i as usize].lead().unwrap().1;
                }
            }
            let roots = fpoly_roots(&phi)?;
            let mut span = 0usize;
            for (c, m) in roots {
                if c.is_zero() {
                    return Err(Error::Internal("zero root of edge equation".into()));
                }
                span += m;
                let u = LSeries::monomial(c.clone(), -rho, EXACT);
                let opc = conjugate(&op, &u);
                let mut acc2 = acc.clone();
                acc2.push((rho - 1, c.mul(&F::from_i64(1 - rho).inv()?)));
                let got = exp_parts_rec(opc, s, acc2, Some(rho), out)?;
                if got != m {
                    return Err(Error::Internal(format!(
                        "exponential part multiplicity mismatch: expected {m}, found {got}"
                    )));
                }
                total += m;
            }
            if span as i64 != i2 - i1 {
                return Err(Error::Internal("edge roots do not account for the span".into()));
            }
        }
        if total as i64 != i_b {
            return Err(Error::Internal(format!(
                "exponential parts account for {total} of {i_b} solutions"
            )));
        }
        return Ok(total);
    }
}

/// complete list of exponential parts (with ramifications and multiplicities)
pub fn exponential_parts<F: LocalField>(
    l: &OreOperator,
    place: &Place,
) -> Result<Vec<RawPart<F>>> {
    let n = l.order().ok_or(Error::ZeroInput)?;
    let op = local_op::<F>(l, place, default_trunc(l, place))?;
    let mut out = vec![];
    let total = exp_parts_rec(op, 1, vec![], None, &mut out)?;
    if total != n {
        return Err(Error::Internal("incomplete exponential part list".into()));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// theta form and Frobenius solutions

struct ThetaForm<F: Fld> {
    k0: i64,
    kmax: i64,
    pk: BTreeMap<i64, Vec<F>>,
}

fn theta_form<F: Fld>(op: &LocalOp<F>) -> Result<ThetaForm<F>> {
    // D^i = w^{-i} theta (theta - 1) ... (theta - i + 1)
    let mut ff: Vec<Vec<F>> = vec![vec![F::one()]];
    for i in 1..op.coeffs.len() {
        let factor = vec![F::from_i64(-(i as i64 - 1)), F::one()];
        ff.push(fpoly_mul(&ff[i - 1], &factor));
    }
    let kmax = op
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| c.trunc - i as i64)
        .min()
        .ok_or(Error::ZeroInput)?;
    let mut pk: BTreeMap<i64, Vec<F>> = BTreeMap::new();
    for (i, a) in op.coeffs.iter().enumerate() {
        for e in a.val..a.trunc {
            let k = e - i as i64;
            if k >= kmax {
                break;
            }
            let c = a.coeff(e).unwrap();
            if c.is_zero() {
                continue;
            }
            let entry = pk.entry(k).or_default();
            let add = ff[i].iter().map(|f| f.mul(&c)).collect::<Vec<_>>();
            if entry.len() < add.len() {
                entry.resize(add.len(), F::zero());
            }
            for (j, v) in add.iter().enumerate() {
                entry[j] = entry[j].add(v);
            }
        }
    }
    pk.retain(|_, p| {
        fpoly_trim(p);
        !p.is_empty()
    });
    let k0 = *pk.keys().next().ok_or_else(|| Error::Internal("empty theta form".into()))?;
    Ok(ThetaForm { k0, kmax, pk })
}

fn falling(j: usize, i: usize) -> i64 {
    let mut f = 1i64;
    for t in 0..i {
        f *= (j - t) as i64;
    }
    f
}

/// regular solutions for one class of indicial roots (roots with integer
/// differences); returns (base exponent, log coefficient series) per solution
fn frobenius_class<F: LocalField>(
    tf: &ThetaForm<F>,
    roots: &[(Expo, usize)],
) -> Result<Vec<(Expo, Vec<LSeries<F>>)>> {
    let base = roots.iter().map(|(r, _)| *r).min().unwrap();
    let cap: usize = roots.iter().map(|(_, m)| *m).sum();
    let max_off = roots
        .iter()
        .map(|(r, _)| (r.q - base.q).to_integer())
        .max()
        .unwrap();
    let tf_len = tf.kmax - tf.k0 - 1;
    if tf_len < max_off + 2 {
        return Err(Error::Internal("series truncation too small for Frobenius step".into()));
    }
    let tlen = tf_len as usize; // coefficients 0..tlen, conditions 0..tlen
    let cols = (tlen + 1) * cap;
    let rows = (tlen + 1) * cap;
    let mut a: Matrix<F> = vec![vec![F::zero(); cols]; rows];
    // cache p_k^{(i)}/i! evaluated at base + m
    for (m, mp) in (0..=tlen).flat_map(|m| (m..=tlen).map(move |mp| (m, mp))) {
        let k = tf.k0 + (mp - m) as i64;
        let p = match tf.pk.get(&k) {
            Some(p) => p,
            None => continue,
        };
        let at = F::embed(&base.add_q(num_rational::Rational64::from(m as i64)).to_k());
        let mut deriv = p.clone();
        let mut fact = 1i64;
        for i in 0..=(cap - 1) {
            if deriv.is_empty() {
                break;
            }
            let val = fpoly_eval(&deriv, &at).mul(&F::from_i64(fact).inv()?);
            if !val.is_zero() {
                for j in i..cap {
                    // unknown (m, j) feeds condition (mp, j - i)
                    let w = val.mul(&F::from_i64(falling(j, i)));
                    let row = mp * cap + (j - i);
                    let col = m * cap + j;
                    a[row][col] = a[row][col].add(&w);
                }
            }
            deriv = fpoly_derivative(&deriv);
            fact *= (i + 1) as i64;
        }
    }
    let ker = linalg::kernel(&a)?;
    if ker.len() != cap {
        return Err(Error::Internal(format!(
            "indicial class of multiplicity {cap} produced {} solutions",
            ker.len()
        )));
    }
    let mut out = vec![];
    for v in ker {
        let logs: Vec<LSeries<F>> = (0..cap)
            .map(|j| {
                let coeffs: Vec<F> = (0..=tlen).map(|m| v[m * cap + j].clone()).collect();
                LSeries::new(0, coeffs, tlen as i64 + 1)
            })
            .collect();
        out.push((base, logs));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// generalized series

#[derive(Clone, Debug)]
pub struct GenSeries<F: Fld> {
    /// ramification: the series variable is w = z^{1/s}
    pub s: i64,
    /// exponential part p(z^{-1/s}) as (a, c) entries meaning c * w^{-a}
    pub exp_part: ExpPart<F>,
    /// base exponent in w units; the z-exponent of w^k terms is (base + k)/s
    pub base: Expo,
    /// logs[j] multiplies log(z)^j
    pub logs: Vec<LSeries<F>>,
}

impl<F: LocalField> GenSeries<F> {
    pub fn is_zero(&self) -> bool {
        self.logs.iter().all(|l| l.is_zero())
    }

    /// zero with full precision, not merely zero up to truncation
    pub fn is_exact_zero(&self) -> bool {
        self.logs.iter().all(|l| l.is_zero() && l.trunc >= EXACT)
    }

    /// minimal exponent over all terms; None when zero up to truncation
    pub fn nu(&self) -> Option<Expo> {
        self.logs
            .iter()
            .filter_map(|l| l.valuation())
            .min()
            .map(|v| self.base.add_q(v.into()).div_int(self.s))
    }

    /// every unknown term has exponent at least this
    fn nu_threshold(&self) -> Expo {
        let t = self.logs.iter().map(|l| l.trunc).min().unwrap_or(EXACT);
        self.base.add_q(t.into()).div_int(self.s)
    }

    fn map_logs(&self, f: impl Fn(usize, &LSeries<F>) -> LSeries<F>) -> GenSeries<F> {
        GenSeries {
            s: self.s,
            exp_part: self.exp_part.clone(),
            base: self.base,
            logs: self.logs.iter().enumerate().map(|(j, l)| f(j, l)).collect(),
        }
    }

    /// add a series with the same exponential part, aligning base exponents
    pub fn add(&self, o: &GenSeries<F>) -> GenSeries<F> {
        assert_eq!(self.s, o.s, "mixed ramification");
        assert_eq!(self.exp_part, o.exp_part, "mixed exponential parts");
        let d = o.base.sub(&self.base);
        assert!(d.p.is_zero() && d.q.is_integer(), "incompatible exponent classes");
        let shift = d.q.to_integer();
        let nl = self.logs.len().max(o.logs.len());
        let zero = LSeries::zero(EXACT);
        let logs = (0..nl)
            .map(|j| {
                let a = self.logs.get(j).unwrap_or(&zero);
                let b = o.logs.get(j).unwrap_or(&zero);
                a.add(&b.mul_zpow(shift))
            })
            .collect();
        GenSeries {
            s: self.s,
            exp_part: self.exp_part.clone(),
            base: self.base,
            logs,
        }
    }

    pub fn scale(&self, c: &F) -> GenSeries<F> {
        self.map_logs(|_, l| l.scale(c))
    }

    /// multiply by a Laurent series in z
    pub fn mul_zseries(&self, ser: &LSeries<F>) -> GenSeries<F> {
        let w = ser.stretch(self.s);
        self.map_logs(|_, l| l.mul(&w))
    }

    /// d/dz
    pub fn dz(&self) -> GenSeries<F> {
        let s = self.s;
        // p'(z) relative to the shifted base: sum c_a (-a/s) w^{-a}
        let mut ptilde = LSeries::zero(EXACT);
        for (a, c) in &self.exp_part {
            let coef = c.mul(&F::from_i64(-a).mul(&F::from_i64(s).inv().expect("s nonzero")));
            ptilde = ptilde.add(&LSeries::monomial(coef, -a, EXACT));
        }
        let base = self.base;
        let logs: Vec<LSeries<F>> = (0..self.logs.len())
            .map(|j| {
                let sj = &self.logs[j];
                let mut term = ptilde.mul(sj);
                // termwise (base + k)/s factor
                let mut coeffs = vec![];
                for k in sj.val..sj.trunc {
                    let e = base.add_q(k.into()).div_int(s);
                    coeffs.push(sj.coeff(k).unwrap().mul(&F::embed(&e.to_k())));
                }
                term = term.add(&LSeries::new(sj.val, coeffs, sj.trunc));
                if j + 1 < self.logs.len() {
                    term = term.add(&self.logs[j + 1].scale(&F::from_i64(j as i64 + 1)));
                }
                term
            })
            .collect();
        GenSeries {
            s,
            exp_part: self.exp_part.clone(),
            base: base.add_q((-s).into()),
            logs,
        }
    }

    /// d/dx at the given place (at infinity d/dx = -z^2 d/dz)
    pub fn dx(&self, place: &Place) -> GenSeries<F> {
        let d = self.dz();
        match place {
            Place::Infinity => {
                let m = LSeries::monomial(F::from_i64(-1), 2, EXACT);
                d.mul_zseries(&m)
            }
            _ => d,
        }
    }
}

/// action of an operator given by its coefficient list on a solution
pub fn apply_coeffs<F: LocalField>(
    coeffs: &[RatFunc],
    y: &GenSeries<F>,
    place: &Place,
) -> Result<GenSeries<F>> {
    let span = y
        .logs
        .iter()
        .map(|l| l.trunc - l.val.min(0))
        .max()
        .unwrap_or(8);
    let tz = span / y.s + 8;
    let mut acc: Option<GenSeries<F>> = None;
    let mut der = y.clone();
    for (i, c) in coeffs.iter().enumerate() {
        if i > 0 {
            der = der.dx(place);
        }
        if c.is_zero() {
            continue;
        }
        let ser = F::expand(c, place, tz)?;
        let term = der.mul_zseries(&ser);
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term),
        });
    }
    Ok(acc.unwrap_or_else(|| GenSeries {
        s: y.s,
        exp_part: y.exp_part.clone(),
        base: y.base,
        logs: vec![],
    }))
}

/// action of a module element (standard coordinates) on a solution
pub fn series_apply<F: LocalField>(
    p: &ModuleElement,
    y: &GenSeries<F>,
    place: &Place,
) -> Result<GenSeries<F>> {
    apply_coeffs(&p.coords, y, place)
}

// ---------------------------------------------------------------------------
// solution bases

/// Minimum series truncation order used by all local expansions; raising it
/// trades time for more certain valuation decisions on hard inputs.
static TRUNCATION_FLOOR: std::sync::atomic::AtomicI64 = std::sync::atomic::AtomicI64::new(0);

pub fn set_truncation_floor(n: i64) {
    TRUNCATION_FLOOR.store(n, std::sync::atomic::Ordering::Relaxed);
}

pub(crate) fn default_trunc(l: &OreOperator, place: &Place) -> i64 {
    let n = l.order().unwrap_or(0) as i64;
    let mut pole = 0i64;
    for c in &l.coeffs {
        if c.is_zero() {
            continue;
        }
        let v = match place {
            Place::Finite(alpha) => c.nu_at(alpha).unwrap_or(0),
            Place::FiniteSquarefree(v) => {
                -(c.den_multiplicity(v) as i64) + if c.num.rem(v).map_or(false, |r| r.is_zero()) { 1 } else { 0 }
            }
            Place::Infinity => c.nu_inf().unwrap_or(0),
        };
        pole = pole.max(-v).max(v.abs());
    }
    (n + pole + 8).max(TRUNCATION_FLOOR.load(std::sync::atomic::Ordering::Relaxed))
}

/// truncated generalized series solutions spanning Sol(L) at the place
pub fn solution_basis<F: LocalField>(
    l: &OreOperator,
    place: &Place,
    trunc: i64,
) -> Result<Vec<GenSeries<F>>> {
    let n = l.order().ok_or(Error::ZeroInput)?;
    let mut slack = 0i64;
    'retry: for attempt in 0..4 {
        let t_op = trunc + slack + (n as i64 + 1) * 2;
        let op0 = local_op::<F>(l, place, t_op)?;
        let mut raw = vec![];
        exp_parts_rec(op0, 1, vec![], None, &mut raw)?;
        let mut sols: Vec<GenSeries<F>> = vec![];
        for part in &raw {
            let mut op = local_op::<F>(l, place, t_op)?;
            if part.s > 1 {
                op = ramify(&op, part.s)?;
            }
            if !part.p.is_empty() {
                let mut u = LSeries::zero(EXACT);
                for (a, c) in &part.p {
                    u = u.add(&LSeries::monomial(c.mul(&F::from_i64(-a)), -a - 1, EXACT));
                }
                op = conjugate(&op, &u);
            }
            let tf = theta_form(&op)?;
            let ind = &tf.pk[&tf.k0];
            if ind.len() - 1 != part.mult {
                return Err(Error::Internal(format!(
                    "indicial degree {} does not match multiplicity {}",
                    ind.len() - 1,
                    part.mult
                )));
            }
            let roots = fpoly_roots(ind)?;
            let mut expos: Vec<(Expo, usize)> = vec![];
            for (r, m) in roots {
                let e = r
                    .try_k()
                    .and_then(|k| Expo::from_k(&k))
                    .ok_or_else(|| Error::UnsupportedConstantField("non-affine local exponent".into()))?;
                expos.push((e, m));
            }
            // classes: roots whose difference is an integer share log structure
            let mut classes: Vec<Vec<(Expo, usize)>> = vec![];
            'root: for (e, m) in expos {
                for cl in classes.iter_mut() {
                    let d = e.sub(&cl[0].0);
                    if d.p.is_zero() && d.q.is_integer() {
                        cl.push((e, m));
                        continue 'root;
                    }
                }
                classes.push(vec![(e, m)]);
            }
            for cl in &classes {
                let fs = match frobenius_class(&tf, cl) {
                    Ok(fs) => fs,
                    Err(Error::Internal(_)) if attempt < 3 => {
                        slack = (slack + trunc).max(trunc) * 2;
                        continue 'retry;
                    }
                    Err(e) => return Err(e),
                };
                for (base, logs) in fs {
                    // convert log w powers to log z powers: log w = (1/s) log z
                    let sinv = F::from_i64(part.s).inv()?;
                    let mut sc = F::one();
                    let logs = logs
                        .into_iter()
                        .map(|l| {
                            let out = l.scale(&sc);
                            sc = sc.mul(&sinv);
                            out
                        })
                        .collect();
                    sols.push(GenSeries {
                        s: part.s,
                        exp_part: part.p.clone(),
                        base,
                        logs,
                    });
                }
            }
        }
        if sols.len() != n {
            return Err(Error::Internal(format!(
                "found {} local solutions, expected {n}",
                sols.len()
            )));
        }
        return Ok(sols);
    }
    Err(Error::ValuationUncertain)
}

enum CacheEntry {
    Rat(Arc<Vec<GenSeries<K>>>),
    Mod(Arc<Vec<GenSeries<Res>>>),
}

static SOL_CACHE: Lazy<Mutex<HashMap<(String, String, i64), CacheEntry>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

pub(crate) fn basis_k(l: &OreOperator, place: &Place, trunc: i64) -> Result<Arc<Vec<GenSeries<K>>>> {
    let key = (format!("{:?}", l.coeffs), place.key(), trunc);
    if let Some(CacheEntry::Rat(b)) = SOL_CACHE.lock().unwrap().get(&key) {
        return Ok(b.clone());
    }
    let b = Arc::new(solution_basis::<K>(l, place, trunc)?);
    SOL_CACHE.lock().unwrap().insert(key, CacheEntry::Rat(b.clone()));
    Ok(b)
}

pub(crate) fn basis_res(l: &OreOperator, place: &Place, trunc: i64) -> Result<Arc<Vec<GenSeries<Res>>>> {
    let key = (format!("{:?}", l.coeffs), place.key(), trunc);
    if let Some(CacheEntry::Mod(b)) = SOL_CACHE.lock().unwrap().get(&key) {
        return Ok(b.clone());
    }
    let b = Arc::new(solution_basis::<Res>(l, place, trunc)?);
    SOL_CACHE.lock().unwrap().insert(key, CacheEntry::Mod(b.clone()));
    Ok(b)
}

// ---------------------------------------------------------------------------
// the value function

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ValResult {
    Finite(Expo),
    Infinite,
}

impl ValResult {
    pub fn is_nonnegative(&self) -> bool {
        match self {
            ValResult::Infinite => true,
            ValResult::Finite(e) => *e >= Expo::zero(),
        }
    }
}

fn val_over_basis<F: LocalField>(
    p: &ModuleElement,
    basis: &[GenSeries<F>],
    place: &Place,
) -> Result<Option<ValResult>> {
    let mut min: Option<Expo> = None;
    let mut uncertain_threshold: Option<Expo> = None;
    for f in basis {
        let g = apply_coeffs(&p.coords, f, place)?;
        match g.nu() {
            Some(e) => min = Some(min.map_or(e, |m| m.min(e))),
            None => {
                let t = g.nu_threshold();
                uncertain_threshold = Some(uncertain_threshold.map_or(t, |u| u.min(t)));
            }
        }
    }
    match (min, uncertain_threshold) {
        (Some(m), None) => Ok(Some(ValResult::Finite(m))),
        // unknown entries cannot undercut the minimum if it sits below the threshold
        (Some(m), Some(t)) if m < t => Ok(Some(ValResult::Finite(m))),
        _ => Ok(None),
    }
}

fn val_k(p: &ModuleElement, l: &OreOperator, place: &Place) -> Result<ValResult> {
    let t0 = default_trunc(l, place);
    for k in 0..4 {
        let basis = basis_k(l, place, t0 << k)?;
        if let Some(v) = val_over_basis(p, &basis, place)? {
            return Ok(v);
        }
    }
    Err(Error::ValuationUncertain)
}

fn val_res(p: &ModuleElement, l: &OreOperator, v: &Poly) -> Result<ValResult> {
    let place = Place::FiniteSquarefree(v.clone());
    let t0 = default_trunc(l, &place);
    for k in 0..4 {
        let basis = match basis_res(l, &place, t0 << k) {
            Ok(b) => b,
            Err(Error::ModulusSplit(g)) => return val_split(p, l, v, &g),
            Err(e) => return Err(e),
        };
        match val_over_basis(p, &basis, &place) {
            Ok(Some(r)) => return Ok(r),
            Ok(None) => continue,
            Err(Error::ModulusSplit(g)) => return val_split(p, l, v, &g),
            Err(e) => return Err(e),
        }
    }
    Err(Error::ValuationUncertain)
}

fn val_split(p: &ModuleElement, l: &OreOperator, v: &Poly, g: &Poly) -> Result<ValResult> {
    let rest = v.div_exact(g)?;
    let mut best: Option<ValResult> = None;
    for f in [g, &rest] {
        let r = val(p, l, &place_for_factor(f))?;
        best = Some(match best {
            None => r,
            Some(ValResult::Infinite) => r,
            Some(ValResult::Finite(a)) => match r {
                ValResult::Infinite => ValResult::Finite(a),
                ValResult::Finite(b) => ValResult::Finite(a.min(b)),
            },
        });
    }
    Ok(best.unwrap())
}

/// the natural place for a squarefree factor: a rational point if linear
pub fn place_for_factor(v: &Poly) -> Place {
    if v.degree() == Some(1) {
        let root = v.coeff(0).neg().div(&v.coeff(1)).expect("linear");
        Place::Finite(root)
    } else {
        Place::FiniteSquarefree(v.clone())
    }
}

/// places for a squarefree factor, with rational roots split off into
/// simple places so that residue arithmetic only sees irreducible moduli
pub fn places_for_factor(v: &Poly) -> Vec<Place> {
    if v.degree() == Some(1) {
        return vec![place_for_factor(v)];
    }
    match crate::poly::rational_root_split(v) {
        Some((roots, rest)) => {
            let mut out: Vec<Place> = roots.into_iter().map(Place::Finite).collect();
            if rest.degree().map_or(false, |d| d >= 1) {
                out.push(Place::FiniteSquarefree(rest));
            }
            out
        }
        None => vec![Place::FiniteSquarefree(v.clone())],
    }
}

/// val of a module element (standard coordinates) at a place
pub fn val(p: &ModuleElement, l: &OreOperator, place: &Place) -> Result<ValResult> {
    if p.is_zero() {
        return Ok(ValResult::Infinite);
    }
    match place {
        Place::Finite(_) | Place::Infinity => val_k(p, l, place),
        Place::FiniteSquarefree(v) => val_res(p, l, v),
    }
}

pub fn is_locally_integral(p: &ModuleElement, l: &OreOperator, place: &Place) -> Result<bool> {
    Ok(val(p, l, place)?.is_nonnegative())
}

/// finite places where solutions can fail to be a power series basis:
/// the squarefree factors of the cleared leading coefficient
pub fn singular_places(l: &OreOperator) -> Result<Vec<Place>> {
    let polys = l.poly_coeffs();
    let lead = polys.last().ok_or(Error::ZeroInput)?;
    if lead.is_constant() {
        return Ok(vec![]);
    }
    let mut out = vec![];
    for f in crate::poly::squarefree_factorize(lead)? {
        if f.factor.is_constant() {
            continue;
        }
        out.extend(places_for_factor(&f.factor));
    }
    Ok(out)
}

/// product of the defining polynomials of the given finite places
pub fn places_polynomial(places: &[Place]) -> Poly {
    let mut p = Poly::one();
    for pl in places {
        match pl {
            Place::Finite(a) => {
                p = p.mul(&Poly::x().sub(&Poly::constant(a.clone())));
            }
            Place::FiniteSquarefree(v) => p = p.mul(v),
            Place::Infinity => {}
        }
    }
    p
}

/// integral at every finite place: val >= 0 at the singular places and no
/// coordinate poles elsewhere
pub fn is_globally_integral(
    p: &ModuleElement,
    l: &OreOperator,
    singular: &[Place],
) -> Result<bool> {
    let sing_poly = places_polynomial(singular);
    for c in &p.coords {
        let mut den = c.den.clone();
        loop {
            let g = den.gcd(&sing_poly);
            if g.is_constant() {
                break;
            }
            den = den.div_exact(&g)?;
        }
        if !den.is_constant() {
            return Ok(false);
        }
    }
    for place in singular {
        if !val(p, l, place)?.is_nonnegative() {
            return Ok(false);
        }
    }
    Ok(true)
}
