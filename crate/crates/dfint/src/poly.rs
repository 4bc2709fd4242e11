//! Sparse univariate polynomials in x over the coefficient field.

use std::collections::BTreeMap;
use std::fmt;

use crate::coeff::{K, KDisp};
use crate::error::{Error, Result};

/// Polynomial in x with `K` coefficients, stored sparsely by exponent.
/// Invariant: no stored zero coefficients.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Poly {
    pub c: BTreeMap<usize, K>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { c: BTreeMap::new() }
    }
    pub fn one() -> Self {
        Poly::constant(K::one())
    }
    pub fn x() -> Self {
        Poly::monomial(1, K::one())
    }
    pub fn constant(k: K) -> Self {
        let mut c = BTreeMap::new();
        if !k.is_zero() {
            c.insert(0, k);
        }
        Poly { c }
    }
    pub fn monomial(e: usize, k: K) -> Self {
        let mut c = BTreeMap::new();
        if !k.is_zero() {
            c.insert(e, k);
        }
        Poly { c }
    }
    pub fn from_coeffs(v: &[i64]) -> Self {
        let mut c = BTreeMap::new();
        for (i, &a) in v.iter().enumerate() {
            if a != 0 {
                c.insert(i, K::from_i64(a));
            }
        }
        Poly { c }
    }
    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }
    pub fn is_one(&self) -> bool {
        self.c.len() == 1 && self.c.get(&0).map_or(false, |k| k.is_one())
    }
    pub fn is_constant(&self) -> bool {
        self.c.len() <= 1 && self.c.keys().all(|&e| e == 0)
    }
    /// degree; None for the zero polynomial
    pub fn degree(&self) -> Option<usize> {
        self.c.keys().next_back().copied()
    }
    pub fn deg_i(&self) -> i64 {
        self.degree().map(|d| d as i64).unwrap_or(i64::MIN)
    }
    pub fn lc(&self) -> K {
        self.c
            .values()
            .next_back()
            .cloned()
            .unwrap_or_else(K::zero)
    }
    /// valuation at 0 (lowest stored exponent); None for zero
    pub fn val0(&self) -> Option<usize> {
        self.c.keys().next().copied()
    }
    pub fn coeff(&self, e: usize) -> K {
        self.c.get(&e).cloned().unwrap_or_else(K::zero)
    }
    pub fn add(&self, o: &Poly) -> Poly {
        let mut c = self.c.clone();
        for (e, k) in &o.c {
            let v = c.entry(*e).or_insert_with(K::zero);
            *v = v.add(k);
            if v.is_zero() {
                c.remove(e);
            }
        }
        Poly { c }
    }
    pub fn neg(&self) -> Poly {
        Poly {
            c: self.c.iter().map(|(e, k)| (*e, k.neg())).collect(),
        }
    }
    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }
    pub fn mul(&self, o: &Poly) -> Poly {
        let mut c: BTreeMap<usize, K> = BTreeMap::new();
        for (e1, k1) in &self.c {
            for (e2, k2) in &o.c {
                let p = k1.mul(k2);
                if p.is_zero() {
                    continue;
                }
                let v = c.entry(e1 + e2).or_insert_with(K::zero);
                *v = v.add(&p);
            }
        }
        c.retain(|_, k| !k.is_zero());
        Poly { c }
    }
    pub fn scale(&self, k: &K) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            c: self.c.iter().map(|(e, a)| (*e, a.mul(k))).collect(),
        }
    }
    pub fn mul_xpow(&self, e: usize) -> Poly {
        Poly {
            c: self.c.iter().map(|(d, k)| (d + e, k.clone())).collect(),
        }
    }
    pub fn pow(&self, e: usize) -> Poly {
        let mut r = Poly::one();
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }
    pub fn derivative(&self) -> Poly {
        let mut c = BTreeMap::new();
        for (e, k) in &self.c {
            if *e == 0 {
                continue;
            }
            let v = k.mul(&K::from_i64(*e as i64));
            if !v.is_zero() {
                c.insert(e - 1, v);
            }
        }
        Poly { c }
    }
    /// quotient and remainder; error on zero divisor
    pub fn divrem(&self, d: &Poly) -> Result<(Poly, Poly)> {
        let dd = d.degree().ok_or(Error::DivisionByZero)?;
        let dlc_inv = d.lc().inv()?;
        let mut rem = self.clone();
        let mut quo = Poly::zero();
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            let f = rem.lc().mul(&dlc_inv);
            let t = Poly::monomial(rd - dd, f);
            quo = quo.add(&t);
            rem = rem.sub(&t.mul(d));
        }
        Ok((quo, rem))
    }
    pub fn div_exact(&self, d: &Poly) -> Result<Poly> {
        let (q, r) = self.divrem(d)?;
        if !r.is_zero() {
            return Err(Error::Internal("inexact polynomial division".into()));
        }
        Ok(q)
    }
    pub fn rem(&self, d: &Poly) -> Result<Poly> {
        Ok(self.divrem(d)?.1)
    }
    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        self.scale(&self.lc().inv().expect("nonzero lc"))
    }
    pub fn gcd(&self, o: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            let r = a.rem(&b).expect("b nonzero");
            a = b;
            b = r;
        }
        a.monic()
    }
    pub fn lcm(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let g = self.gcd(o);
        self.mul(o).div_exact(&g).unwrap().monic()
    }
    pub fn eval(&self, v: &K) -> K {
        // Horner over the sparse support
        let mut r = K::zero();
        let mut last: Option<usize> = None;
        for (e, k) in self.c.iter().rev() {
            if let Some(prev) = last {
                r = r.mul(&v.pow((prev - e) as u32));
            }
            r = r.add(k);
            last = Some(*e);
        }
        if let Some(e) = last {
            r = r.mul(&v.pow(e as u32));
        }
        r
    }
    /// Taylor shift x -> x + a
    pub fn shift(&self, a: &K) -> Poly {
        if a.is_zero() {
            return self.clone();
        }
        // Horner: p(x+a) built from the top coefficient down
        let xa = Poly::x().add(&Poly::constant(a.clone()));
        let mut r = Poly::zero();
        let d = match self.degree() {
            Some(d) => d,
            None => return Poly::zero(),
        };
        for e in (0..=d).rev() {
            r = r.mul(&xa).add(&Poly::constant(self.coeff(e)));
        }
        r
    }
    /// reverse coefficients relative to a target degree (used for work at infinity)
    pub fn reverse(&self, deg: usize) -> Poly {
        let mut c = BTreeMap::new();
        for (e, k) in &self.c {
            assert!(*e <= deg);
            c.insert(deg - e, k.clone());
        }
        Poly { c }
    }
    /// apply a map to all coefficients (e.g. parameter shift)
    pub fn map_coeffs(&self, f: impl Fn(&K) -> K) -> Poly {
        let mut c = BTreeMap::new();
        for (e, k) in &self.c {
            let v = f(k);
            if !v.is_zero() {
                c.insert(*e, v);
            }
        }
        Poly { c }
    }
}

/// Extended gcd: g = s*p + t*q with g monic, g | p and g | q.
pub fn xgcd(p: &Poly, q: &Poly) -> Result<(Poly, Poly, Poly)> {
    if p.is_zero() && q.is_zero() {
        return Err(Error::XgcdOfZeros);
    }
    let mut r0 = p.clone();
    let mut r1 = q.clone();
    let mut s0 = Poly::one();
    let mut s1 = Poly::zero();
    let mut t0 = Poly::zero();
    let mut t1 = Poly::one();
    while !r1.is_zero() {
        let (quo, rem) = r0.divrem(&r1)?;
        let s2 = s0.sub(&quo.mul(&s1));
        let t2 = t0.sub(&quo.mul(&t1));
        r0 = r1;
        r1 = rem;
        s0 = s1;
        s1 = s2;
        t0 = t1;
        t1 = t2;
    }
    let lc_inv = r0.lc().inv()?;
    Ok((
        r0.scale(&lc_inv),
        s0.scale(&lc_inv),
        t0.scale(&lc_inv),
    ))
}

/// inverse of p modulo m; error if gcd(p, m) != 1 (carries the gcd for callers
/// that split squarefree moduli)
pub fn invmod(p: &Poly, m: &Poly) -> Result<Poly> {
    let (g, s, _) = xgcd(p, m)?;
    if !g.is_one() {
        return Err(Error::ModulusSplit(g));
    }
    s.rem(m)
}

/// One squarefree factor with its multiplicity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquarefreeFactor {
    pub factor: Poly,
    pub multiplicity: usize,
}

/// Squarefree factorization by Yun's algorithm. Factors are monic, pairwise
/// coprime, nonconstant; multiplicities strictly increasing in output order.
/// The constant content is dropped (callers reassemble up to a unit).
pub fn squarefree_factorize(p: &Poly) -> Result<Vec<SquarefreeFactor>> {
    if p.is_zero() {
        return Err(Error::ZeroInput);
    }
    let p = p.monic();
    if p.is_constant() {
        return Ok(vec![]);
    }
    let dp = p.derivative();
    let mut out: Vec<SquarefreeFactor> = vec![];
    let a0 = p.gcd(&dp);
    let mut b = p.div_exact(&a0)?;
    let mut c = dp.div_exact(&a0)?;
    let mut d = c.sub(&b.derivative());
    let mut i = 1usize;
    while !b.is_constant() {
        let a = b.gcd(&d);
        if !a.is_constant() {
            out.push(SquarefreeFactor {
                factor: a.monic(),
                multiplicity: i,
            });
        }
        b = b.div_exact(&a)?;
        c = d.div_exact(&a)?;
        d = c.sub(&b.derivative());
        i += 1;
    }
    Ok(out)
}

pub struct PolyDisp<'a>(pub &'a Poly, pub char, pub char);

impl fmt::Display for PolyDisp<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, k) in self.0.c.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if *e == 0 {
                write!(f, "{}", KDisp(k, self.2))?;
            } else {
                if !k.is_one() {
                    write!(f, "{}*", KDisp(k, self.2))?;
                }
                if *e == 1 {
                    write!(f, "{}", self.1)?;
                } else {
                    write!(f, "{}^{}", self.1, e)?;
                }
            }
        }
        Ok(())
    }
}

fn small_divisors(n: u64) -> Vec<u64> {
    let mut out = vec![];
    let mut i = 1u64;
    while i.saturating_mul(i) <= n {
        if n % i == 0 {
            out.push(i);
            if i != n / i {
                out.push(n / i);
            }
        }
        i += 1;
    }
    out
}

/// Rational roots of a polynomial with rational coefficients, together with
/// the cofactor left after dividing them out. `None` when the coefficients
/// involve the parameter or are too large for the divisor screen.
pub fn rational_root_split(v: &Poly) -> Option<(Vec<K>, Poly)> {
    use num_bigint::BigInt;
    use num_integer::Integer;
    use num_rational::BigRational;
    use num_traits::{One, Signed, ToPrimitive};

    let mut rest = v.clone();
    let mut roots: Vec<K> = vec![];
    loop {
        let d = rest.degree()?;
        if d == 0 {
            break;
        }
        if d == 1 {
            roots.push(rest.coeff(0).neg().div(&rest.coeff(1)).ok()?);
            rest = Poly::constant(rest.lc());
            break;
        }
        if rest.coeff(0).is_zero() {
            roots.push(K::zero());
            rest = rest.div_exact(&Poly::x()).ok()?;
            continue;
        }
        let coes: Vec<BigRational> = (0..=d)
            .map(|i| rest.coeff(i).as_rational().cloned())
            .collect::<Option<_>>()?;
        let mut den = BigInt::one();
        for c in &coes {
            den = den.lcm(c.denom());
        }
        let denr = BigRational::from(den);
        let ints: Vec<BigInt> = coes.iter().map(|c| (c * &denr).to_integer()).collect();
        let a0 = ints[0].abs().to_u64()?;
        let an = ints[d].abs().to_u64()?;
        if a0 > 1_000_000_000_000 || an > 1_000_000_000_000 {
            return None;
        }
        let mut found = None;
        'search: for p in small_divisors(a0) {
            for q in small_divisors(an) {
                for sgn in [1i64, -1] {
                    let cand = K::from_big(BigRational::new(
                        BigInt::from(p as i64) * sgn,
                        BigInt::from(q as i64),
                    ));
                    if rest.eval(&cand).is_zero() {
                        found = Some(cand);
                        break 'search;
                    }
                }
            }
        }
        match found {
            Some(r) => {
                let lin = Poly::x().sub(&Poly::constant(r.clone()));
                rest = rest.div_exact(&lin).ok()?;
                roots.push(r);
            }
            None => break,
        }
    }
    Some((roots, rest.monic()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[i64]) -> Poly {
        Poly::from_coeffs(v)
    }

    #[test]
    fn xgcd_divisor_case() {
        // (x^2-1, x+1) -> (x+1, 0, 1)
        let (g, s, t) = xgcd(&p(&[-1, 0, 1]), &p(&[1, 1])).unwrap();
        assert_eq!(g, p(&[1, 1]));
        assert_eq!(s, Poly::zero());
        assert_eq!(t, Poly::one());
    }

    #[test]
    fn xgcd_equal_inputs() {
        let (g, s, t) = xgcd(&p(&[0, 1]), &p(&[0, 1])).unwrap();
        assert_eq!(g, p(&[0, 1]));
        // tie broken by convention: cofactor from the first argument
        assert!(
            (s == Poly::zero() && t == Poly::one()) || (s == Poly::one() && t == Poly::zero())
        );
    }

    #[test]
    fn xgcd_e_eprime() {
        // e = x^3: gcd(e, e') = x^2
        let e = p(&[0, 0, 0, 1]);
        let (g, s, t) = xgcd(&e, &e.derivative()).unwrap();
        assert_eq!(g, p(&[0, 0, 1]));
        assert_eq!(s.mul(&e).add(&t.mul(&e.derivative())), g);
    }

    #[test]
    fn xgcd_bezout_identity() {
        let a = p(&[2, 0, 3, 1]);
        let b = p(&[-1, 4, 1]);
        let (g, s, t) = xgcd(&a, &b).unwrap();
        assert_eq!(s.mul(&a).add(&t.mul(&b)), g);
        assert!(a.rem(&g).unwrap().is_zero());
        assert!(b.rem(&g).unwrap().is_zero());
    }

    #[test]
    fn xgcd_both_zero_errors() {
        assert!(matches!(
            xgcd(&Poly::zero(), &Poly::zero()),
            Err(Error::XgcdOfZeros)
        ));
    }

    #[test]
    fn squarefree_x_cubed() {
        let out = squarefree_factorize(&p(&[0, 0, 0, 1])).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].factor, p(&[0, 1]));
        assert_eq!(out[0].multiplicity, 3);
    }

    #[test]
    fn squarefree_x4_times_xm1() {
        // x^4 (x-1) -> [(x-1, 1), (x, 4)]
        let q = p(&[0, 1]).pow(4).mul(&p(&[-1, 1]));
        let out = squarefree_factorize(&q).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].factor, p(&[-1, 1]));
        assert_eq!(out[0].multiplicity, 1);
        assert_eq!(out[1].factor, p(&[0, 1]));
        assert_eq!(out[1].multiplicity, 4);
        // reassembly
        let mut acc = Poly::one();
        for f in &out {
            acc = acc.mul(&f.factor.pow(f.multiplicity));
        }
        assert_eq!(acc, q.monic());
    }

    #[test]
    fn squarefree_param_denominator() {
        // x(2x - t): one squarefree factor of multiplicity 1, verified by
        // gcd(p, p') = 1 and reassembly
        let t = K::param();
        let q = p(&[0, 1]).mul(&Poly::x().scale(&K::from_i64(2)).sub(&Poly::constant(t)));
        let out = squarefree_factorize(&q).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].multiplicity, 1);
        assert!(q.gcd(&q.derivative()).is_one());
        assert_eq!(out[0].factor, q.monic());
    }

    #[test]
    fn shift_and_eval() {
        let q = p(&[1, 2, 1]); // (x+1)^2
        let s = q.shift(&K::from_i64(-1));
        assert_eq!(s, p(&[0, 0, 1]));
        assert_eq!(q.eval(&K::from_i64(2)), K::from_i64(9));
    }
}
