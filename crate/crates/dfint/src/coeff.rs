//! The coefficient field: either the rationals or rational functions in one
//! parameter (t or n) over the rationals. Elements auto-promote, so mixed
//! arithmetic just works. Exactness everywhere.

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Dense polynomial in the parameter over the rationals. Internal helper for `K`.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct PPoly {
    /// coefficients, lowest degree first; no trailing zeros
    pub c: Vec<BigRational>,
}

impl PPoly {
    pub fn zero() -> Self {
        PPoly { c: vec![] }
    }
    pub fn one() -> Self {
        PPoly::constant(BigRational::one())
    }
    pub fn constant(r: BigRational) -> Self {
        if r.is_zero() {
            PPoly::zero()
        } else {
            PPoly { c: vec![r] }
        }
    }
    pub fn var() -> Self {
        PPoly {
            c: vec![BigRational::zero(), BigRational::one()],
        }
    }
    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }
    pub fn degree(&self) -> i64 {
        self.c.len() as i64 - 1
    }
    fn trim(mut self) -> Self {
        while self.c.last().map_or(false, |x| x.is_zero()) {
            self.c.pop();
        }
        self
    }
    pub fn lc(&self) -> BigRational {
        self.c.last().cloned().unwrap_or_else(BigRational::zero)
    }
    pub fn add(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        let mut c = vec![BigRational::zero(); n];
        for (i, x) in self.c.iter().enumerate() {
            c[i] += x;
        }
        for (i, x) in o.c.iter().enumerate() {
            c[i] += x;
        }
        PPoly { c }.trim()
    }
    pub fn neg(&self) -> Self {
        PPoly {
            c: self.c.iter().map(|x| -x).collect(),
        }
    }
    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return PPoly::zero();
        }
        let mut c = vec![BigRational::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        PPoly { c }.trim()
    }
    pub fn scale(&self, r: &BigRational) -> Self {
        if r.is_zero() {
            return PPoly::zero();
        }
        PPoly {
            c: self.c.iter().map(|x| x * r).collect(),
        }
    }
    /// quotient and remainder; panics if `o` is zero
    pub fn divrem(&self, o: &Self) -> (Self, Self) {
        assert!(!o.is_zero(), "PPoly division by zero");
        let mut rem = self.clone();
        let dlc = o.lc();
        let dd = o.c.len() - 1;
        let mut q = vec![BigRational::zero(); self.c.len().saturating_sub(dd)];
        while !rem.is_zero() && rem.c.len() - 1 >= dd {
            let k = rem.c.len() - 1 - dd;
            let f = rem.lc() / &dlc;
            q[k] = f.clone();
            for (j, b) in o.c.iter().enumerate() {
                let t = &f * b;
                rem.c[k + j] -= t;
            }
            rem = rem.trim();
        }
        (PPoly { c: q }.trim(), rem)
    }
    pub fn gcd(&self, o: &Self) -> Self {
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            let lc = a.lc();
            a.scale(&(BigRational::one() / lc))
        }
    }
    pub fn derivative(&self) -> Self {
        if self.c.len() <= 1 {
            return PPoly::zero();
        }
        PPoly {
            c: self
                .c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, x)| x * BigRational::from(BigInt::from(i)))
                .collect(),
        }
        .trim()
    }
    /// substitute param -> param + 1
    pub fn shift1(&self) -> Self {
        // Horner on (v+1)
        let mut r = PPoly::zero();
        let vp1 = PPoly {
            c: vec![BigRational::one(), BigRational::one()],
        };
        for a in self.c.iter().rev() {
            r = r.mul(&vp1).add(&PPoly::constant(a.clone()));
        }
        r
    }
    pub fn eval(&self, v: &BigRational) -> BigRational {
        let mut r = BigRational::zero();
        for a in self.c.iter().rev() {
            r = r * v + a;
        }
        r
    }
    /// exact square root if it exists
    pub fn sqrt(&self) -> Option<Self> {
        if self.is_zero() {
            return Some(PPoly::zero());
        }
        if self.degree() % 2 != 0 {
            return None;
        }
        let lc_sqrt = rational_sqrt(&self.lc())?;
        // Newton-ish: solve coefficientwise. r has degree d/2.
        let d = (self.degree() / 2) as usize;
        let mut r = vec![BigRational::zero(); d + 1];
        r[d] = lc_sqrt;
        for k in (0..d).rev() {
            // coefficient of v^(k+d) in r^2 must equal self.c[k+d]
            let mut s = BigRational::zero();
            for i in 0..=d {
                let j = (k + d) as i64 - i as i64;
                if j < 0 || j as usize > d {
                    continue;
                }
                let j = j as usize;
                if i > k && j > k {
                    s += &r[i] * &r[j];
                }
            }
            let target = self.c.get(k + d).cloned().unwrap_or_else(BigRational::zero);
            // 2*r[d]... coefficient equation: 2 r[k] r[d] + s = target  (i=k,j=d and i=d,j=k)
            r[k] = (target - s) / (BigRational::from(BigInt::from(2)) * &r[d]);
        }
        let cand = PPoly { c: r }.trim();
        if cand.mul(&cand) == *self {
            Some(cand)
        } else {
            None
        }
    }
}

pub fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    let cand = BigRational::new(n, d);
    if &(&cand * &cand) == r {
        Some(cand)
    } else {
        None
    }
}

/// Which coefficient field a computation lives in.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FieldKind {
    Rationals,
    /// rational functions in one parameter; the parameter name is fixed by the caller
    RationalFunctions,
}

/// An element of the coefficient field C: a rational number or a rational
/// function in the parameter. Stored in canonical form (denominator monic,
/// fraction reduced, parameter-free values collapse to `Q`).
#[derive(Clone, Debug)]
pub enum K {
    Q(BigRational),
    P { num: PPoly, den: PPoly },
}

impl K {
    pub fn zero() -> Self {
        K::Q(BigRational::zero())
    }
    pub fn one() -> Self {
        K::Q(BigRational::one())
    }
    pub fn from_i64(n: i64) -> Self {
        K::Q(BigRational::from(BigInt::from(n)))
    }
    pub fn from_ratio(n: i64, d: i64) -> Self {
        K::Q(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }
    pub fn from_big(r: BigRational) -> Self {
        K::Q(r)
    }
    pub fn param() -> Self {
        K::make(PPoly::var(), PPoly::one())
    }
    /// canonicalize a fraction of parameter polynomials
    pub fn make(num: PPoly, den: PPoly) -> Self {
        assert!(!den.is_zero(), "K with zero denominator");
        if num.is_zero() {
            return K::zero();
        }
        let g = num.gcd(&den);
        let (mut n, _) = num.divrem(&g);
        let (mut d, _) = den.divrem(&g);
        let lc = d.lc();
        let inv = BigRational::one() / lc;
        n = n.scale(&inv);
        d = d.scale(&inv);
        if d.degree() == 0 && n.degree() <= 0 {
            return K::Q(n.c.first().cloned().unwrap_or_else(BigRational::zero));
        }
        K::P { num: n, den: d }
    }
    pub fn is_zero(&self) -> bool {
        matches!(self, K::Q(r) if r.is_zero())
    }
    pub fn is_one(&self) -> bool {
        matches!(self, K::Q(r) if r.is_one())
    }
    fn parts(&self) -> (PPoly, PPoly) {
        match self {
            K::Q(r) => (PPoly::constant(r.clone()), PPoly::one()),
            K::P { num, den } => (num.clone(), den.clone()),
        }
    }
    pub fn add(&self, o: &K) -> K {
        match (self, o) {
            (K::Q(a), K::Q(b)) => K::Q(a + b),
            _ => {
                let (an, ad) = self.parts();
                let (bn, bd) = o.parts();
                K::make(an.mul(&bd).add(&bn.mul(&ad)), ad.mul(&bd))
            }
        }
    }
    pub fn sub(&self, o: &K) -> K {
        self.add(&o.neg())
    }
    pub fn neg(&self) -> K {
        match self {
            K::Q(a) => K::Q(-a),
            K::P { num, den } => K::P {
                num: num.neg(),
                den: den.clone(),
            },
        }
    }
    pub fn mul(&self, o: &K) -> K {
        match (self, o) {
            (K::Q(a), K::Q(b)) => K::Q(a * b),
            _ => {
                let (an, ad) = self.parts();
                let (bn, bd) = o.parts();
                K::make(an.mul(&bn), ad.mul(&bd))
            }
        }
    }
    pub fn inv(&self) -> Result<K> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(match self {
            K::Q(a) => K::Q(a.recip()),
            K::P { num, den } => K::make(den.clone(), num.clone()),
        })
    }
    pub fn div(&self, o: &K) -> Result<K> {
        Ok(self.mul(&o.inv()?))
    }
    pub fn pow(&self, e: u32) -> K {
        let mut r = K::one();
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }
    /// substitute param -> param + 1 (identity on rationals)
    pub fn shift_param(&self) -> K {
        match self {
            K::Q(_) => self.clone(),
            K::P { num, den } => K::make(num.shift1(), den.shift1()),
        }
    }
    /// derivative with respect to the parameter (zero on rationals)
    pub fn d_param(&self) -> K {
        match self {
            K::Q(_) => K::zero(),
            K::P { num, den } => {
                let n = num.derivative().mul(den).sub(&num.mul(&den.derivative()));
                K::make(n, den.mul(den))
            }
        }
    }
    /// evaluate the parameter at a rational point; None if the denominator vanishes
    pub fn eval_param(&self, v: &BigRational) -> Option<BigRational> {
        match self {
            K::Q(r) => Some(r.clone()),
            K::P { num, den } => {
                let d = den.eval(v);
                if d.is_zero() {
                    None
                } else {
                    Some(num.eval(v) / d)
                }
            }
        }
    }
    /// true if the element is an affine function a + b*param of the parameter
    pub fn as_affine(&self) -> Option<(BigRational, BigRational)> {
        match self {
            K::Q(r) => Some((r.clone(), BigRational::zero())),
            K::P { num, den } => {
                if den.degree() == 0 && num.degree() <= 1 {
                    let d = den.c[0].clone();
                    let a = num.c.first().cloned().unwrap_or_else(BigRational::zero) / &d;
                    let b = num.c.get(1).cloned().unwrap_or_else(BigRational::zero) / &d;
                    Some((a, b))
                } else {
                    None
                }
            }
        }
    }
    /// exact square root in the field, if one exists
    pub fn sqrt(&self) -> Option<K> {
        match self {
            K::Q(r) => rational_sqrt(r).map(K::Q),
            K::P { num, den } => {
                let n = num.sqrt()?;
                let d = den.sqrt()?;
                Some(K::make(n, d))
            }
        }
    }
    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            K::Q(r) => Some(r),
            _ => None,
        }
    }
}

impl PartialEq for K {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (K::Q(a), K::Q(b)) => a == b,
            (K::P { num: a, den: b }, K::P { num: c, den: d }) => a == c && b == d,
            _ => false,
        }
    }
}
impl Eq for K {}

pub fn fmt_bigrational(r: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.denom().is_one() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

/// Render with the given parameter name (used by the printer).
pub struct KDisp<'a>(pub &'a K, pub char);

fn fmt_ppoly(p: &PPoly, name: char, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if p.is_zero() {
        return write!(f, "0");
    }
    let mut first = true;
    for (i, c) in p.c.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        if first {
            if c.is_negative() {
                write!(f, "-")?;
            }
            first = false;
        } else if c.is_negative() {
            write!(f, " - ")?;
        } else {
            write!(f, " + ")?;
        }
        if i == 0 {
            fmt_bigrational(&mag, f)?;
        } else {
            if !mag.is_one() {
                fmt_bigrational(&mag, f)?;
                write!(f, "*")?;
            }
            if i == 1 {
                write!(f, "{}", name)?;
            } else {
                write!(f, "{}^{}", name, i)?;
            }
        }
    }
    Ok(())
}

impl fmt::Display for KDisp<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            K::Q(r) => fmt_bigrational(r, f),
            K::P { num, den } => {
                write!(f, "(")?;
                fmt_ppoly(num, self.1, f)?;
                write!(f, ")/(")?;
                fmt_ppoly(den, self.1, f)?;
                write!(f, ")")
            }
        }
    }
}

/// A local exponent: q + p*param with rational q, p. Ordered by evaluating
/// the parameter just above 1/2 (key: value at 1/2, then the parameter part).
/// This is the convention under which the Bessel-type basis computations of
/// the source examples come out right: 2n - 1 counts as positive but < 1.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub struct Expo {
    pub q: Rational64,
    pub p: Rational64,
}

impl Expo {
    pub fn zero() -> Self {
        Expo {
            q: Rational64::zero(),
            p: Rational64::zero(),
        }
    }
    pub fn from_int(n: i64) -> Self {
        Expo {
            q: Rational64::from(n),
            p: Rational64::zero(),
        }
    }
    pub fn from_ratio(n: i64, d: i64) -> Self {
        Expo {
            q: Rational64::new(n, d),
            p: Rational64::zero(),
        }
    }
    pub fn is_rational(&self) -> bool {
        self.p.is_zero()
    }
    pub fn add(&self, o: &Expo) -> Expo {
        Expo {
            q: self.q + o.q,
            p: self.p + o.p,
        }
    }
    pub fn sub(&self, o: &Expo) -> Expo {
        Expo {
            q: self.q - o.q,
            p: self.p - o.p,
        }
    }
    pub fn add_q(&self, r: Rational64) -> Expo {
        Expo {
            q: self.q + r,
            p: self.p,
        }
    }
    /// floor, defined only for purely rational exponents
    pub fn floor_int(&self) -> Option<i64> {
        if self.is_rational() {
            Some(self.q.floor().to_integer())
        } else {
            None
        }
    }
    /// smallest integer m with from_int(m) >= self
    pub fn ceil_int(&self) -> i64 {
        let half = Rational64::new(1, 2);
        let v = self.q + self.p * half;
        let fl = v.floor().to_integer();
        if v.is_integer() {
            if self.p > Rational64::zero() {
                fl + 1
            } else {
                fl
            }
        } else {
            fl + 1
        }
    }
    pub fn div_int(&self, s: i64) -> Expo {
        Expo {
            q: self.q / Rational64::from(s),
            p: self.p / Rational64::from(s),
        }
    }
    /// the field element q + p*param
    pub fn to_k(&self) -> K {
        let q = K::from_ratio(*self.q.numer(), *self.q.denom());
        let p = K::from_ratio(*self.p.numer(), *self.p.denom());
        q.add(&p.mul(&K::param()))
    }
    /// build from an affine field element, if it is one with small enough coefficients
    pub fn from_k(k: &K) -> Option<Expo> {
        let (a, b) = k.as_affine()?;
        Some(Expo {
            q: big_to_r64(&a)?,
            p: big_to_r64(&b)?,
        })
    }
}

pub fn big_to_r64(r: &BigRational) -> Option<Rational64> {
    use num_traits::ToPrimitive;
    Some(Rational64::new(r.numer().to_i64()?, r.denom().to_i64()?))
}

impl PartialOrd for Expo {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Expo {
    fn cmp(&self, other: &Self) -> Ordering {
        let half = Rational64::new(1, 2);
        let a = self.q + self.p * half;
        let b = other.q + other.p * half;
        a.cmp(&b).then(self.p.cmp(&other.p))
    }
}

impl fmt::Display for Expo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.p.is_zero() {
            write!(f, "{}", self.q)
        } else if self.q.is_zero() {
            write!(f, "{}*param", self.p)
        } else {
            write!(f, "{} + {}*param", self.q, self.p)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn ppoly_divrem_gcd() {
        // (v^2 - 1) / (v + 1) = v - 1
        let a = PPoly {
            c: vec![q(-1, 1), q(0, 1), q(1, 1)],
        };
        let b = PPoly {
            c: vec![q(1, 1), q(1, 1)],
        };
        let (quo, rem) = a.divrem(&b);
        assert!(rem.is_zero());
        assert_eq!(quo.c, vec![q(-1, 1), q(1, 1)]);
        let g = a.gcd(&b);
        assert_eq!(g.c, vec![q(1, 1), q(1, 1)]);
    }

    #[test]
    fn k_field_ops() {
        let t = K::param();
        let x = t.mul(&t).sub(&K::one()); // t^2 - 1
        let y = t.add(&K::one()); // t + 1
        let r = x.div(&y).unwrap(); // t - 1
        assert_eq!(r, t.sub(&K::one()));
        assert_eq!(r.mul(&y), x);
        // collapse to Q
        let c = y.sub(&t);
        assert_eq!(c, K::one());
    }

    #[test]
    fn k_shift_and_affine() {
        let n = K::param();
        let e = n.mul(&K::from_i64(2)); // 2n
        let (a, b) = e.as_affine().unwrap();
        assert!(a.is_zero());
        assert_eq!(b, q(2, 1));
        let s = e.shift_param(); // 2n + 2
        let (a2, b2) = s.as_affine().unwrap();
        assert_eq!(a2, q(2, 1));
        assert_eq!(b2, q(2, 1));
    }

    #[test]
    fn k_sqrt() {
        let n = K::param();
        let sq = n.mul(&n).mul(&K::from_i64(4)); // 4n^2
        let r = sq.sqrt().unwrap();
        assert_eq!(r.mul(&r), sq);
        assert!(n.add(&K::one()).sqrt().is_none());
        assert_eq!(K::from_ratio(9, 4).sqrt().unwrap(), K::from_ratio(3, 2));
    }

    #[test]
    fn expo_order_evaluates_near_one_half() {
        let e = |q: i64, p: i64| Expo {
            q: Rational64::new(q, 1),
            p: Rational64::new(p, 1),
        };
        // 2n - 1 is positive but below 1; 2n - 2 is negative
        assert!(e(-1, 2) > Expo::zero());
        assert!(e(-1, 2) < Expo::from_int(1));
        assert!(e(-2, 2) < Expo::zero());
        assert!(e(0, 2) > Expo::from_int(1));
        assert!(Expo::from_ratio(1, 2) > Expo::zero());
        // ceilings under the same convention
        assert_eq!(e(-1, 2).ceil_int(), 1);
        assert_eq!(e(1, -2).ceil_int(), 0);
        assert_eq!(Expo::from_ratio(-1, 2).ceil_int(), 0);
        assert_eq!(Expo::from_int(-2).ceil_int(), -2);
    }
}
