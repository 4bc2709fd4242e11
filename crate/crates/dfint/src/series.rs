//! Truncated Laurent series with explicit precision tracking.
//!
//! A series stores coefficients for exponents `val .. trunc`; everything at
//! exponent >= trunc is unknown. Arithmetic propagates the tightest valid
//! truncation so that exactness is never overstated.

use crate::coeff::K;
use crate::error::{Error, Result};
use crate::linalg::Fld;
use crate::poly::Poly;
use crate::ratfunc::RatFunc;

#[derive(Clone, PartialEq, Debug)]
pub struct LSeries<F: Fld> {
    pub val: i64,
    pub coeffs: Vec<F>,
    pub trunc: i64,
}

impl<F: Fld> LSeries<F> {
    pub fn zero(trunc: i64) -> Self {
        LSeries {
            val: trunc,
            coeffs: vec![],
            trunc,
        }
    }

    pub fn new(val: i64, coeffs: Vec<F>, trunc: i64) -> Self {
        assert!(val + coeffs.len() as i64 <= trunc || coeffs.is_empty());
        let mut s = LSeries { val, coeffs, trunc };
        s.normalize();
        s
    }

    pub fn monomial(c: F, exp: i64, trunc: i64) -> Self {
        if exp >= trunc || c.is_zero() {
            return LSeries::zero(trunc);
        }
        LSeries {
            val: exp,
            coeffs: vec![c],
            trunc,
        }
    }

    fn normalize(&mut self) {
        while self.coeffs.first().map_or(false, |c| c.is_zero()) {
            self.coeffs.remove(0);
            self.val += 1;
        }
        while self.coeffs.last().map_or(false, |c| c.is_zero()) {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.val = self.trunc;
        }
        debug_assert!(self.val + self.coeffs.len() as i64 <= self.trunc || self.coeffs.is_empty());
    }

    /// true if no nonzero coefficient is known (zero up to precision)
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// valuation; None when the series is zero up to precision
    pub fn valuation(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.val)
        }
    }

    pub fn coeff(&self, exp: i64) -> Option<F> {
        if exp >= self.trunc {
            return None;
        }
        if exp < self.val || exp >= self.val + self.coeffs.len() as i64 {
            return Some(F::zero());
        }
        Some(self.coeffs[(exp - self.val) as usize].clone())
    }

    pub fn lead(&self) -> Option<(i64, F)> {
        self.coeffs.first().map(|c| (self.val, c.clone()))
    }

    pub fn truncate(&self, trunc: i64) -> Self {
        let t = trunc.min(self.trunc);
        let keep = ((t - self.val).max(0) as usize).min(self.coeffs.len());
        let mut s = LSeries {
            val: self.val,
            coeffs: self.coeffs[..keep].to_vec(),
            trunc: t,
        };
        s.normalize();
        s
    }

    pub fn add(&self, o: &Self) -> Self {
        let trunc = self.trunc.min(o.trunc);
        if self.is_zero() {
            return o.truncate(trunc);
        }
        if o.is_zero() {
            return self.truncate(trunc);
        }
        let val = self.val.min(o.val);
        let span = (self.val + self.coeffs.len() as i64).max(o.val + o.coeffs.len() as i64) - val;
        let len = (trunc - val).max(0).min(span) as usize;
        let mut coeffs = vec![F::zero(); len];
        for (s, base) in [(self, self.val), (o, o.val)] {
            for (i, c) in s.coeffs.iter().enumerate() {
                let e = base + i as i64;
                if e < trunc {
                    let k = (e - val) as usize;
                    coeffs[k] = coeffs[k].add(c);
                }
            }
        }
        LSeries::new(val, coeffs, trunc)
    }

    pub fn neg(&self) -> Self {
        LSeries {
            val: self.val,
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
            trunc: self.trunc,
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &F) -> Self {
        if c.is_zero() {
            return LSeries::zero(self.trunc);
        }
        let mut s = LSeries {
            val: self.val,
            coeffs: self.coeffs.iter().map(|a| a.mul(c)).collect(),
            trunc: self.trunc,
        };
        s.normalize();
        s
    }

    pub fn mul_zpow(&self, k: i64) -> Self {
        LSeries {
            val: self.val + k,
            coeffs: self.coeffs.clone(),
            trunc: self.trunc + k,
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            // product valuation is at least val1 + val2; precision accordingly
            let t = (self.trunc + o.val.min(o.trunc)).min(o.trunc + self.val);
            return LSeries::zero(t);
        }
        let trunc = (self.trunc + o.val).min(o.trunc + self.val);
        let val = self.val + o.val;
        let span = (self.coeffs.len() + o.coeffs.len()) as i64 - 1;
        let len = (trunc - val).max(0).min(span) as usize;
        let mut coeffs = vec![F::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                let e = i + j;
                if (e as i64) < trunc - val {
                    coeffs[e] = coeffs[e].add(&a.mul(b));
                }
            }
        }
        LSeries::new(val, coeffs, trunc)
    }

    /// multiplicative inverse; the series must have a known nonzero lead
    pub fn inv(&self) -> Result<Self> {
        let (v, c0) = self.lead().ok_or(Error::DivisionByZero)?;
        let c0i = c0.inv()?;
        let n = (self.trunc - self.val) as usize;
        // invert the unit part u = self * z^{-v}, then shift
        let mut inv = vec![F::zero(); n];
        inv[0] = c0i.clone();
        for k in 1..n {
            let mut s = F::zero();
            for j in 1..=k {
                let a = if j < self.coeffs.len() {
                    self.coeffs[j].clone()
                } else {
                    F::zero()
                };
                s = s.add(&a.mul(&inv[k - j]));
            }
            inv[k] = s.neg().mul(&c0i);
        }
        Ok(LSeries::new(-v, inv, -v + n as i64))
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.inv()?))
    }

    /// termwise d/dz
    pub fn derivative(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (i, c) in self.coeffs.iter().enumerate() {
            let e = self.val + i as i64;
            coeffs.push(c.mul(&F::from_i64(e)));
        }
        LSeries::new(self.val - 1, coeffs, self.trunc - 1)
    }

    /// substitute z = w^k: all exponents multiplied by k
    pub fn stretch(&self, k: i64) -> Self {
        assert!(k >= 1);
        if self.is_zero() {
            return LSeries::zero(self.trunc * k);
        }
        let mut coeffs = vec![F::zero(); (self.coeffs.len() - 1) * k as usize + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * k as usize] = c.clone();
        }
        LSeries::new(self.val * k, coeffs, self.trunc * k)
    }

    pub fn map<G: Fld>(&self, f: impl Fn(&F) -> G) -> LSeries<G> {
        LSeries::new(self.val, self.coeffs.iter().map(|c| f(c)).collect(), self.trunc)
    }
}

/// series of p(alpha + z) around z = 0 (Horner in alpha + z)
pub fn poly_series<F: Fld>(coeffs: &[F], alpha: &F, trunc: i64) -> LSeries<F> {
    let shift = LSeries::new(0, vec![alpha.clone(), F::one()], trunc.max(2));
    let mut acc = LSeries::zero(trunc.max(2));
    for c in coeffs.iter().rev() {
        acc = acc.mul(&shift).truncate(trunc.max(2));
        acc = acc.add(&LSeries::monomial(c.clone(), 0, trunc.max(2)));
    }
    acc.truncate(trunc)
}

/// series of p(1/z) * z^{deg p}: the coefficient list reversed
fn poly_series_infinity(p: &Poly, trunc: i64) -> LSeries<K> {
    match p.degree() {
        None => LSeries::zero(trunc),
        Some(d) => {
            let coeffs = (0..=d).rev().map(|i| p.coeff(i)).collect();
            LSeries::new(0, coeffs, trunc.max(d as i64 + 1))
        }
    }
}

fn poly_to_field<F: Fld>(p: &Poly, embed: &impl Fn(&K) -> F) -> Vec<F> {
    match p.degree() {
        None => vec![],
        Some(d) => (0..=d).map(|i| embed(&p.coeff(i))).collect(),
    }
}

/// expansion of r at the finite point x = alpha in the local variable z = x - alpha,
/// with coefficients embedded into F (identity for K, reduction for residue rings)
pub fn ratfunc_series_at<F: Fld>(
    r: &RatFunc,
    alpha: &F,
    trunc: i64,
    embed: &impl Fn(&K) -> F,
) -> Result<LSeries<F>> {
    if r.is_zero() {
        return Ok(LSeries::zero(trunc));
    }
    let probe = r.den.deg_i() + 1;
    let den0 = poly_series(&poly_to_field(&r.den, embed), alpha, probe)
        .valuation()
        .ok_or(Error::DivisionByZero)?;
    // expand the denominator far enough that the inverse is exact to order trunc
    let extra = den0.max(0);
    let t = trunc + 2 * extra + 1;
    let num = poly_series(&poly_to_field(&r.num, embed), alpha, t);
    let den = poly_series(&poly_to_field(&r.den, embed), alpha, t);
    Ok(num.div(&den)?.truncate(trunc))
}

/// expansion of r at infinity in the local variable z = 1/x
pub fn ratfunc_series_at_infinity(r: &RatFunc, trunc: i64) -> Result<LSeries<K>> {
    if r.is_zero() {
        return Ok(LSeries::zero(trunc));
    }
    let dn = r.num.deg_i();
    let dd = r.den.deg_i();
    let t = trunc + (dn - dd).abs() + 1;
    // num(1/z) = z^{-dn} N(z), den(1/z) = z^{-dd} D(z) with N, D reversed lists
    let num = poly_series_infinity(&r.num, t);
    let den = poly_series_infinity(&r.den, t);
    Ok(num.div(&den)?.mul_zpow(dd - dn).truncate(trunc))
}
