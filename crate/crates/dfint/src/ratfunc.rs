//! Rational functions in x: canonical fractions of `Poly`.

use std::fmt;

use crate::coeff::K;
use crate::error::{Error, Result};
use crate::poly::{Poly, PolyDisp};

/// Canonical fraction: denominator monic, gcd(num, den) = 1.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatFunc {
    pub num: Poly,
    pub den: Poly,
}

impl RatFunc {
    pub fn new(num: Poly, den: Poly) -> Result<RatFunc> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(RatFunc {
                num: Poly::zero(),
                den: Poly::one(),
            });
        }
        let g = num.gcd(&den);
        let num = num.div_exact(&g)?;
        let den = den.div_exact(&g)?;
        let lcinv = den.lc().inv()?;
        Ok(RatFunc {
            num: num.scale(&lcinv),
            den: den.scale(&lcinv),
        })
    }
    pub fn from_poly(p: Poly) -> RatFunc {
        RatFunc {
            num: p,
            den: Poly::one(),
        }
    }
    pub fn constant(k: K) -> RatFunc {
        RatFunc::from_poly(Poly::constant(k))
    }
    pub fn from_i64(n: i64) -> RatFunc {
        RatFunc::constant(K::from_i64(n))
    }
    pub fn x() -> RatFunc {
        RatFunc::from_poly(Poly::x())
    }
    pub fn zero() -> RatFunc {
        RatFunc::from_poly(Poly::zero())
    }
    pub fn one() -> RatFunc {
        RatFunc::from_poly(Poly::one())
    }
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }
    pub fn add(&self, o: &RatFunc) -> RatFunc {
        RatFunc::new(
            self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            self.den.mul(&o.den),
        )
        .expect("nonzero denominators")
    }
    pub fn neg(&self) -> RatFunc {
        RatFunc {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }
    pub fn sub(&self, o: &RatFunc) -> RatFunc {
        self.add(&o.neg())
    }
    pub fn mul(&self, o: &RatFunc) -> RatFunc {
        RatFunc::new(self.num.mul(&o.num), self.den.mul(&o.den)).expect("nonzero denominators")
    }
    pub fn scale(&self, k: &K) -> RatFunc {
        RatFunc {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }
    pub fn inv(&self) -> Result<RatFunc> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        RatFunc::new(self.den.clone(), self.num.clone())
    }
    pub fn div(&self, o: &RatFunc) -> Result<RatFunc> {
        Ok(self.mul(&o.inv()?))
    }
    pub fn pow(&self, e: i64) -> Result<RatFunc> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut r = RatFunc::one();
        for _ in 0..e.unsigned_abs() {
            r = r.mul(&base);
        }
        Ok(r)
    }
    pub fn derivative(&self) -> RatFunc {
        RatFunc::new(
            self.num
                .derivative()
                .mul(&self.den)
                .sub(&self.num.mul(&self.den.derivative())),
            self.den.mul(&self.den),
        )
        .expect("nonzero denominators")
    }
    /// valuation at a finite rational point alpha; None means +infinity (zero input)
    pub fn nu_at(&self, alpha: &K) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        let count = |p: &Poly| -> i64 {
            let mut m = 0i64;
            let mut q = p.clone();
            loop {
                if q.eval(alpha).is_zero() {
                    let lin = Poly::x().sub(&Poly::constant(alpha.clone()));
                    q = q.div_exact(&lin).expect("root divides");
                    m += 1;
                } else {
                    return m;
                }
            }
        };
        Some(count(&self.num) - count(&self.den))
    }
    /// valuation at 0
    pub fn nu0(&self) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        Some(self.num.val0().unwrap() as i64 - self.den.val0().unwrap() as i64)
    }
    /// valuation at infinity: deg den - deg num; None means +infinity
    pub fn nu_inf(&self) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        Some(self.den.deg_i() - self.num.deg_i())
    }
    /// degree deg num - deg den; None for zero
    pub fn deg(&self) -> Option<i64> {
        self.nu_inf().map(|v| -v)
    }
    /// multiplicity of the (squarefree) polynomial v in the denominator
    pub fn den_multiplicity(&self, v: &Poly) -> usize {
        let mut m = 0;
        let mut d = self.den.clone();
        loop {
            let (q, r) = d.divrem(v).expect("v nonzero");
            if r.is_zero() {
                m += 1;
                d = q;
            } else {
                return m;
            }
        }
    }
    pub fn map_coeffs(&self, f: impl Fn(&K) -> K) -> Result<RatFunc> {
        RatFunc::new(self.num.map_coeffs(&f), self.den.map_coeffs(&f))
    }
    /// derivative with respect to the parameter of the coefficient field
    pub fn d_param(&self) -> Result<RatFunc> {
        let nd = self.num.map_coeffs(|c| c.d_param());
        let dd = self.den.map_coeffs(|c| c.d_param());
        RatFunc::new(
            nd.mul(&self.den).sub(&self.num.mul(&dd)),
            self.den.mul(&self.den),
        )
    }
    /// substitute param -> param + 1 in all coefficients
    pub fn shift_param(&self) -> Result<RatFunc> {
        self.map_coeffs(|c| c.shift_param())
    }
}

pub struct RatDisp<'a>(pub &'a RatFunc, pub char, pub char);

impl fmt::Display for RatDisp<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_polynomial() {
            if self.0.num.c.len() > 1 {
                write!(f, "({})", PolyDisp(&self.0.num, self.1, self.2))
            } else {
                write!(f, "{}", PolyDisp(&self.0.num, self.1, self.2))
            }
        } else {
            write!(
                f,
                "({})/({})",
                PolyDisp(&self.0.num, self.1, self.2),
                PolyDisp(&self.0.den, self.1, self.2)
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form() {
        // (2x^2-2)/(4x+4) == (x-1)/2
        let a = RatFunc::new(
            Poly::from_coeffs(&[-2, 0, 2]),
            Poly::from_coeffs(&[4, 4]),
        )
        .unwrap();
        let b = RatFunc::new(Poly::from_coeffs(&[-1, 1]), Poly::from_coeffs(&[2])).unwrap();
        assert_eq!(a, b);
        assert!(a.den.lc().is_one());
        assert!(a.num.gcd(&a.den).is_one());
    }

    #[test]
    fn valuations() {
        // x^2/(x-1)
        let r = RatFunc::new(Poly::from_coeffs(&[0, 0, 1]), Poly::from_coeffs(&[-1, 1])).unwrap();
        assert_eq!(r.nu0(), Some(2));
        assert_eq!(r.nu_at(&K::one()), Some(-1));
        assert_eq!(r.nu_inf(), Some(-1));
        assert_eq!(RatFunc::zero().nu_inf(), None);
    }

    #[test]
    fn derivative_quotient_rule() {
        // (1/x)' = -1/x^2
        let r = RatFunc::new(Poly::one(), Poly::x()).unwrap();
        let d = r.derivative();
        assert_eq!(
            d,
            RatFunc::new(Poly::from_coeffs(&[-1]), Poly::from_coeffs(&[0, 0, 1])).unwrap()
        );
    }
}
