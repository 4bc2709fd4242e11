//! The residue ring K[x]/<v> for a squarefree modulus v, used as the
//! coefficient domain when working locally at all roots of v at once.
//!
//! Inversion of a zero divisor reports the discovered factor of v via
//! `Error::ModulusSplit`; callers split v and restart on the factors.

use std::sync::Arc;

use crate::coeff::K;
use crate::error::{Error, Result};
use crate::linalg::Fld;
use crate::poly::{invmod, Poly};

/// Element of K[x]/<v>. `modulus: None` marks a constant of K, compatible
/// with any modulus; this lets `Fld::zero()` and friends work without context.
#[derive(Clone, Debug)]
pub struct Res {
    pub rep: Poly,
    pub modulus: Option<Arc<Poly>>,
}

impl Res {
    pub fn constant(c: K) -> Res {
        Res {
            rep: Poly::constant(c),
            modulus: None,
        }
    }

    pub fn new(rep: Poly, modulus: &Arc<Poly>) -> Res {
        Res {
            rep: rep.rem(modulus).expect("nonzero modulus"),
            modulus: Some(modulus.clone()),
        }
    }

    /// the class of x itself
    pub fn generator(modulus: &Arc<Poly>) -> Res {
        Res::new(Poly::x(), modulus)
    }

    fn join(&self, o: &Res) -> Option<Arc<Poly>> {
        match (&self.modulus, &o.modulus) {
            (Some(a), Some(b)) => {
                assert_eq!(a.as_ref(), b.as_ref(), "mixed moduli");
                Some(a.clone())
            }
            (Some(a), None) => Some(a.clone()),
            (None, Some(b)) => Some(b.clone()),
            (None, None) => None,
        }
    }

    fn reduced(rep: Poly, modulus: Option<Arc<Poly>>) -> Res {
        let rep = match &modulus {
            Some(v) => rep.rem(v).expect("nonzero modulus"),
            None => rep,
        };
        Res { rep, modulus }
    }

    pub fn deg_modulus(&self) -> Option<usize> {
        self.modulus.as_ref().and_then(|v| v.degree())
    }

    /// the underlying constant when the representative has degree 0
    pub fn as_k(&self) -> Option<K> {
        if self.rep.is_zero() {
            Some(K::zero())
        } else if self.rep.is_constant() {
            Some(self.rep.coeff(0))
        } else {
            None
        }
    }
}

impl PartialEq for Res {
    fn eq(&self, other: &Self) -> bool {
        self.rep == other.rep
    }
}

impl Fld for Res {
    fn zero() -> Self {
        Res::constant(K::zero())
    }
    fn one() -> Self {
        Res::constant(K::one())
    }
    fn is_zero(&self) -> bool {
        self.rep.is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        Res::reduced(self.rep.add(&o.rep), self.join(o))
    }
    fn sub(&self, o: &Self) -> Self {
        Res::reduced(self.rep.sub(&o.rep), self.join(o))
    }
    fn neg(&self) -> Self {
        Res {
            rep: self.rep.neg(),
            modulus: self.modulus.clone(),
        }
    }
    fn mul(&self, o: &Self) -> Self {
        Res::reduced(self.rep.mul(&o.rep), self.join(o))
    }
    fn inv(&self) -> Result<Self> {
        if self.rep.is_zero() {
            return Err(Error::DivisionByZero);
        }
        match &self.modulus {
            None => {
                let c = self.rep.coeff(0).inv()?;
                Ok(Res::constant(c))
            }
            Some(v) => {
                let i = invmod(&self.rep, v)?;
                Ok(Res {
                    rep: i,
                    modulus: Some(v.clone()),
                })
            }
        }
    }
    fn from_i64(n: i64) -> Self {
        Res::constant(K::from_i64(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_mod_irreducible() {
        // K[x]/<x^2 - 2>: (x+1)(x-1) = 1, x * x = 2
        let v = Arc::new(Poly::from_coeffs(&[-2, 0, 1]));
        let x = Res::generator(&v);
        let one = Res::one();
        let p = x.add(&one).mul(&x.sub(&one));
        assert_eq!(p, Res::one());
        assert_eq!(x.mul(&x), Res::constant(K::from_i64(2)));
        // 1/x = x/2
        let xi = x.inv().unwrap();
        assert_eq!(xi.mul(&x), Res::one());
        assert_eq!(xi.rep, Poly::x().scale(&K::from_ratio(1, 2)));
    }

    #[test]
    fn zero_divisor_splits_modulus() {
        // K[x]/<x^2 - x>: x is a zero divisor, gcd(x, x^2 - x) = x
        let v = Arc::new(Poly::from_coeffs(&[0, -1, 1]));
        let x = Res::generator(&v);
        match x.inv() {
            Err(Error::ModulusSplit(g)) => assert_eq!(g, Poly::x()),
            other => panic!("expected split, got {other:?}"),
        }
    }

    #[test]
    fn constants_mix_with_classes() {
        let v = Arc::new(Poly::from_coeffs(&[-2, 0, 1]));
        let x = Res::generator(&v);
        let c = Res::from_i64(3);
        let s = c.add(&x);
        assert!(s.modulus.is_some());
        assert_eq!(s.rep, Poly::from_coeffs(&[3, 1]));
        assert_eq!(Res::from_i64(5).as_k(), Some(K::from_i64(5)));
        assert_eq!(x.as_k(), None);
    }
}
