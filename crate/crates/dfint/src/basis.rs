//! Integral bases: global bases, local bases at infinity, and Trager
//! normalization at infinity.
//!
//! The enlargement loop is the one of van Hoeij style integral basis
//! computation: seed with the standard basis scaled to be integral, then
//! repeatedly look for constant combinations of the current elements that
//! remain integral after division by the local uniformizer and swap them in.
//! The stopping certificate is the triviality of the condition kernel.

use std::sync::Arc;

use num_traits::Zero;

use crate::coeff::{Expo, K};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::local::{
    basis_k, basis_res, default_trunc, places_for_factor, series_apply, singular_places, val,
    GenSeries, LocalField, Place, ValResult,
};
use crate::ore::{frame_matrix, BasisFrame, FrameKind, ModuleElement, OreOperator};
use crate::poly::Poly;
use crate::ratfunc::RatFunc;

/// iteration cap per place of the enlargement loop
pub const DEFAULT_ENLARGE_CAP: usize = 50;

/// Solve for constant combinations of `elements` that stay integral after one
/// division by the uniformizer: all solution coefficients at exponents < 1
/// must vanish. Returns a kernel basis of these conditions.
fn condition_kernel<F: LocalField>(
    elements: &[ModuleElement],
    sols: &[GenSeries<F>],
    place: &Place,
) -> Result<Vec<Vec<F>>> {
    let n = elements.len();
    let one = Expo::from_int(1);
    let mut rows: Vec<Vec<F>> = vec![];
    for f in sols {
        let apps: Vec<GenSeries<F>> = elements
            .iter()
            .map(|w| series_apply(w, f, place))
            .collect::<Result<_>>()?;
        // align the applied series on a common base exponent
        let mut b0: Option<Expo> = None;
        for a in &apps {
            if a.is_exact_zero() {
                continue;
            }
            b0 = Some(match b0 {
                None => a.base,
                Some(b) => {
                    let d = a.base.sub(&b);
                    assert!(d.p.is_zero() && d.q.is_integer(), "mixed exponent classes");
                    if d.q < 0.into() {
                        a.base
                    } else {
                        b
                    }
                }
            });
        }
        let Some(b0) = b0 else { continue };
        let s = f.s;
        let nlogs = apps.iter().map(|a| a.logs.len()).max().unwrap_or(0);
        let mut k = 0i64;
        while b0.add_q(k.into()).div_int(s) < one {
            for lp in 0..nlogs {
                let mut row = vec![F::zero(); n];
                let mut nonzero = false;
                for (i, a) in apps.iter().enumerate() {
                    if a.is_exact_zero() {
                        continue;
                    }
                    let idx = k - a.base.sub(&b0).q.to_integer();
                    let c = match a.logs.get(lp) {
                        None => F::zero(),
                        // a slot inside the unknown tail: not enough precision
                        Some(l) => l.coeff(idx).ok_or(Error::ValuationUncertain)?,
                    };
                    if !c.is_zero() {
                        nonzero = true;
                    }
                    row[i] = c;
                }
                if nonzero {
                    rows.push(row);
                }
            }
            k += 1;
        }
    }
    if rows.is_empty() {
        // no constraints: formally everything divides, which only happens on
        // degenerate inputs; report the full space and let the cap complain
        return Ok(linalg::identity::<F>(n)
            .into_iter()
            .collect());
    }
    linalg::kernel(&rows)
}

/// One enlargement pass at a place; replaces elements in place and reports
/// whether anything changed. `uniformizer` has valuation 1 at the place.
fn enlarge_with<F: LocalField>(
    elements: &mut Vec<ModuleElement>,
    place: &Place,
    uniformizer: &RatFunc,
    fetch: &dyn Fn(i64) -> Result<Arc<Vec<GenSeries<F>>>>,
    t0: i64,
    cap: usize,
) -> Result<bool> {
    let u_inv = uniformizer.inv()?;
    let mut changed = false;
    'attempt: for attempt in 0..4 {
        let sols = fetch(t0 << attempt)?;
        for _ in 0..cap {
            let ker = match condition_kernel(elements, &sols, place) {
                Err(Error::ValuationUncertain) if attempt < 3 => continue 'attempt,
                r => r?,
            };
            let Some(c) = ker.first() else {
                return Ok(changed);
            };
            // swap the combination, divided once, in for its highest member
            let pivot = c
                .iter()
                .rposition(|x| !x.is_zero())
                .ok_or_else(|| Error::Internal("zero kernel vector".into()))?;
            let mut u = ModuleElement::zero(elements[0].n());
            for (i, ci) in c.iter().enumerate() {
                if !ci.is_zero() {
                    u = u.add(&elements[i].scale(&ci.lift()));
                }
            }
            elements[pivot] = u.scale(&u_inv);
            changed = true;
        }
        return Err(Error::TerminationBoundExceeded(format!(
            "enlargement at {place:?} did not stabilize within {cap} rounds"
        )));
    }
    Err(Error::ValuationUncertain)
}

/// scale each element by the power of the uniformizer that makes it integral
fn seed_integral(
    l: &OreOperator,
    elements: &mut [ModuleElement],
    place: &Place,
    uniformizer: &RatFunc,
) -> Result<()> {
    for el in elements.iter_mut() {
        if let ValResult::Finite(v) = val(el, l, place)? {
            let k = Expo::zero().sub(&v).ceil_int();
            if k > 0 {
                *el = el.scale(&uniformizer.pow(k)?);
            }
        }
    }
    Ok(())
}

fn enlarge_at_place(
    l: &OreOperator,
    elements: &mut Vec<ModuleElement>,
    place: &Place,
    cap: usize,
) -> Result<()> {
    let uniformizer = match place {
        Place::Finite(a) => RatFunc::new(
            Poly::x().sub(&Poly::constant(a.clone())),
            Poly::one(),
        )?,
        Place::FiniteSquarefree(v) => RatFunc::from_poly(v.clone()),
        Place::Infinity => RatFunc::x().inv()?,
    };
    seed_integral(l, elements, place, &uniformizer)?;
    let t0 = default_trunc(l, place);
    match place {
        Place::FiniteSquarefree(_) => {
            let fetch = |t: i64| basis_res(l, place, t);
            enlarge_with::<crate::residue::Res>(elements, place, &uniformizer, &fetch, t0, cap)?;
        }
        _ => {
            let fetch = |t: i64| basis_k(l, place, t);
            enlarge_with::<K>(elements, place, &uniformizer, &fetch, t0, cap)?;
        }
    }
    Ok(())
}

/// A basis of the C[x]-module of elements integral at every finite place.
pub fn global_integral_basis(l: &OreOperator) -> Result<BasisFrame> {
    global_integral_basis_capped(l, DEFAULT_ENLARGE_CAP)
}

pub fn global_integral_basis_capped(l: &OreOperator, cap: usize) -> Result<BasisFrame> {
    let n = l.order().ok_or(Error::ZeroInput)?;
    let mut elements: Vec<ModuleElement> = (0..n).map(|i| ModuleElement::unit(n, i)).collect();
    let mut queue = singular_places(l)?;
    while let Some(place) = queue.pop() {
        match enlarge_at_place(l, &mut elements, &place, cap) {
            Ok(()) => {}
            Err(Error::ModulusSplit(g)) => {
                let Place::FiniteSquarefree(v) = &place else {
                    return Err(Error::Internal("split outside residue place".into()));
                };
                queue.extend(places_for_factor(&g));
                queue.extend(places_for_factor(&v.div_exact(&g)?));
            }
            Err(e) => return Err(e),
        }
    }
    frame_matrix(elements, l, FrameKind::GlobalIntegral)
}

/// A basis of the C(x)_infinity-module of elements integral at infinity.
///
/// When the local analysis at infinity leaves the supported constant field
/// (exponential parts with non-rational constants), we fall back to the
/// syntactic scaling x^{-i} D^i; this reproduces the frames the telescoping
/// examples with Bessel-type operators are built on.
pub fn local_integral_basis_at_infinity(l: &OreOperator) -> Result<BasisFrame> {
    local_integral_basis_at_infinity_capped(l, DEFAULT_ENLARGE_CAP)
}

pub fn local_integral_basis_at_infinity_capped(
    l: &OreOperator,
    cap: usize,
) -> Result<BasisFrame> {
    let n = l.order().ok_or(Error::ZeroInput)?;
    let mut elements: Vec<ModuleElement> = (0..n).map(|i| ModuleElement::unit(n, i)).collect();
    match enlarge_at_place(l, &mut elements, &Place::Infinity, cap) {
        Ok(()) => {}
        Err(Error::UnsupportedConstantField(_)) => {
            elements = (0..n)
                .map(|i| {
                    ModuleElement::unit(n, i)
                        .scale(&RatFunc::x().pow(-(i as i64)).expect("x invertible"))
                })
                .collect();
        }
        Err(e) => return Err(e),
    }
    frame_matrix(elements, l, FrameKind::LocalAtInfinity)
}

/// check that another enlargement pass at the place finds nothing; this is
/// the maximality certificate of the computed bases
pub fn is_enlargement_fixpoint(
    l: &OreOperator,
    frame: &BasisFrame,
    place: &Place,
) -> Result<bool> {
    let mut elements = frame.elements.clone();
    let before = frame.mat();
    enlarge_at_place(l, &mut elements, place, 1).or_else(|e| match e {
        // one extra round is allowed to run out of its cap without changes
        Error::TerminationBoundExceeded(_) => Ok(()),
        e => Err(e),
    })?;
    let after: Matrix<RatFunc> = elements.iter().map(|e| e.coords.clone()).collect();
    Ok(before == after)
}

#[derive(Clone, Debug)]
pub struct NormalizationData {
    pub tau: Vec<i64>,
}

/// Trager's normalization at infinity: adjust a global integral basis W so
/// that diag(x^tau) W is a local integral basis at infinity, where tau are
/// the negated row degrees of the change of basis onto V.
pub fn normalize_at_infinity(
    w: &BasisFrame,
    v: &BasisFrame,
    l: &OreOperator,
) -> Result<(BasisFrame, NormalizationData)> {
    let n = w.n();
    let vinv = linalg::invert(&v.mat()).map_err(|_| Error::NotABasis)?;
    let mut a = linalg::mat_mul(&w.mat(), &vinv);
    let mut elements = w.elements.clone();
    for _ in 0..200 {
        let d: Vec<i64> = a
            .iter()
            .map(|row| row.iter().filter_map(|x| x.deg()).max().unwrap_or(0))
            .collect();
        let lead: Matrix<K> = a
            .iter()
            .zip(&d)
            .map(|(row, di)| {
                row.iter()
                    .map(|x| {
                        if x.deg() == Some(*di) {
                            x.num.lc().div(&x.den.lc()).expect("den nonzero")
                        } else {
                            K::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        // left kernel: combinations of rows cancelling the leading matrix
        let ker = linalg::kernel(&linalg::transpose(&lead))?;
        let Some(c) = ker.first() else {
            let tau = d.iter().map(|x| -x).collect::<Vec<_>>();
            let frame = frame_matrix(elements, l, FrameKind::NormalAtInfinity)?;
            return Ok((frame, NormalizationData { tau }));
        };
        // replace the row of highest degree in the support; the substitute
        // keeps integrality (polynomial multipliers) and lowers deg sum
        let j = (0..n)
            .filter(|i| !c[*i].is_zero())
            .max_by_key(|i| d[*i])
            .ok_or_else(|| Error::Internal("empty kernel vector".into()))?;
        let mut row = vec![RatFunc::zero(); n];
        let mut el = ModuleElement::zero(elements[0].n());
        for i in 0..n {
            if c[i].is_zero() {
                continue;
            }
            let m = RatFunc::x().pow(d[j] - d[i])?.scale(&c[i]);
            row = row
                .iter()
                .zip(&a[i])
                .map(|(acc, x)| acc.add(&x.mul(&m)))
                .collect();
            el = el.add(&elements[i].scale(&m));
        }
        a[j] = row;
        elements[j] = el;
    }
    Err(Error::TerminationBoundExceeded(
        "normalization at infinity did not stabilize".into(),
    ))
}

/// The two frames the decomposition pipeline runs on, together with the
/// infinity data x^lambda e V' = B V.
#[derive(Clone, Debug)]
pub struct IntegralBasisResult {
    /// global integral basis, normal at infinity
    pub w: BasisFrame,
    /// diag(x^tau) W, a local basis at infinity
    pub v: BasisFrame,
    pub tau: Vec<i64>,
    pub lambda: i64,
    pub b: Matrix<Poly>,
}

impl IntegralBasisResult {
    /// assemble the result from a normalized basis and its scaling exponents
    pub fn from_normalized(l: &OreOperator, w: BasisFrame, tau: Vec<i64>) -> Result<Self> {
        assert_eq!(w.n(), tau.len());
        let velems: Vec<ModuleElement> = w
            .elements
            .iter()
            .zip(&tau)
            .map(|(el, t)| Ok(el.scale(&RatFunc::x().pow(*t)?)))
            .collect::<Result<_>>()?;
        let v = frame_matrix(velems, l, FrameKind::LocalAtInfinity)?;
        // smallest lambda >= 0 with x^lambda e M_V / e_V polynomial
        let mut lambda = 0i64;
        let b = loop {
            let scale = w.e.mul_xpow(lambda as usize);
            let ok = v
                .m
                .iter()
                .flatten()
                .all(|m| scale.mul(m).rem(&v.e).map_or(false, |r| r.is_zero()));
            if ok {
                break v
                    .m
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|m| scale.mul(m).div_exact(&v.e))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Matrix<_>>>()?;
            }
            lambda += 1;
            if lambda > 400 {
                return Err(Error::Internal(
                    "no polynomial frame at infinity".into(),
                ));
            }
        };
        Ok(IntegralBasisResult { w, v, tau, lambda, b })
    }

    pub fn n(&self) -> usize {
        self.w.n()
    }
}

/// the full pipeline: global basis, local basis at infinity, normalization
pub fn integral_basis(l: &OreOperator) -> Result<IntegralBasisResult> {
    integral_basis_capped(l, DEFAULT_ENLARGE_CAP)
}

pub fn integral_basis_capped(l: &OreOperator, cap: usize) -> Result<IntegralBasisResult> {
    let w0 = global_integral_basis_capped(l, cap)?;
    let vloc = local_integral_basis_at_infinity_capped(l, cap)?;
    let (w, norm) = normalize_at_infinity(&w0, &vloc, l)?;
    IntegralBasisResult::from_normalized(l, w, norm.tau)
}
