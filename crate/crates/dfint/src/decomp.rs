//! Additive decomposition: combine the finite and infinity Hermite
//! reductions, confine the remainder to a finite-dimensional space, and
//! project away everything integrable. The result decides integrability:
//! f = g' + (1/d) R W + (1/(x^lambda e)) Q2 V with f integrable exactly
//! when R and Q2 vanish.

use crate::basis::IntegralBasisResult;
use crate::coeff::K;
use crate::error::{Error, Result};
use crate::hermite::{hermite_reduce_finite, hermite_reduce_infinity, FiniteRemainder};
use crate::linalg;
use crate::ore::{derivative_std, ModuleElement, OreOperator};
use crate::poly::{xgcd, Poly};
use crate::ratfunc::RatFunc;

/// The size data of Theorem "additive decomposition": the windows of the
/// remainder space K and of the candidate-integral space U.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompositionBounds {
    pub lambda: i64,
    pub e: Poly,
    pub u: Poly,
    pub tau: Vec<i64>,
    /// K window: Laurent exponents mu..=delta over x^lambda e
    pub mu: i64,
    pub delta: i64,
    /// U window: Laurent exponents mu_p..=delta_p over u
    pub mu_p: i64,
    pub delta_p: i64,
}

pub fn compute_bounds(ib: &IntegralBasisResult) -> DecompositionBounds {
    let e = ib.w.e.clone();
    let u = e.gcd(&e.derivative());
    let deg_b = ib
        .b
        .iter()
        .flatten()
        .filter(|p| !p.is_zero())
        .map(|p| p.deg_i())
        .max()
        .unwrap_or(i64::MIN);
    let deg_e = e.deg_i();
    let lambda = ib.lambda;
    let mu = ib.tau.iter().map(|t| -t).chain([0]).min().unwrap();
    let delta = (lambda + deg_e).max(deg_b) - 1;
    let nu0_u = u.val0().unwrap_or(0) as i64;
    let mu_p = ib.tau.iter().map(|t| -t).chain([nu0_u]).min().unwrap();
    let delta_p = u.deg_i().max(deg_b - lambda - deg_e + u.deg_i());
    DecompositionBounds {
        lambda,
        e,
        u,
        tau: ib.tau.clone(),
        mu,
        delta,
        mu_p,
        delta_p,
    }
}

/// Split a finite Hermite remainder h_i/(d e) into the d-supported and
/// e-supported parts: h_i = r_i e + s_i d with deg r_i < deg d.
pub fn split_remainder(rem: &FiniteRemainder) -> Result<(Vec<Poly>, Vec<Poly>)> {
    if !rem.d.gcd(&rem.e).is_one() {
        return Err(Error::Precondition("d and e must be coprime"));
    }
    if rem.d.is_constant() {
        let dinv = rem.d.lc().inv()?;
        return Ok((
            vec![Poly::zero(); rem.h.len()],
            rem.h.iter().map(|h| h.scale(&dinv)).collect(),
        ));
    }
    let (g, se, _) = xgcd(&rem.e, &rem.d)?;
    if !g.is_one() {
        return Err(Error::Precondition("d and e must be coprime"));
    }
    let mut r = vec![];
    let mut s = vec![];
    for h in &rem.h {
        let ri = h.mul(&se).rem(&rem.d)?;
        let si = h.sub(&ri.mul(&rem.e)).div_exact(&rem.d)?;
        r.push(ri);
        s.push(si);
    }
    Ok((r, s))
}

/// coefficient of x^j in a Laurent polynomial given as a rational function
/// whose denominator is a monomial
pub(crate) fn laurent_coeff(r: &RatFunc, j: i64) -> Result<K> {
    if r.is_zero() {
        return Ok(K::zero());
    }
    let den_val = r.den.val0().unwrap() ;
    if den_val != r.den.degree().unwrap() {
        return Err(Error::ReductionContract("expected a Laurent polynomial"));
    }
    let idx = j + den_val as i64;
    let c = if idx < 0 {
        K::zero()
    } else {
        r.num.coeff(idx as usize)
    };
    c.div(&r.den.lc())
}

/// An element of K∩U' in reduced form: its coordinates over the K-window,
/// its leading position, and an element of U whose derivative it is.
#[derive(Clone, Debug)]
struct KuElement {
    kcoords: Vec<K>,
    lead: usize,
    integral: Vec<K>,
}

/// The spaces of the projection stage: the candidate-integral space U, the
/// remainder window K, and a reduced basis of K∩U' paired with integrals.
#[derive(Clone, Debug)]
pub struct CandidateSpaces {
    pub n: usize,
    pub bounds: DecompositionBounds,
    /// elements x^j v_i / u in V-frame coordinates, j ascending then i
    pub u_basis: Vec<ModuleElement>,
    /// derivatives of the U basis, V-frame coordinates
    pub u_prime: Vec<ModuleElement>,
    /// K-window terms (j, i) in term-over-position order, largest first
    pub k_terms: Vec<(i64, usize)>,
    ku: Vec<KuElement>,
}

/// position of (j, i) in the descending term-over-position list
fn term_index(terms: &[(i64, usize)], j: i64, i: usize) -> Option<usize> {
    terms.iter().position(|t| *t == (j, i))
}

pub fn candidate_spaces(
    bounds: &DecompositionBounds,
    v: &crate::ore::BasisFrame,
) -> Result<CandidateSpaces> {
    let n = v.n();
    let xle = RatFunc::from_poly(bounds.e.mul_xpow(bounds.lambda.max(0) as usize));
    let u_inv = RatFunc::from_poly(bounds.u.clone()).inv()?;
    let xle_inv = xle.inv()?;

    // terms x^j v_i, descending in j, ascending in i: term-over-position
    let mut k_terms = vec![];
    for j in (bounds.mu..=bounds.delta).rev() {
        for i in 0..n {
            k_terms.push((j, i));
        }
    }

    let mut u_basis = vec![];
    let mut u_prime = vec![];
    for j in bounds.mu_p..=bounds.delta_p {
        for i in 0..n {
            let mut el = ModuleElement::zero(n);
            el.coords[i] = RatFunc::x().pow(j)?.mul(&u_inv);
            u_prime.push(v.derivative(&el));
            u_basis.push(el);
        }
    }

    // K∩U' as the kernel of [K-generators | -U'-generators] over the
    // constants: flatten everything over a common polynomial denominator
    let dim_k = k_terms.len();
    let dim_u = u_basis.len();
    let mut gens: Vec<Vec<RatFunc>> = vec![];
    for (j, i) in &k_terms {
        let mut el = vec![RatFunc::zero(); n];
        el[*i] = RatFunc::x().pow(*j)?.mul(&xle_inv);
        gens.push(el);
    }
    for up in &u_prime {
        gens.push(up.coords.clone());
    }
    let mut den = Poly::one();
    for g in &gens {
        for c in g {
            den = den.lcm(&c.den);
        }
    }
    let flat: Vec<Vec<Poly>> = gens
        .iter()
        .map(|g| {
            g.iter()
                .map(|c| {
                    let t = c.mul(&RatFunc::from_poly(den.clone()));
                    assert!(t.is_polynomial());
                    t.num.clone()
                })
                .collect()
        })
        .collect();
    let maxdeg = flat
        .iter()
        .flatten()
        .filter_map(|p| p.degree())
        .max()
        .unwrap_or(0);
    // one equation per (coordinate, coefficient); unknowns (a | b)
    let mut rows: Vec<Vec<K>> = vec![];
    for i in 0..n {
        for deg in 0..=maxdeg {
            let mut row = Vec::with_capacity(dim_k + dim_u);
            for (r, f) in flat.iter().enumerate() {
                let c = f[i].coeff(deg);
                row.push(if r < dim_k { c } else { c.neg() });
            }
            if row.iter().any(|c| !c.is_zero()) {
                rows.push(row);
            }
        }
    }
    let kernel = if rows.is_empty() {
        linalg::identity::<K>(dim_k + dim_u)
    } else {
        linalg::kernel(&rows)?
    };

    // keep only vectors with a nonzero K-part and reduce them to echelon
    // form along the term order; carry the U-part as the integral
    let mut ku: Vec<KuElement> = vec![];
    for vec in kernel {
        let mut kcoords: Vec<K> = vec[..dim_k].to_vec();
        let mut integral: Vec<K> = vec[dim_k..].to_vec();
        for el in &ku {
            let c = kcoords[el.lead].clone();
            if c.is_zero() {
                continue;
            }
            for (x, y) in kcoords.iter_mut().zip(&el.kcoords) {
                *x = x.sub(&c.mul(y));
            }
            for (x, y) in integral.iter_mut().zip(&el.integral) {
                *x = x.sub(&c.mul(y));
            }
        }
        let Some(lead) = kcoords.iter().position(|c| !c.is_zero()) else {
            continue;
        };
        let s = kcoords[lead].inv()?;
        for x in kcoords.iter_mut() {
            *x = x.mul(&s);
        }
        for x in integral.iter_mut() {
            *x = x.mul(&s);
        }
        // back-substitute into the earlier rows to keep the basis reduced
        for el in ku.iter_mut() {
            let c = el.kcoords[lead].clone();
            if c.is_zero() {
                continue;
            }
            for (x, y) in el.kcoords.iter_mut().zip(&kcoords) {
                *x = x.sub(&c.mul(y));
            }
            for (x, y) in el.integral.iter_mut().zip(&integral) {
                *x = x.sub(&c.mul(y));
            }
        }
        ku.push(KuElement { kcoords, lead, integral });
    }
    ku.sort_by_key(|el| el.lead);

    Ok(CandidateSpaces {
        n,
        bounds: bounds.clone(),
        u_basis,
        u_prime,
        k_terms,
        ku,
    })
}

impl CandidateSpaces {
    pub fn dim_k(&self) -> usize {
        self.k_terms.len()
    }
    pub fn dim_u(&self) -> usize {
        self.u_basis.len()
    }
    pub fn dim_ku(&self) -> usize {
        self.ku.len()
    }
    /// dimension of the standard complement N_V of K∩U' in K
    pub fn dim_nv(&self) -> usize {
        self.dim_k() - self.dim_ku()
    }

    /// a basis of K∩U' in V-frame coordinates
    pub fn ku_basis(&self) -> Result<Vec<ModuleElement>> {
        self.ku.iter().map(|el| self.from_kcoords(&el.kcoords)).collect()
    }

    /// the leading K-window terms (j, i) of the reduced K∩U' basis
    pub fn ku_leading_terms(&self) -> Vec<(i64, usize)> {
        self.ku.iter().map(|el| self.k_terms[el.lead]).collect()
    }

    fn from_kcoords(&self, coords: &[K]) -> Result<ModuleElement> {
        let xle = RatFunc::from_poly(
            self.bounds.e.mul_xpow(self.bounds.lambda.max(0) as usize),
        );
        let mut el = ModuleElement::zero(self.n);
        for (c, (j, i)) in coords.iter().zip(&self.k_terms) {
            if !c.is_zero() {
                let t = RatFunc::x().pow(*j)?.scale(c).div(&xle)?;
                el.coords[*i] = el.coords[*i].add(&t);
            }
        }
        Ok(el)
    }

    /// K-window coordinates of an element of K given in V-frame coordinates
    pub fn kcoords_of(&self, q: &ModuleElement) -> Result<Vec<K>> {
        let xle = RatFunc::from_poly(
            self.bounds.e.mul_xpow(self.bounds.lambda.max(0) as usize),
        );
        let mut out = vec![K::zero(); self.k_terms.len()];
        for i in 0..self.n {
            let qi = q.coords[i].mul(&xle);
            if qi.is_zero() {
                continue;
            }
            // every monomial of Q_i must lie inside the K window
            if !self.check_window(&qi)? {
                return Err(Error::ReductionContract("element outside the K window"));
            }
            for j in self.bounds.mu..=self.bounds.delta {
                if let Some(idx) = term_index(&self.k_terms, j, i) {
                    out[idx] = laurent_coeff(&qi, j)?;
                }
            }
        }
        Ok(out)
    }

    fn check_window(&self, qi: &RatFunc) -> Result<bool> {
        if qi.is_zero() {
            return Ok(true);
        }
        let deg = qi.deg().unwrap();
        let val = qi.nu0().unwrap();
        Ok(deg <= self.bounds.delta && val >= self.bounds.mu)
    }

    /// Projection onto the standard complement: q = (element of K∩U') + q2
    /// with q2 free of the K∩U' leading terms; the removed part is returned
    /// as an element g1 of U with g1' equal to it.
    pub fn project(&self, q: &ModuleElement) -> Result<(ModuleElement, ModuleElement)> {
        let mut coords = self.kcoords_of(q)?;
        let mut gcomb = vec![K::zero(); self.dim_u()];
        for el in &self.ku {
            let c = coords[el.lead].clone();
            if c.is_zero() {
                continue;
            }
            for (x, y) in coords.iter_mut().zip(&el.kcoords) {
                *x = x.sub(&c.mul(y));
            }
            for (x, y) in gcomb.iter_mut().zip(&el.integral) {
                *x = x.add(&c.mul(y));
            }
        }
        let q2 = self.from_kcoords(&coords)?;
        let mut g1 = ModuleElement::zero(self.n);
        for (c, b) in gcomb.iter().zip(&self.u_basis) {
            if !c.is_zero() {
                g1 = g1.add(&b.scale(&RatFunc::constant(c.clone())));
            }
        }
        Ok((q2, g1))
    }
}

/// The decomposition of Theorem "additive decomposition", EQ:add2.
#[derive(Clone, Debug)]
pub struct AdditiveDecomposition {
    /// integrated part, standard coordinates
    pub g: ModuleElement,
    /// numerators of the simple-pole part over d, W-frame coordinates
    pub r: Vec<Poly>,
    pub d: Poly,
    /// Laurent numerators of the remainder over x^lambda e, V-frame
    /// coordinates, confined to the standard complement N_V
    pub q2: Vec<RatFunc>,
}

impl AdditiveDecomposition {
    pub fn integrable(&self) -> bool {
        self.r.iter().all(|p| p.is_zero()) && self.q2.iter().all(|c| c.is_zero())
    }

    /// the full remainder (1/d) R W + (1/(x^lambda e)) Q2 V in standard
    /// coordinates
    pub fn remainder(&self, ib: &IntegralBasisResult) -> Result<ModuleElement> {
        let dinv = RatFunc::from_poly(self.d.clone()).inv()?;
        let rw = ModuleElement::from_coords(
            self.r
                .iter()
                .map(|p| RatFunc::from_poly(p.clone()).mul(&dinv))
                .collect(),
        );
        let xle = RatFunc::from_poly(ib.w.e.mul_xpow(ib.lambda.max(0) as usize));
        let qv = ModuleElement::from_coords(
            self.q2
                .iter()
                .map(|c| c.div(&xle))
                .collect::<Result<_>>()?,
        );
        Ok(ib.w.to_standard(&rw).add(&ib.v.to_standard(&qv)))
    }
}

/// Decompose f (standard coordinates) as f = g' + (1/d) R W +
/// (1/(x^lambda e)) Q2 V with Q2 in the standard complement N_V.
pub fn additive_decompose(
    f: &ModuleElement,
    ib: &IntegralBasisResult,
    l: &OreOperator,
) -> Result<AdditiveDecomposition> {
    let bounds = compute_bounds(ib);
    let spaces = candidate_spaces(&bounds, &ib.v)?;
    decompose_with_spaces(f, ib, l, &spaces)
}

/// Decomposition with precomputed spaces (the telescoping loop reuses them).
pub fn decompose_with_spaces(
    f: &ModuleElement,
    ib: &IntegralBasisResult,
    l: &OreOperator,
    spaces: &CandidateSpaces,
) -> Result<AdditiveDecomposition> {
    let n = ib.n();
    assert_eq!(f.n(), n);
    let fw = ib.w.from_standard(f)?;
    let fin = hermite_reduce_finite(&fw, &ib.w)?;
    let (r, s) = split_remainder(&fin)?;

    // (1/e) S W = (1/(x^lambda e)) S~ V: V-frame coordinates S_i/(e x^tau_i)
    let e_inv = RatFunc::from_poly(fin.e.clone()).inv()?;
    let scoords: Vec<RatFunc> = (0..n)
        .map(|i| {
            Ok(RatFunc::from_poly(s[i].clone())
                .mul(&e_inv)
                .mul(&RatFunc::x().pow(-ib.tau[i])?))
        })
        .collect::<Result<_>>()?;
    let inf = hermite_reduce_infinity(&ModuleElement::from_coords(scoords), &ib.v)?;

    let (q2el, g1) = spaces.project(&ModuleElement::from_coords(inf.h.clone()))?;

    let g = ib
        .w
        .to_standard(&fin.g)
        .add(&ib.v.to_standard(&inf.g))
        .add(&ib.v.to_standard(&g1));

    let xle = RatFunc::from_poly(ib.w.e.mul_xpow(ib.lambda.max(0) as usize));
    let q2: Vec<RatFunc> = q2el.coords.iter().map(|c| c.mul(&xle)).collect();

    let out = AdditiveDecomposition { g, r, d: fin.d, q2 };
    // exact reconstruction in standard coordinates
    let back = derivative_std(&out.g, l).add(&out.remainder(ib)?);
    if !back.sub(f).is_zero() {
        return Err(Error::ReductionContract("decomposition does not reconstruct"));
    }
    Ok(out)
}

/// Either an antiderivative or the canonical nonzero remainder witness.
#[derive(Clone, Debug)]
pub enum Integration {
    Integrable(ModuleElement),
    NotIntegrable(AdditiveDecomposition),
}

/// Decide integrability of f (standard coordinates) and return an
/// antiderivative when one exists.
pub fn integrate(
    f: &ModuleElement,
    ib: &IntegralBasisResult,
    l: &OreOperator,
) -> Result<Integration> {
    let dec = additive_decompose(f, ib, l)?;
    if dec.integrable() {
        Ok(Integration::Integrable(dec.g))
    } else {
        Ok(Integration::NotIntegrable(dec))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::integral_basis;
    use crate::ore::{op_from_polys, rf};

    fn p(v: &[i64]) -> Poly {
        Poly::from_coeffs(v)
    }

    fn setup_nonfuchsian_infinity() -> (OreOperator, IntegralBasisResult) {
        // x D^2 - (3x^3+2) D with W = V = (1, x^{-2} D)
        let l = op_from_polys(&[&[0], &[-2, 0, 0, -3], &[0, 1]]);
        let ib = integral_basis(&l).unwrap();
        (l, ib)
    }

    fn setup_fuchsian_at_zero() -> (OreOperator, IntegralBasisResult) {
        // x^3 D^2 + (3x^2+2) D with W = V = (1, x^3 D)
        let l = op_from_polys(&[&[0], &[2, 0, 3], &[0, 0, 0, 1]]);
        let ib = integral_basis(&l).unwrap();
        (l, ib)
    }

    #[test]
    fn bounds_for_the_two_worked_operators() {
        let (_, ib1) = setup_nonfuchsian_infinity();
        let b1 = compute_bounds(&ib1);
        assert_eq!((b1.lambda, b1.mu, b1.delta), (0, 0, 1));
        assert_eq!(b1.u, Poly::one());
        assert_eq!((b1.mu_p, b1.delta_p), (0, 2));

        let (_, ib2) = setup_fuchsian_at_zero();
        let b2 = compute_bounds(&ib2);
        assert_eq!((b2.lambda, b2.mu, b2.delta), (0, 0, 2));
        assert_eq!(b2.u, p(&[0, 0, 1]));
        assert_eq!((b2.mu_p, b2.delta_p), (0, 2));
    }

    #[test]
    fn candidate_spaces_match_first_worked_example() {
        let (_, ib) = setup_nonfuchsian_infinity();
        let bounds = compute_bounds(&ib);
        let spaces = candidate_spaces(&bounds, &ib.v).unwrap();
        // U basis: w1, w2, x w1, x w2, x^2 w1, x^2 w2
        assert_eq!(spaces.dim_u(), 6);
        for (s, (j, i)) in spaces
            .u_basis
            .iter()
            .zip([(0, 0), (0, 1), (1, 0), (1, 1), (2, 0), (2, 1)])
        {
            let mut expect = ModuleElement::zero(2);
            expect.coords[i] = RatFunc::x().pow(j).unwrap();
            assert_eq!(s, &expect);
        }
        // U' generators as printed: x^2 w2, 3x^2 w2, w1 + x^3 w2, ...
        let up: Vec<Vec<RatFunc>> = spaces.u_prime.iter().map(|e| e.coords.clone()).collect();
        assert_eq!(up[0], vec![RatFunc::zero(), rf(&[0, 0, 1], &[1])]);
        assert_eq!(up[1], vec![RatFunc::zero(), rf(&[0, 0, 3], &[1])]);
        assert_eq!(up[2], vec![rf(&[1], &[1]), rf(&[0, 0, 0, 1], &[1])]);
        assert_eq!(up[3], vec![RatFunc::zero(), rf(&[1, 0, 0, 3], &[1])]);
        assert_eq!(up[4], vec![rf(&[0, 2], &[1]), rf(&[0, 0, 0, 0, 1], &[1])]);
        assert_eq!(up[5], vec![RatFunc::zero(), rf(&[0, 2, 0, 0, 3], &[1])]);
        // K∩U' has the span of {3w1 - w2, 6x w1 - 2x w2}: dimension 2 with
        // leading terms x w1 and w1
        assert_eq!(spaces.dim_ku(), 2);
        assert_eq!(spaces.ku_leading_terms(), vec![(1, 0), (0, 0)]);
        let kb = spaces.ku_basis().unwrap();
        // reduced basis: x(w1 - w2/3) and w1 - w2/3
        let third = K::from_ratio(1, 3);
        assert_eq!(
            kb[0].coords,
            vec![rf(&[0, 1], &[1]), rf(&[0, -1], &[1]).scale(&third)]
        );
        assert_eq!(
            kb[1].coords,
            vec![rf(&[1], &[1]), rf(&[-1], &[1]).scale(&third)]
        );
        // and both printed generators lie in the span
        let g1 = ModuleElement::from_coords(vec![rf(&[3], &[1]), rf(&[-1], &[1])]);
        let g2 = ModuleElement::from_coords(vec![rf(&[0, 6], &[1]), rf(&[0, -2], &[1])]);
        let (r1, _) = spaces.project(&g1).unwrap();
        let (r2, _) = spaces.project(&g2).unwrap();
        assert!(r1.is_zero());
        assert!(r2.is_zero());
    }

    #[test]
    fn candidate_spaces_match_second_worked_example() {
        let (_, ib) = setup_fuchsian_at_zero();
        let bounds = compute_bounds(&ib);
        let spaces = candidate_spaces(&bounds, &ib.v).unwrap();
        // U basis: w_i/x^2, w_i/x, w_i
        assert_eq!(spaces.dim_u(), 6);
        for (s, (j, i)) in spaces
            .u_basis
            .iter()
            .zip([(0, 0), (0, 1), (1, 0), (1, 1), (2, 0), (2, 1)])
        {
            let mut expect = ModuleElement::zero(2);
            expect.coords[i] = RatFunc::x().pow(j - 2).unwrap();
            assert_eq!(s, &expect);
        }
        // the intersection has dimension 3: besides the two independent
        // directions among the commonly listed generators there is
        // 2(w1/x^2)' + (w2/x^2)' = -4 w1/x^3 - 2 w2/x^3
        assert_eq!(spaces.dim_ku(), 3);
        let printed = [
            vec![rf(&[-2], &[0, 0, 1]), rf(&[-1], &[0, 0, 1])],
            vec![RatFunc::zero(), rf(&[1], &[0, 0, 0, 1])],
            vec![RatFunc::zero(), rf(&[-2], &[0, 0, 0, 1])],
            vec![rf(&[-4], &[0, 0, 0, 1]), rf(&[-2], &[0, 0, 0, 1])],
        ];
        for coords in printed {
            let (res, _) = spaces.project(&ModuleElement::from_coords(coords)).unwrap();
            assert!(res.is_zero());
        }
    }

    #[test]
    fn decompose_nonintegrable_worked_example() {
        let (l, ib) = setup_nonfuchsian_infinity();
        // f = 4x^3 w1 + x w2 in standard coordinates: w2 = x^{-2} D
        let f = ModuleElement::from_coords(vec![rf(&[0, 0, 0, 4], &[1]), rf(&[1], &[0, 1])]);
        let dec = additive_decompose(&f, &ib, &l).unwrap();
        assert!(!dec.integrable());
        assert!(dec.r.iter().all(|p| p.is_zero()));
        // remainder (x - 4/9) w2: Q2 = (0, x - 4/9)
        assert_eq!(dec.q2[0], RatFunc::zero());
        assert_eq!(dec.q2[1], rf(&[-4, 9], &[9]));
        // integrated part x^4 w1 + (4x/9 - x^4/3) w2
        let gv = ib.v.from_standard(&dec.g).unwrap();
        assert_eq!(gv.coords[0], rf(&[0, 0, 0, 0, 1], &[1]));
        assert_eq!(gv.coords[1], rf(&[0, 4], &[9]).sub(&rf(&[0, 0, 0, 0, 1], &[3])));
    }

    #[test]
    fn decompose_integrable_worked_example() {
        let (l, ib) = setup_fuchsian_at_zero();
        // the running input ((-2x^2-x^4) w1 + (-2+3x^2-3x^4) w2)/x^4, w2 = x^3 D
        let f = ModuleElement::from_coords(vec![
            rf(&[0, 0, -2, 0, -1], &[0, 0, 0, 0, 1]),
            rf(&[-2, 0, 3, 0, -3], &[0, 1]),
        ]);
        let dec = additive_decompose(&f, &ib, &l).unwrap();
        assert!(dec.integrable());
        // antiderivative ((2/(3x) - x + 4/(3x)) w1 + (4/(3x) - 3x + 2/(3x)) w2)
        let gv = ib.v.from_standard(&dec.g).unwrap();
        assert_eq!(gv.coords[0], rf(&[2], &[0, 1]).sub(&rf(&[0, 1], &[1])));
        assert_eq!(gv.coords[1], rf(&[2], &[0, 1]).sub(&rf(&[0, 3], &[1])));
    }

    #[test]
    fn integrate_pure_e_part_input() {
        let (l, ib) = setup_fuchsian_at_zero();
        // f = (2 w1 + w2)/(2x^3) with w2 = x^3 D: standard (1/x^3, 1/2)
        let f = ModuleElement::from_coords(vec![rf(&[1], &[0, 0, 0, 1]), rf(&[1], &[2])]);
        let Integration::Integrable(g) = integrate(&f, &ib, &l).unwrap() else {
            panic!("expected an antiderivative");
        };
        assert_eq!(derivative_std(&g, &l), f);
        // the printed antiderivative (-2 w1 - w2)/(4x^2) differs from any
        // other one by a constant of A; check it via the frame directly
        let gv = ib.v.from_standard(&g).unwrap();
        let printed = vec![rf(&[-1], &[0, 0, 2]), rf(&[-1], &[0, 0, 4])];
        let diff = gv.sub(&ModuleElement::from_coords(printed));
        let diff_std = ib.v.to_standard(&diff);
        assert!(derivative_std(&diff_std, &l).is_zero());
    }

    #[test]
    fn integrate_zero_and_witness() {
        let (l, ib) = setup_nonfuchsian_infinity();
        let z = ModuleElement::zero(2);
        let Integration::Integrable(g) = integrate(&z, &ib, &l).unwrap() else {
            panic!("zero must be integrable");
        };
        assert!(g.is_zero());
        let f = ModuleElement::from_coords(vec![rf(&[0, 0, 0, 4], &[1]), rf(&[1], &[0, 1])]);
        let Integration::NotIntegrable(dec) = integrate(&f, &ib, &l).unwrap() else {
            panic!("expected a witness");
        };
        let rem = dec.remainder(&ib).unwrap();
        // (x - 4/9) w2 = (x - 4/9) x^{-2} D in standard coordinates
        assert_eq!(rem.coords[0], RatFunc::zero());
        assert_eq!(rem.coords[1], rf(&[-4, 9], &[0, 0, 9]));
    }

    #[test]
    fn derivative_roundtrip_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for (l, ib) in [setup_nonfuchsian_infinity(), setup_fuchsian_at_zero()] {
            for _ in 0..8 {
                let mut coords = vec![];
                for _ in 0..2 {
                    let num = Poly::from_coeffs(&[
                        rng.gen_range(-4..=4),
                        rng.gen_range(-4..=4),
                        rng.gen_range(-4..=4),
                    ]);
                    let k = rng.gen_range(0..=3usize);
                    coords.push(RatFunc::new(num, Poly::x().pow(k)).unwrap());
                }
                let g0 = ModuleElement::from_coords(coords);
                let f = derivative_std(&g0, &l);
                let dec = additive_decompose(&f, &ib, &l).unwrap();
                assert!(dec.integrable(), "derivative must decompose to zero remainder");
                assert_eq!(derivative_std(&dec.g, &l), f);
            }
        }
    }
}
