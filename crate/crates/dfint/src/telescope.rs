//! Reduction-based creative telescoping. The parameter of the coefficient
//! field carries a second Ore action (differentiation in t or shift in n)
//! given by a companion operator; applying it repeatedly and decomposing
//! each derivative additively turns the telescoper search into linear
//! algebra over C(t) resp. C(n) on the reduction remainders.

use crate::basis::{integral_basis, IntegralBasisResult};
use crate::coeff::K;
use crate::decomp::{
    candidate_spaces, compute_bounds, decompose_with_spaces, laurent_coeff,
    AdditiveDecomposition, CandidateSpaces,
};
use crate::error::{Error, Result};
use crate::linalg;
use crate::ore::{derivative_std, reduce_mod_l, ModuleElement, OreOperator};
use crate::poly::Poly;
use crate::ratfunc::RatFunc;

/// What the parameter operator does: d/dt, or the shift n -> n+1.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PartialKind {
    Derivation,
    Shift,
}

/// The action of the parameter operator on A = C(param)(x)[D]/<L>: the
/// operator `op` with partial(1) = op(1), plus the coefficient action
/// (t-derivative resp. n-shift). Built from the companion operator
/// partial - u of the defining ideal via `op = u`.
#[derive(Clone, Debug)]
pub struct ParamAction {
    pub kind: PartialKind,
    pub op: OreOperator,
}

impl ParamAction {
    pub fn new(kind: PartialKind, op: OreOperator) -> Self {
        ParamAction { kind, op }
    }

    /// partial applied to an element of A in standard coordinates
    pub fn apply(&self, f: &ModuleElement, l: &OreOperator) -> Result<ModuleElement> {
        let pf = f.as_operator();
        match self.kind {
            PartialKind::Derivation => {
                // D_t (a(x,t) D^j) = (da/dt) D^j + a D^j D_t, and D_t(1) = op(1)
                let coeff_part = ModuleElement::from_coords(
                    f.coords.iter().map(|c| c.d_param()).collect::<Result<_>>()?,
                );
                Ok(coeff_part.add(&reduce_mod_l(&pf.mul(&self.op), l)))
            }
            PartialKind::Shift => {
                // S_n (a(x,n) D^j) = a(x,n+1) D^j S_n, and S_n(1) = op(1)
                let shifted = pf.map_coeffs(|r| r.shift_param())?;
                Ok(reduce_mod_l(&shifted.mul(&self.op), l))
            }
        }
    }
}

/// A telescoper T = sum c_i partial^i together with its certificate g:
/// T(f) = g'. The coefficient list is monic in the highest power.
#[derive(Clone, Debug)]
pub struct Telescoper {
    pub coeffs: Vec<K>,
    pub certificate: ModuleElement,
}

impl Telescoper {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }
}

#[derive(Clone, Debug)]
pub enum TelescopingResult {
    Found(Telescoper),
    /// no telescoper of order <= the returned bound exists (possible in the
    /// shift case; in the derivation case the bound always suffices)
    NoneUpToOrder(usize),
}

/// the remainder of a decomposition flattened to a vector over the
/// constants: coefficients of R over the common denominator, then the
/// K-window coefficients of Q2
fn remainder_vector(
    dec: &AdditiveDecomposition,
    dlcm: &Poly,
    spaces: &CandidateSpaces,
) -> Result<Vec<K>> {
    let scale = dlcm.div_exact(&dec.d)?;
    let ddeg = dlcm.degree().unwrap_or(0);
    let mut out = vec![];
    for r in &dec.r {
        let p = r.mul(&scale);
        for j in 0..ddeg {
            out.push(p.coeff(j));
        }
    }
    for q in &dec.q2 {
        for j in spaces.bounds.mu..=spaces.bounds.delta {
            out.push(laurent_coeff(q, j)?);
        }
    }
    Ok(out)
}

/// Find a minimal-order telescoper for f (standard coordinates) with
/// respect to the parameter action, searching orders 0, 1, ... up to
/// `max_order` (default: the bound n deg(d) + dim N_V).
pub fn telescoper(
    f: &ModuleElement,
    l: &OreOperator,
    action: &ParamAction,
    max_order: Option<usize>,
) -> Result<TelescopingResult> {
    let ib = integral_basis(l)?;
    telescoper_with_basis(f, l, action, &ib, max_order)
}

pub fn telescoper_with_basis(
    f: &ModuleElement,
    l: &OreOperator,
    action: &ParamAction,
    ib: &IntegralBasisResult,
    max_order: Option<usize>,
) -> Result<TelescopingResult> {
    let bounds = compute_bounds(ib);
    let spaces = candidate_spaces(&bounds, &ib.v)?;
    let n = ib.n();

    let mut fs: Vec<ModuleElement> = vec![f.clone()];
    let mut decs: Vec<AdditiveDecomposition> = vec![];
    let mut order = 0usize;
    loop {
        let fi = fs[order].clone();
        decs.push(decompose_with_spaces(&fi, ib, l, &spaces)?);

        let mut dlcm = Poly::one();
        for dec in &decs {
            dlcm = dlcm.lcm(&dec.d);
        }
        let vecs: Vec<Vec<K>> = decs
            .iter()
            .map(|dec| remainder_vector(dec, &dlcm, &spaces))
            .collect::<Result<_>>()?;
        // want c with sum_i c_i vecs_i = 0: kernel of the column matrix
        let dim = vecs[0].len();
        let rows: Vec<Vec<K>> = (0..dim)
            .map(|j| vecs.iter().map(|v| v[j].clone()).collect())
            .filter(|row: &Vec<K>| row.iter().any(|c| !c.is_zero()))
            .collect();
        let ker = if rows.is_empty() {
            linalg::identity::<K>(vecs.len())
        } else {
            linalg::kernel(&rows)?
        };
        if let Some(c) = ker.into_iter().next() {
            return build_telescoper(&c, &fs, &decs, l);
        }

        let bound = n * dlcm.degree().unwrap_or(0) + spaces.dim_nv();
        let cap = max_order.unwrap_or(bound);
        if order >= cap {
            return Ok(TelescopingResult::NoneUpToOrder(cap));
        }
        fs.push(action.apply(&fi, l)?);
        order += 1;
    }
}

fn build_telescoper(
    c: &[K],
    fs: &[ModuleElement],
    decs: &[AdditiveDecomposition],
    l: &OreOperator,
) -> Result<TelescopingResult> {
    // normalize to a monic leading coefficient
    let lead = c
        .iter()
        .rposition(|x| !x.is_zero())
        .expect("kernel vector is nonzero");
    let s = c[lead].inv()?;
    let coeffs: Vec<K> = c[..=lead].iter().map(|x| x.mul(&s)).collect();

    let n = fs[0].n();
    let mut g = ModuleElement::zero(n);
    let mut tf = ModuleElement::zero(n);
    for (ci, (fi, dec)) in coeffs.iter().zip(fs.iter().zip(decs)) {
        if ci.is_zero() {
            continue;
        }
        let r = RatFunc::constant(ci.clone());
        g = g.add(&dec.g.scale(&r));
        tf = tf.add(&fi.scale(&r));
    }
    // certificate check: T(f) must literally equal g'
    if derivative_std(&g, l) != tf {
        return Err(Error::ReductionContract("telescoper certificate fails"));
    }
    Ok(TelescopingResult::Found(Telescoper {
        coeffs,
        certificate: g,
    }))
}
