//! The Ore algebra C(x)[D] with Dx = xD + 1, the quotient module
//! A = C(x)[D]/<L>, and basis frames (W, e, M) with e W' = M W.

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::poly::Poly;
use crate::ratfunc::RatFunc;

/// Operator sum of coeffs[i] * D^i. Invariant: leading coefficient nonzero
/// for nonzero operators (empty vector is the zero operator).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OreOperator {
    pub coeffs: Vec<RatFunc>,
}

impl OreOperator {
    pub fn zero() -> Self {
        OreOperator { coeffs: vec![] }
    }
    pub fn one() -> Self {
        OreOperator {
            coeffs: vec![RatFunc::one()],
        }
    }
    pub fn d() -> Self {
        OreOperator {
            coeffs: vec![RatFunc::zero(), RatFunc::one()],
        }
    }
    pub fn from_coeffs(mut coeffs: Vec<RatFunc>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        OreOperator { coeffs }
    }
    pub fn from_ratfunc(r: RatFunc) -> Self {
        OreOperator::from_coeffs(vec![r])
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    /// order in D; None for the zero operator
    pub fn order(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }
    pub fn coeff(&self, i: usize) -> RatFunc {
        self.coeffs.get(i).cloned().unwrap_or_else(RatFunc::zero)
    }
    pub fn add(&self, o: &OreOperator) -> OreOperator {
        let n = self.coeffs.len().max(o.coeffs.len());
        OreOperator::from_coeffs((0..n).map(|i| self.coeff(i).add(&o.coeff(i))).collect())
    }
    pub fn sub(&self, o: &OreOperator) -> OreOperator {
        self.add(&o.neg())
    }
    pub fn neg(&self) -> OreOperator {
        OreOperator {
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
        }
    }
    pub fn scale(&self, r: &RatFunc) -> OreOperator {
        OreOperator::from_coeffs(self.coeffs.iter().map(|c| c.mul(r)).collect())
    }
    /// left-multiply by D: D * (sum c_i D^i) = sum (c_i' D^i + c_i D^{i+1})
    fn d_times(&self) -> OreOperator {
        let mut out = vec![RatFunc::zero(); self.coeffs.len() + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] = out[i].add(&c.derivative());
            out[i + 1] = out[i + 1].add(c);
        }
        OreOperator::from_coeffs(out)
    }
    /// noncommutative product: self * other
    pub fn mul(&self, other: &OreOperator) -> OreOperator {
        let mut acc = OreOperator::zero();
        // powers[i] = D^i * other
        let mut cur = other.clone();
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                cur = cur.d_times();
            }
            if !c.is_zero() {
                acc = acc.add(&cur.scale(c));
            }
        }
        acc
    }
    /// map all rational-function coefficients
    pub fn map_coeffs(&self, f: impl Fn(&RatFunc) -> Result<RatFunc>) -> Result<OreOperator> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| f(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(OreOperator::from_coeffs(coeffs))
    }
    /// clear denominators: returns polynomial coefficients of c * self where c
    /// is the lcm of the coefficient denominators
    pub fn poly_coeffs(&self) -> Vec<Poly> {
        let mut l = Poly::one();
        for c in &self.coeffs {
            l = l.lcm(&c.den);
        }
        self.coeffs
            .iter()
            .map(|c| c.num.mul(&l.div_exact(&c.den).expect("lcm divisible")))
            .collect()
    }
}

/// Element of A in coordinates relative to some basis (standard or a frame);
/// which basis is meant is tracked by the caller.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ModuleElement {
    pub coords: Vec<RatFunc>,
}

impl ModuleElement {
    pub fn zero(n: usize) -> Self {
        ModuleElement {
            coords: vec![RatFunc::zero(); n],
        }
    }
    pub fn from_coords(coords: Vec<RatFunc>) -> Self {
        ModuleElement { coords }
    }
    pub fn unit(n: usize, i: usize) -> Self {
        let mut coords = vec![RatFunc::zero(); n];
        coords[i] = RatFunc::one();
        ModuleElement { coords }
    }
    pub fn n(&self) -> usize {
        self.coords.len()
    }
    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }
    pub fn add(&self, o: &ModuleElement) -> ModuleElement {
        ModuleElement {
            coords: self
                .coords
                .iter()
                .zip(&o.coords)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }
    pub fn sub(&self, o: &ModuleElement) -> ModuleElement {
        ModuleElement {
            coords: self
                .coords
                .iter()
                .zip(&o.coords)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }
    pub fn neg(&self) -> ModuleElement {
        ModuleElement {
            coords: self.coords.iter().map(|c| c.neg()).collect(),
        }
    }
    pub fn scale(&self, r: &RatFunc) -> ModuleElement {
        ModuleElement {
            coords: self.coords.iter().map(|c| c.mul(r)).collect(),
        }
    }
    pub fn as_operator(&self) -> OreOperator {
        OreOperator::from_coeffs(self.coords.clone())
    }
}

/// Right-reduce P modulo L: the unique representative of order < ord(L).
pub fn reduce_mod_l(p: &OreOperator, l: &OreOperator) -> ModuleElement {
    let n = l.order().expect("L nonzero");
    assert!(n >= 1, "L must have positive order");
    let mut r = p.clone();
    while let Some(d) = r.order() {
        if d < n {
            break;
        }
        let f = r.coeff(d).div(&l.coeff(n)).expect("lc nonzero");
        // r -= f * D^{d-n} * L
        let mut shift = l.clone();
        for _ in 0..(d - n) {
            shift = shift.d_times();
        }
        r = r.sub(&shift.scale(&f));
        debug_assert!(r.order().map_or(true, |d2| d2 < d));
    }
    let mut coords = vec![RatFunc::zero(); n];
    for (i, c) in r.coeffs.iter().enumerate() {
        coords[i] = c.clone();
    }
    ModuleElement { coords }
}

/// Greatest common right divisor of two operators (monic).
pub fn gcrd(a: &OreOperator, b: &OreOperator) -> OreOperator {
    let mut x = a.clone();
    let mut y = b.clone();
    while !y.is_zero() {
        if y.order().unwrap() == 0 {
            return OreOperator::one();
        }
        let r = reduce_mod_l(&x, &y).as_operator();
        x = y;
        y = r;
    }
    let lead = x.coeffs.last().cloned().unwrap_or_else(RatFunc::one);
    x.scale(&lead.inv().expect("nonzero"))
}

/// derivative of an element given in standard-basis coordinates
pub fn derivative_std(f: &ModuleElement, l: &OreOperator) -> ModuleElement {
    reduce_mod_l(&OreOperator::d().mul(&f.as_operator()), l)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FrameKind {
    GlobalIntegral,
    LocalAtInfinity,
    NormalAtInfinity,
    Plain,
}

/// A basis W of A together with (e, M) such that e W' = M W in lowest terms.
#[derive(Clone, Debug)]
pub struct BasisFrame {
    /// basis elements in standard coordinates
    pub elements: Vec<ModuleElement>,
    pub e: Poly,
    pub m: Matrix<Poly>,
    pub kind: FrameKind,
}

impl BasisFrame {
    pub fn n(&self) -> usize {
        self.elements.len()
    }
    /// matrix whose rows are the basis elements in standard coordinates
    pub fn mat(&self) -> Matrix<RatFunc> {
        self.elements.iter().map(|e| e.coords.clone()).collect()
    }
    /// the standard basis frame for an operator of order n
    pub fn standard(l: &OreOperator) -> Result<BasisFrame> {
        let n = l.order().ok_or(Error::ZeroInput)?;
        let w: Vec<ModuleElement> = (0..n).map(|i| ModuleElement::unit(n, i)).collect();
        frame_matrix(w, l, FrameKind::Plain)
    }
    /// coordinates of f (given in this frame) in the standard basis
    pub fn to_standard(&self, f: &ModuleElement) -> ModuleElement {
        ModuleElement::from_coords(linalg::vec_mat(&f.coords, &self.mat()))
    }
    /// coordinates of f (given in standard basis) in this frame
    pub fn from_standard(&self, f: &ModuleElement) -> Result<ModuleElement> {
        let mt = linalg::transpose(&self.mat());
        let sol = linalg::solve(&mt, &f.coords)?;
        Ok(ModuleElement::from_coords(sol.particular))
    }
    /// derivative of f, both given in this frame's coordinates:
    /// (c W)' = c' W + (c M / e) W
    pub fn derivative(&self, f: &ModuleElement) -> ModuleElement {
        let e_inv = RatFunc::from_poly(self.e.clone()).inv().expect("e nonzero");
        let n = self.n();
        let coords: Vec<RatFunc> = (0..n)
            .map(|j| {
                let mut s = f.coords[j].derivative();
                for i in 0..n {
                    let t = f.coords[i]
                        .mul(&RatFunc::from_poly(self.m[i][j].clone()))
                        .mul(&e_inv);
                    s = s.add(&t);
                }
                s
            })
            .collect();
        ModuleElement { coords }
    }
    /// pole order at infinity of M/e (the lambda of the local theory at infinity)
    pub fn lambda_infinity(&self) -> i64 {
        let mut d = i64::MIN;
        for row in &self.m {
            for entry in row {
                if !entry.is_zero() {
                    d = d.max(entry.deg_i() - self.e.deg_i());
                }
            }
        }
        d
    }
    /// multiplicity of the squarefree polynomial v in e
    pub fn lambda_at(&self, v: &Poly) -> usize {
        let mut m = 0;
        let mut e = self.e.clone();
        loop {
            let (q, r) = e.divrem(v).expect("v nonzero");
            if r.is_zero() {
                m += 1;
                e = q;
            } else {
                return m;
            }
        }
    }
}

/// Build the frame data (e, M) for a basis W given in standard coordinates.
pub fn frame_matrix(w: Vec<ModuleElement>, l: &OreOperator, kind: FrameKind) -> Result<BasisFrame> {
    let n = l.order().ok_or(Error::ZeroInput)?;
    assert!(w.len() == n && w.iter().all(|e| e.n() == n));
    let wmat = w.iter().map(|e| e.coords.clone()).collect::<Matrix<_>>();
    let winv = linalg::invert(&wmat).map_err(|_| Error::NotABasis)?;
    // T with W' = T W
    let wprime: Matrix<RatFunc> = w.iter().map(|e| derivative_std(e, l).coords).collect();
    let t = linalg::mat_mul(&wprime, &winv);
    // clear denominators: e = monic lcm of denominators, M = e T
    let mut e = Poly::one();
    for row in &t {
        for entry in row {
            e = e.lcm(&entry.den);
        }
    }
    let m: Matrix<Poly> = t
        .iter()
        .map(|row| {
            row.iter()
                .map(|entry| entry.num.mul(&e.div_exact(&entry.den).expect("lcm divisible")))
                .collect()
        })
        .collect();
    // lowest terms: gcd(e, all entries of M) = 1
    let mut g = e.clone();
    for row in &m {
        for entry in row {
            g = g.gcd(entry);
        }
    }
    let (e, m) = if g.is_one() {
        (e, m)
    } else {
        (
            e.div_exact(&g)?,
            m.iter()
                .map(|row| {
                    row.iter()
                        .map(|x| x.div_exact(&g).expect("gcd divides"))
                        .collect()
                })
                .collect(),
        )
    };
    Ok(BasisFrame {
        elements: w,
        e,
        m,
        kind,
    })
}

/// Express f (coordinates in `from`) in the coordinates of `to`.
pub fn change_basis(
    f: &ModuleElement,
    from: &BasisFrame,
    to: &BasisFrame,
) -> Result<ModuleElement> {
    to.from_standard(&from.to_standard(f))
}

pub fn rf(num: &[i64], den: &[i64]) -> RatFunc {
    RatFunc::new(Poly::from_coeffs(num), Poly::from_coeffs(den)).unwrap()
}

/// The operator of Example "non-Fuchsian at 0": x^3 D^2 + (3x^2 + 2) D.
pub fn op_from_polys(coeffs: &[&[i64]]) -> OreOperator {
    OreOperator::from_coeffs(
        coeffs
            .iter()
            .map(|c| RatFunc::from_poly(Poly::from_coeffs(c)))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l_ex21() -> OreOperator {
        // x^3 D^2 + (3x^2 + 2) D
        op_from_polys(&[&[0], &[2, 0, 3], &[0, 0, 0, 1]])
    }
    fn l_ex22() -> OreOperator {
        // x D^2 - (3x^3 + 2) D
        op_from_polys(&[&[0], &[-2, 0, 0, -3], &[0, 1]])
    }

    #[test]
    fn commutation_rule() {
        // D * x = x D + 1
        let d = OreOperator::d();
        let x = OreOperator::from_ratfunc(RatFunc::x());
        let p = d.mul(&x);
        assert_eq!(p, op_from_polys(&[&[1], &[0, 1]]));
        // 1 * P = P
        assert_eq!(OreOperator::one().mul(&l_ex21()), l_ex21());
    }

    #[test]
    fn d2_times_x2() {
        // D^2 * x^2 = x^2 D^2 + 4x D + 2
        let d2 = op_from_polys(&[&[0], &[0], &[1]]);
        let x2 = OreOperator::from_ratfunc(RatFunc::from_poly(Poly::from_coeffs(&[0, 0, 1])));
        assert_eq!(d2.mul(&x2), op_from_polys(&[&[2], &[0, 4], &[0, 0, 1]]));
    }

    #[test]
    fn product_order_adds() {
        let p = l_ex21();
        let q = l_ex22();
        assert_eq!(
            p.mul(&q).order().unwrap(),
            p.order().unwrap() + q.order().unwrap()
        );
    }

    #[test]
    fn reduce_basics() {
        let l = l_ex21();
        // P = L -> 0
        assert!(reduce_mod_l(&l, &l).is_zero());
        // P = D -> (0, 1)
        let r = reduce_mod_l(&OreOperator::d(), &l);
        assert_eq!(r.coords, vec![RatFunc::zero(), RatFunc::one()]);
        // P = D^2 -> (0, -(3x^2+2)/x^3)
        let d2 = op_from_polys(&[&[0], &[0], &[1]]);
        let r2 = reduce_mod_l(&d2, &l);
        assert_eq!(r2.coords[0], RatFunc::zero());
        assert_eq!(r2.coords[1], rf(&[-2, 0, -3], &[0, 0, 0, 1]));
        // re-multiply: D^2 - r2 must be a left multiple of L; here simply check
        // that reducing D * D gives the same thing as differentiating reduce(D)
        let via_der = derivative_std(&reduce_mod_l(&OreOperator::d(), &l), &l);
        assert_eq!(via_der, r2);
    }

    #[test]
    fn frame_ex21() {
        // W = (1, x^3 D): e = x^3, M = [[0,1],[0,-2]]
        let l = l_ex21();
        let w = vec![
            ModuleElement::from_coords(vec![RatFunc::one(), RatFunc::zero()]),
            ModuleElement::from_coords(vec![
                RatFunc::zero(),
                RatFunc::from_poly(Poly::from_coeffs(&[0, 0, 0, 1])),
            ]),
        ];
        let frame = frame_matrix(w, &l, FrameKind::GlobalIntegral).unwrap();
        assert_eq!(frame.e, Poly::from_coeffs(&[0, 0, 0, 1]));
        assert_eq!(frame.m[0][0], Poly::zero());
        assert_eq!(frame.m[0][1], Poly::one());
        assert_eq!(frame.m[1][0], Poly::zero());
        assert_eq!(frame.m[1][1], Poly::from_coeffs(&[-2]));
        // derivative of omega_2 = x^3 D in frame coords: (0, -2/x^3)
        let f = ModuleElement::unit(2, 1);
        let df = frame.derivative(&f);
        assert_eq!(df.coords[0], RatFunc::zero());
        assert_eq!(df.coords[1], rf(&[-2], &[0, 0, 0, 1]));
    }

    #[test]
    fn frame_ex22() {
        // W = (1, x^{-2} D): e = 1, M = [[0,x^2],[0,3x^2]]
        let l = l_ex22();
        let w = vec![
            ModuleElement::from_coords(vec![RatFunc::one(), RatFunc::zero()]),
            ModuleElement::from_coords(vec![RatFunc::zero(), rf(&[1], &[0, 0, 1])]),
        ];
        let frame = frame_matrix(w, &l, FrameKind::LocalAtInfinity).unwrap();
        assert_eq!(frame.e, Poly::one());
        assert_eq!(frame.m[0][1], Poly::from_coeffs(&[0, 0, 1]));
        assert_eq!(frame.m[1][1], Poly::from_coeffs(&[0, 0, 3]));
        assert_eq!(frame.lambda_infinity(), 2);
        // derivative of omega_1 = 1 in frame coords: (0, x^2)
        let df = frame.derivative(&ModuleElement::unit(2, 0));
        assert_eq!(df.coords[0], RatFunc::zero());
        assert_eq!(df.coords[1], RatFunc::from_poly(Poly::from_coeffs(&[0, 0, 1])));
    }

    #[test]
    fn standard_frame_polynomial_monic() {
        // L with polynomial coefficients and lc 1: e = 1 for the standard basis
        let l = op_from_polys(&[&[1, 2], &[0, 3], &[1]]);
        let frame = BasisFrame::standard(&l).unwrap();
        assert!(frame.e.is_one());
    }

    #[test]
    fn derivative_is_linear_and_leibniz() {
        let l = l_ex21();
        let frame = BasisFrame::standard(&l).unwrap();
        let f = ModuleElement::from_coords(vec![rf(&[1, 2], &[0, 1]), rf(&[3], &[1, 1])]);
        let g = ModuleElement::from_coords(vec![rf(&[0, 1], &[1]), rf(&[5], &[0, 0, 1])]);
        let sum = frame.derivative(&f.add(&g));
        assert_eq!(sum, frame.derivative(&f).add(&frame.derivative(&g)));
        // (r f)' = r' f + r f'
        let r = rf(&[1, 1], &[0, 2]);
        let lhs = frame.derivative(&f.scale(&r));
        let rhs = f.scale(&r.derivative()).add(&frame.derivative(&f).scale(&r));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn frame_identity_e_wprime_eq_mw() {
        // e * (elements)' = M * (elements) after expanding in standard coords
        let l = l_ex22();
        let w = vec![
            ModuleElement::from_coords(vec![RatFunc::one(), RatFunc::zero()]),
            ModuleElement::from_coords(vec![RatFunc::zero(), rf(&[1], &[0, 0, 1])]),
        ];
        let frame = frame_matrix(w.clone(), &l, FrameKind::Plain).unwrap();
        for i in 0..2 {
            let lhs = derivative_std(&w[i], &l).scale(&RatFunc::from_poly(frame.e.clone()));
            let mut rhs = ModuleElement::zero(2);
            for j in 0..2 {
                rhs = rhs.add(&w[j].scale(&RatFunc::from_poly(frame.m[i][j].clone())));
            }
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn change_basis_roundtrip() {
        let l = l_ex21();
        let std = BasisFrame::standard(&l).unwrap();
        let w = vec![
            ModuleElement::from_coords(vec![RatFunc::one(), RatFunc::zero()]),
            ModuleElement::from_coords(vec![
                RatFunc::zero(),
                RatFunc::from_poly(Poly::from_coeffs(&[0, 0, 0, 1])),
            ]),
        ];
        let frame = frame_matrix(w, &l, FrameKind::GlobalIntegral).unwrap();
        let f = ModuleElement::from_coords(vec![rf(&[1, -2, 3], &[0, 1]), rf(&[4], &[1, 0, 1])]);
        let g = change_basis(&f, &std, &frame).unwrap();
        let back = change_basis(&g, &frame, &std).unwrap();
        assert_eq!(back, f);
        // dependent W -> "not a basis"
        let bad = vec![ModuleElement::unit(2, 0), ModuleElement::unit(2, 0)];
        assert!(matches!(
            frame_matrix(bad, &l, FrameKind::Plain),
            Err(Error::NotABasis)
        ));
    }
}
