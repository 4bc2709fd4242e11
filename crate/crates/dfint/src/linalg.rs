//! Exact linear algebra over an arbitrary field, plus the polynomial
//! congruence solver used by Hermite reduction.

use crate::coeff::K;
use crate::error::{Error, Result};
use crate::poly::{invmod, Poly};
use crate::ratfunc::RatFunc;

/// A field element, for generic elimination. `inv` may fail with
/// `ModulusSplit` in residue rings; callers split the modulus and retry.
pub trait Fld: Clone + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn inv(&self) -> Result<Self>;
    fn from_i64(n: i64) -> Self;
}

impl Fld for K {
    fn zero() -> Self {
        K::zero()
    }
    fn one() -> Self {
        K::one()
    }
    fn is_zero(&self) -> bool {
        K::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        K::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        K::sub(self, o)
    }
    fn neg(&self) -> Self {
        K::neg(self)
    }
    fn mul(&self, o: &Self) -> Self {
        K::mul(self, o)
    }
    fn inv(&self) -> Result<Self> {
        K::inv(self)
    }
    fn from_i64(n: i64) -> Self {
        K::from_i64(n)
    }
}

impl Fld for RatFunc {
    fn zero() -> Self {
        RatFunc::zero()
    }
    fn one() -> Self {
        RatFunc::one()
    }
    fn is_zero(&self) -> bool {
        RatFunc::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        RatFunc::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        RatFunc::sub(self, o)
    }
    fn neg(&self) -> Self {
        RatFunc::neg(self)
    }
    fn mul(&self, o: &Self) -> Self {
        RatFunc::mul(self, o)
    }
    fn inv(&self) -> Result<Self> {
        RatFunc::inv(self)
    }
    fn from_i64(n: i64) -> Self {
        RatFunc::from_i64(n)
    }
}

pub type Matrix<F> = Vec<Vec<F>>;

pub fn identity<F: Fld>(n: usize) -> Matrix<F> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { F::one() } else { F::zero() })
                .collect()
        })
        .collect()
}

pub fn mat_mul<F: Fld>(a: &Matrix<F>, b: &Matrix<F>) -> Matrix<F> {
    let n = a.len();
    let m = b.first().map_or(0, |r| r.len());
    let k = b.len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut s = F::zero();
                    for l in 0..k {
                        s = s.add(&a[i][l].mul(&b[l][j]));
                    }
                    s
                })
                .collect()
        })
        .collect()
}

pub fn mat_vec<F: Fld>(a: &Matrix<F>, v: &[F]) -> Vec<F> {
    a.iter()
        .map(|row| {
            let mut s = F::zero();
            for (x, y) in row.iter().zip(v) {
                s = s.add(&x.mul(y));
            }
            s
        })
        .collect()
}

/// row vector times matrix
pub fn vec_mat<F: Fld>(v: &[F], a: &Matrix<F>) -> Vec<F> {
    let m = a.first().map_or(0, |r| r.len());
    (0..m)
        .map(|j| {
            let mut s = F::zero();
            for (i, x) in v.iter().enumerate() {
                s = s.add(&x.mul(&a[i][j]));
            }
            s
        })
        .collect()
}

pub fn transpose<F: Clone>(a: &Matrix<F>) -> Matrix<F> {
    let m = a.first().map_or(0, |r| r.len());
    (0..m)
        .map(|j| a.iter().map(|row| row[j].clone()).collect())
        .collect()
}

/// Result of solving A x = b.
#[derive(Debug, Clone)]
pub struct Solution<F> {
    pub particular: Vec<F>,
    /// basis of the null space of A
    pub kernel: Vec<Vec<F>>,
}

/// Reduced row echelon form of [A | b...]; returns (rref, pivot columns).
fn rref<F: Fld>(mut a: Matrix<F>) -> Result<(Matrix<F>, Vec<usize>)> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut pivots = vec![];
    let mut r = 0usize;
    for c in 0..cols {
        if r >= rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].inv()?;
        for j in c..cols {
            a[r][j] = a[r][j].mul(&inv);
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in c..cols {
                    let t = f.mul(&a[r][j]);
                    a[i][j] = a[i][j].sub(&t);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    Ok((a, pivots))
}

/// Solve A x = b exactly. Inconsistency is reported as an error, distinct
/// from the zero solution. The kernel basis is always returned.
pub fn solve<F: Fld>(a: &Matrix<F>, b: &[F]) -> Result<Solution<F>> {
    let rows = a.len();
    assert_eq!(rows, b.len());
    let cols = a.first().map_or(0, |r| r.len());
    let aug: Matrix<F> = (0..rows)
        .map(|i| {
            let mut row = a[i].clone();
            row.push(b[i].clone());
            row
        })
        .collect();
    let (m, pivots) = rref(aug)?;
    if pivots.contains(&cols) {
        return Err(Error::InconsistentSystem);
    }
    let mut x = vec![F::zero(); cols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = m[r][cols].clone();
    }
    Ok(Solution {
        particular: x,
        kernel: kernel_from_rref(&m, &pivots, cols),
    })
}

fn kernel_from_rref<F: Fld>(m: &Matrix<F>, pivots: &[usize], cols: usize) -> Vec<Vec<F>> {
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![F::zero(); cols];
            v[fc] = F::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = m[r][fc].neg();
            }
            v
        })
        .collect()
}

/// Basis of the null space of A.
pub fn kernel<F: Fld>(a: &Matrix<F>) -> Result<Vec<Vec<F>>> {
    let cols = a.first().map_or(0, |r| r.len());
    let (m, pivots) = rref(a.clone())?;
    Ok(kernel_from_rref(&m, &pivots, cols))
}

pub fn rank<F: Fld>(a: &Matrix<F>) -> Result<usize> {
    Ok(rref(a.clone())?.1.len())
}

/// Matrix inverse; error if singular.
pub fn invert<F: Fld>(a: &Matrix<F>) -> Result<Matrix<F>> {
    let n = a.len();
    let aug: Matrix<F> = (0..n)
        .map(|i| {
            let mut row = a[i].clone();
            for j in 0..n {
                row.push(if i == j { F::one() } else { F::zero() });
            }
            row
        })
        .collect();
    let (m, pivots) = rref(aug)?;
    if pivots.len() < n || pivots.iter().any(|&c| c >= n) {
        return Err(Error::Internal("matrix not invertible".into()));
    }
    Ok((0..n).map(|i| m[i][n..].to_vec()).collect())
}

fn poly_rem_mod(p: &Poly, m: &Poly) -> Poly {
    p.rem(m).expect("modulus nonzero")
}

/// Solve the row-vector congruence system b A = r mod v^lambda for polynomial
/// b, each entry reduced mod v^lambda.
///
/// The canonical solution is the reduction of the exact rational solution of
/// b A = r (which is unique when A is invertible over C(x), the situation the
/// reduction theory guarantees). When A is singular over C(x) the system is
/// solved coefficientwise instead and must then be uniquely solvable.
pub fn congruence_solve(
    a: &Matrix<Poly>,
    r: &[Poly],
    v: &Poly,
    lambda: usize,
) -> Result<Vec<Poly>> {
    assert!(lambda >= 1);
    let n = a.len();
    assert!(a.iter().all(|row| row.len() == n) && r.len() == n);
    let modulus = v.pow(lambda);

    let out = congruence_solve_exact(a, r, &modulus)
        .or_else(|_| congruence_solve_flat(a, r, v, lambda, &modulus))?;

    // substitution check, always
    for j in 0..n {
        let mut s = Poly::zero();
        for i in 0..n {
            s = s.add(&out[i].mul(&a[i][j]));
        }
        if !poly_rem_mod(&s.sub(&r[j]), &modulus).is_zero() {
            return Err(Error::ReductionContract("congruence substitution failed"));
        }
    }
    Ok(out)
}

fn congruence_solve_exact(a: &Matrix<Poly>, r: &[Poly], modulus: &Poly) -> Result<Vec<Poly>> {
    let n = a.len();
    // transpose: solve A^T t^T = r^T over C(x)
    let at: Matrix<RatFunc> = (0..n)
        .map(|i| (0..n).map(|j| RatFunc::from_poly(a[j][i].clone())).collect())
        .collect();
    let rhs: Vec<RatFunc> = r.iter().map(|p| RatFunc::from_poly(p.clone())).collect();
    let sol = solve(&at, &rhs)?;
    if !sol.kernel.is_empty() {
        return Err(Error::NonUniqueSolution);
    }
    sol.particular
        .iter()
        .map(|t| {
            // t = p/q with gcd(q, modulus) = 1 required
            let qinv = invmod(&t.den, modulus).map_err(|e| match e {
                Error::ModulusSplit(_) => Error::ReductionContract("solution not integral at v"),
                other => other,
            })?;
            Ok(poly_rem_mod(&t.num.mul(&qinv), modulus))
        })
        .collect()
}

/// Coefficientwise fallback: flatten to one field-linear system over the
/// coefficient field (dimension n * lambda * deg v) and require uniqueness.
fn congruence_solve_flat(
    a: &Matrix<Poly>,
    r: &[Poly],
    v: &Poly,
    lambda: usize,
    modulus: &Poly,
) -> Result<Vec<Poly>> {
    let n = a.len();
    let dv = v.degree().ok_or(Error::ZeroInput)?;
    let width = lambda * dv; // deg bound for each b_i
    let ncols = n * width;
    let nrows = n * width;
    let mut mat: Matrix<K> = vec![vec![K::zero(); ncols]; nrows];
    let mut rhs: Vec<K> = vec![K::zero(); nrows];
    for col_blk in 0..n {
        let rr = poly_rem_mod(&r[col_blk], modulus);
        for d in 0..width {
            rhs[col_blk * width + d] = rr.coeff(d);
        }
        for i in 0..n {
            for d in 0..width {
                // contribution of coefficient u_{i,d}: x^d * a[i][col_blk] mod v^lambda
                let t = poly_rem_mod(&a[i][col_blk].mul_xpow(d), modulus);
                for e in 0..width {
                    let c = t.coeff(e);
                    if !c.is_zero() {
                        mat[col_blk * width + e][i * width + d] = c;
                    }
                }
            }
        }
    }
    let sol = solve(&mat, &rhs).map_err(|e| match e {
        Error::InconsistentSystem => Error::ReductionContract("congruence system unsolvable"),
        other => other,
    })?;
    if !sol.kernel.is_empty() {
        return Err(Error::NonUniqueSolution);
    }
    Ok((0..n)
        .map(|i| {
            let mut p = Poly::zero();
            for d in 0..width {
                p = p.add(&Poly::monomial(d, sol.particular[i * width + d].clone()));
            }
            p
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[i64]) -> Poly {
        Poly::from_coeffs(v)
    }

    #[test]
    fn solve_identity() {
        let a = identity::<K>(3);
        let b = vec![K::from_i64(1), K::from_i64(-2), K::from_ratio(1, 3)];
        let s = solve(&a, &b).unwrap();
        assert_eq!(s.particular, b);
        assert!(s.kernel.is_empty());
    }

    #[test]
    fn solve_singular_consistent() {
        // [[1,2],[2,4]] x = [3,6]: one-parameter family via kernel
        let a = vec![
            vec![K::from_i64(1), K::from_i64(2)],
            vec![K::from_i64(2), K::from_i64(4)],
        ];
        let b = vec![K::from_i64(3), K::from_i64(6)];
        let s = solve(&a, &b).unwrap();
        assert_eq!(s.kernel.len(), 1);
        assert_eq!(mat_vec(&a, &s.particular), b);
        let shifted: Vec<K> = s
            .particular
            .iter()
            .zip(&s.kernel[0])
            .map(|(x, k)| x.add(k))
            .collect();
        assert_eq!(mat_vec(&a, &shifted), b);
    }

    #[test]
    fn solve_inconsistent_is_distinct() {
        let a = vec![
            vec![K::from_i64(1), K::from_i64(2)],
            vec![K::from_i64(2), K::from_i64(4)],
        ];
        let b = vec![K::from_i64(3), K::from_i64(7)];
        assert!(matches!(solve(&a, &b), Err(Error::InconsistentSystem)));
    }

    #[test]
    fn congruence_invertible_matches_inverse() {
        // A invertible mod v, lambda = 1
        let a = vec![vec![p(&[1, 1]), p(&[0, 1])], vec![p(&[2]), p(&[1])]];
        let v = p(&[-3, 1]); // x - 3
        let r = vec![p(&[5, 1]), p(&[7])];
        let b = congruence_solve(&a, &r, &v, 1).unwrap();
        for j in 0..2 {
            let s = b[0]
                .mul(&a[0][j])
                .add(&b[1].mul(&a[1][j]))
                .sub(&r[j])
                .rem(&v)
                .unwrap();
            assert!(s.is_zero());
        }
    }

    #[test]
    fn congruence_hr_finite_example() {
        // (a1 x^2, a2 x^2) = b [[-3x^2, 1], [0, -3x^2-2]] mod x^3
        // with a1 = -2x^2 - x^4, a2 = -2 + 3x^2 - 3x^4
        let a = vec![
            vec![p(&[0, 0, -3]), p(&[1])],
            vec![p(&[0]), p(&[-2, 0, -3])],
        ];
        let a1 = p(&[0, 0, -2, 0, -1]);
        let a2 = p(&[-2, 0, 3, 0, -3]);
        let r = vec![a1.mul_xpow(2), a2.mul_xpow(2)];
        let b = congruence_solve(&a, &r, &Poly::x(), 3).unwrap();
        // b = (2/3 x^2, 4/3 x^2)
        assert_eq!(b[0], Poly::monomial(2, K::from_ratio(2, 3)));
        assert_eq!(b[1], Poly::monomial(2, K::from_ratio(4, 3)));
    }

    #[test]
    fn congruence_symbolic_d_specialized() {
        // d = 4, a1 = 1, a2 = 0: b1 = -1/3, b2 = x^2/4 - 1/6
        let a = vec![
            vec![p(&[0, 0, -3]), p(&[1])],
            vec![p(&[0]), p(&[-2, 0, -3])],
        ];
        let r = vec![p(&[0, 0, 1]), Poly::zero()];
        let b = congruence_solve(&a, &r, &Poly::x(), 3).unwrap();
        assert_eq!(b[0], Poly::constant(K::from_ratio(-1, 3)));
        let expected = Poly::monomial(2, K::from_ratio(1, 4))
            .add(&Poly::constant(K::from_ratio(-1, 6)));
        assert_eq!(b[1], expected);
    }

    #[test]
    fn congruence_oracle_brute_force() {
        // independent check of the previous case: expand b*A - r over the
        // monomial basis of (Q[x]/x^3)^2 and verify the returned b solves the
        // 6x6 rational system
        let a = vec![
            vec![p(&[0, 0, -3]), p(&[1])],
            vec![p(&[0]), p(&[-2, 0, -3])],
        ];
        let r = vec![p(&[0, 0, 1]), Poly::zero()];
        let b = congruence_solve(&a, &r, &Poly::x(), 3).unwrap();
        let x3 = Poly::monomial(3, K::one());
        for j in 0..2 {
            let mut s = Poly::zero();
            for i in 0..2 {
                s = s.add(&b[i].mul(&a[i][j]));
            }
            assert!(s.sub(&r[j]).rem(&x3).unwrap().is_zero());
        }
    }
}
