//! Column-style Hermite normal form.

use num_integer::Integer as _;
use num_traits::{Signed, Zero};

use super::LatticeError;
use crate::matrix::IntegerMatrix;
use crate::scalar::Integer;

/// Result of [`hnf`]: `input * transform = [lower | 0]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hnf {
    /// `d x d` lower triangular, positive diagonal, row entries left of the
    /// diagonal reduced into `[0, diagonal)`.
    pub lower: IntegerMatrix,
    /// Unimodular `n x n` column transform.
    pub transform: IntegerMatrix,
}

/// Extended gcd normalised so that the gcd is non-negative.
pub(crate) fn ext_gcd(a: &Integer, b: &Integer) -> (Integer, Integer, Integer) {
    let e = a.extended_gcd(b);
    if e.gcd.is_negative() {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// Replaces columns `(i, j)` by `(x c_i + y c_j, -b/g c_i + a/g c_j)`,
/// a determinant-one transform.
fn combine_columns(m: &mut IntegerMatrix, i: usize, j: usize, x: &Integer, y: &Integer, p: &Integer, q: &Integer) {
    for r in 0..m.rows() {
        let ci = m[(r, i)].clone();
        let cj = m[(r, j)].clone();
        if ci.is_zero() && cj.is_zero() {
            continue;
        }
        m[(r, i)] = x * &ci + y * &cj;
        m[(r, j)] = p * &ci + q * &cj;
    }
}

/// Hermite lower-triangular form of a `d x n` integer matrix of full row
/// rank `d` under unimodular column operations.
pub fn hnf(m: &IntegerMatrix) -> Result<Hnf, LatticeError> {
    let (d, n) = (m.rows(), m.cols());
    if n < d {
        return Err(LatticeError::RankDeficient);
    }
    let mut work = m.clone();
    let mut e = IntegerMatrix::identity(n);

    for i in 0..d {
        for j in i + 1..n {
            if work[(i, j)].is_zero() {
                continue;
            }
            let a = work[(i, i)].clone();
            let b = work[(i, j)].clone();
            let (g, x, y) = ext_gcd(&a, &b);
            let p = -(&b / &g);
            let q = &a / &g;
            combine_columns(&mut work, i, j, &x, &y, &p, &q);
            combine_columns(&mut e, i, j, &x, &y, &p, &q);
        }
        if work[(i, i)].is_zero() {
            // Row i vanishes on columns i.. and so lies in the span of the rows above.
            return Err(LatticeError::RankDeficient);
        }
        if work[(i, i)].is_negative() {
            work.negate_column(i);
            e.negate_column(i);
        }
        let diag = work[(i, i)].clone();
        for j in 0..i {
            let q = work[(i, j)].div_floor(&diag);
            if !q.is_zero() {
                let f = -q;
                work.add_column_multiple(j, i, &f);
                e.add_column_multiple(j, i, &f);
            }
        }
    }

    debug_assert!((0..d).all(|r| (d..n).all(|c| work[(r, c)].is_zero())));
    Ok(Hnf { lower: work.submatrix(0..d, 0..d), transform: e })
}

/// True when `lower` is already in canonical form.
pub fn is_canonical(lower: &IntegerMatrix) -> bool {
    let d = lower.rows();
    (0..d).all(|i| {
        let diag = &lower[(i, i)];
        diag.is_positive()
            && (i + 1..d).all(|j| lower[(i, j)].is_zero())
            && (0..i).all(|j| !lower[(i, j)].is_negative() && &lower[(i, j)] < diag)
    })
}

#[cfg(test)]
pub(crate) fn abs_det_is_one(m: &IntegerMatrix) -> bool {
    num_traits::One::is_one(&m.det().abs())
}
