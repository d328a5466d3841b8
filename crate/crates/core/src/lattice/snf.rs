//! Smith normal form of square integer matrices.

use num_traits::{Signed, Zero};

use crate::matrix::IntegerMatrix;
use crate::scalar::Integer;

/// `left * input * right = diag(divisors)` with unimodular `left`, `right`
/// and `divisors[i] | divisors[i + 1]`.
#[derive(Clone, Debug)]
pub struct Snf {
    pub left: IntegerMatrix,
    pub right: IntegerMatrix,
    pub divisors: Vec<Integer>,
}

/// Smith normal form of a nonsingular square matrix. Zero divisors are
/// reported as-is for singular input.
pub fn snf(m: &IntegerMatrix) -> Snf {
    assert!(m.is_square(), "smith form implemented for square matrices");
    let n = m.rows();
    let mut a = m.clone();
    let mut left = IntegerMatrix::identity(n);
    let mut right = IntegerMatrix::identity(n);

    for t in 0..n {
        loop {
            // smallest nonzero entry of the trailing block becomes the pivot
            let mut best: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..n {
                    if a[(i, j)].is_zero() {
                        continue;
                    }
                    match best {
                        Some((bi, bj)) if a[(i, j)].abs() >= a[(bi, bj)].abs() => {}
                        _ => best = Some((i, j)),
                    }
                }
            }
            let Some((pi, pj)) = best else {
                break;
            };
            a.swap_rows(t, pi);
            left.swap_rows(t, pi);
            a.swap_columns(t, pj);
            right.swap_columns(t, pj);

            let mut clean = true;
            for i in t + 1..n {
                let q = &a[(i, t)] / &a[(t, t)];
                if !q.is_zero() {
                    let f = -q;
                    a.add_row_multiple(i, t, &f);
                    left.add_row_multiple(i, t, &f);
                }
                clean &= a[(i, t)].is_zero();
            }
            for j in t + 1..n {
                let q = &a[(t, j)] / &a[(t, t)];
                if !q.is_zero() {
                    let f = -q;
                    a.add_column_multiple(j, t, &f);
                    right.add_column_multiple(j, t, &f);
                }
                clean &= a[(t, j)].is_zero();
            }
            if !clean {
                continue;
            }
            let pivot = a[(t, t)].clone();
            let offender = (t + 1..n).find(|&i| (t + 1..n).any(|j| !(&a[(i, j)] % &pivot).is_zero()));
            match offender {
                Some(i) => {
                    let one = Integer::from(1);
                    a.add_row_multiple(t, i, &one);
                    left.add_row_multiple(t, i, &one);
                }
                None => break,
            }
        }
        if a[(t, t)].is_negative() {
            a.negate_row(t);
            left.negate_row(t);
        }
    }

    let divisors = (0..n).map(|i| a[(i, i)].clone()).collect();
    Snf { left, right, divisors }
}
