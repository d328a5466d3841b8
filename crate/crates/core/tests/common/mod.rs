//! Brute-force oracles and fixtures shared by the integration tests. Nothing
//! here calls the library's normal-form code.
#![allow(dead_code)]

use num_traits::{Signed, ToPrimitive};
use rand::Rng;
use tfharmonic::scalar::{int, rat};
use tfharmonic::{classify, GroupSpec, Integer, Lattice, Matrix, Rational, RationalMatrix};

pub fn example_b() -> RationalMatrix {
    Matrix::from_rows(vec![vec![rat(1, 2), rat(1, 5)], vec![rat(2, 3), rat(-3, 4)]])
}

pub fn spec_1d(p: i64, q: i64) -> GroupSpec {
    classify(Matrix::from_rows(vec![vec![rat(p, q)]])).unwrap()
}

pub fn spec_of(rows: &[&[(i64, i64)]]) -> GroupSpec {
    classify(Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&(p, q)| rat(p, q)).collect()).collect())).unwrap()
}

/// The worked examples: 1/2, 1/3, 2/3, 1/6 and the 2x2 matrix.
pub fn worked_specs() -> Vec<(&'static str, GroupSpec)> {
    vec![
        ("1/2", spec_1d(1, 2)),
        ("1/3", spec_1d(1, 3)),
        ("2/3", spec_1d(2, 3)),
        ("1/6", spec_1d(1, 6)),
        ("2x2", classify(example_b()).unwrap()),
    ]
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 { a.abs() } else { gcd(b, a % b) }
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        if a < 0 { (-a, -1, 0) } else { (a, 1, 0) }
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// Determinant by cofactor expansion; only for d <= 3.
pub fn det_i64(m: &[Vec<i64>]) -> i64 {
    match m.len() {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        3 => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
        _ => panic!("det_i64 handles d <= 3"),
    }
}

/// Integer lattice containing `modulus · Z^d`, kept as an echelon of row
/// vectors with entries right of each pivot reduced modulo `modulus`.
pub struct Echelon {
    d: usize,
    modulus: i64,
    rows: Vec<Option<Vec<i64>>>,
}

impl Echelon {
    pub fn new(d: usize, modulus: i64) -> Self {
        let rows = (0..d)
            .map(|i| {
                let mut v = vec![0; d];
                v[i] = modulus;
                Some(v)
            })
            .collect();
        Echelon { d, modulus, rows }
    }

    pub fn insert(&mut self, mut v: Vec<i64>) {
        for i in 0..self.d {
            self.reduce_tail(&mut v, i);
            if v[i] == 0 {
                continue;
            }
            match self.rows[i].take() {
                None => {
                    self.rows[i] = Some(v);
                    return;
                }
                Some(r) => {
                    let (g, x, y) = ext_gcd(r[i], v[i]);
                    let mut top: Vec<i64> = r.iter().zip(&v).map(|(a, b)| x * a + y * b).collect();
                    let (p, q) = (r[i] / g, v[i] / g);
                    let mut rest: Vec<i64> = v.iter().zip(&r).map(|(a, b)| p * a - q * b).collect();
                    self.reduce_tail(&mut top, i);
                    self.reduce_tail(&mut rest, i);
                    self.rows[i] = Some(top);
                    v = rest;
                }
            }
        }
    }

    fn reduce_tail(&self, v: &mut [i64], pivot: usize) {
        for x in v.iter_mut().skip(pivot + 1) {
            *x = x.rem_euclid(self.modulus);
        }
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        let mut v = v.to_vec();
        for i in 0..self.d {
            let Some(r) = &self.rows[i] else {
                if v[i].rem_euclid(self.modulus) != 0 {
                    return false;
                }
                continue;
            };
            if v[i] % r[i] != 0 {
                return false;
            }
            let c = v[i] / r[i];
            for (a, b) in v.iter_mut().zip(r) {
                *a -= c * b;
            }
            for x in v.iter_mut().skip(i + 1) {
                *x = x.rem_euclid(self.modulus);
            }
        }
        true
    }

    /// Product of the pivots, which is the index in `Z^d`.
    pub fn index(&self) -> i64 {
        self.rows.iter().enumerate().map(|(i, r)| r.as_ref().unwrap()[i]).product()
    }

    pub fn lattice(&self) -> Lattice {
        let cols: Vec<Vec<Rational>> = self.rows.iter().map(|r| r.as_ref().unwrap().iter().map(|&x| rat(x, 1)).collect()).collect();
        Lattice::new(Matrix::from_columns(&cols)).unwrap()
    }
}

/// Random nonsingular `d x d` rational matrix with entries `p/q`,
/// `|p| <= 6`, `1 <= q <= max_den`.
pub fn random_rational_matrix<R: Rng>(rng: &mut R, d: usize, max_den: i64) -> RationalMatrix {
    loop {
        let m = Matrix::from_rows(
            (0..d).map(|_| (0..d).map(|_| rat(rng.random_range(-6..=6), rng.random_range(1..=max_den))).collect()).collect(),
        );
        if !num_traits::Zero::is_zero(&m.det()) {
            return m;
        }
    }
}

pub fn den_lcm(m: &RationalMatrix) -> i64 {
    m.entries().iter().fold(1i64, |acc, x| {
        let q = x.denom().to_i64().unwrap();
        acc / gcd(acc, q) * q
    })
}

/// Calls `visit` on every `x ∈ [0, D)^d` with `B^T x ∈ Z^d`, `D` the lcm
/// of the denominators of `B`. Returns `D`.
fn scan_congruence(b: &RationalMatrix, mut visit: impl FnMut(&[i64])) -> i64 {
    let d = b.rows();
    let den = den_lcm(b);
    let scaled: Vec<Vec<i64>> =
        (0..d).map(|i| (0..d).map(|j| (&b[(j, i)] * rat(den, 1)).to_integer().to_i64().unwrap()).collect()).collect();
    let mut x = vec![0i64; d];
    loop {
        if scaled.iter().all(|row| row.iter().zip(&x).map(|(a, b)| a * b).sum::<i64>().rem_euclid(den) == 0) {
            visit(&x);
        }
        let mut i = 0;
        while i < d {
            x[i] += 1;
            if x[i] < den {
                break;
            }
            x[i] = 0;
            i += 1;
        }
        if i == d {
            return den;
        }
    }
}

/// `{ x ∈ Z^d : B^T x ∈ Z^d }`, i.e. `B^{-T}Z^d ∩ Z^d`, generated by the
/// solutions in `[0, D)^d` together with `D Z^d`.
pub fn brute_force_a(b: &RationalMatrix) -> Echelon {
    let mut e = Echelon::new(b.rows(), den_lcm(b));
    scan_congruence(b, |x| e.insert(x.to_vec()));
    e
}

/// `D^d` divided by the number of solutions in `[0, D)^d`.
pub fn index_by_counting(b: &RationalMatrix) -> i64 {
    let mut count = 0i64;
    let den = scan_congruence(b, |_| count += 1);
    den.pow(b.rows() as u32) / count
}

pub fn to_i64(v: &[Integer]) -> Vec<i64> {
    v.iter().map(|x| x.to_i64().unwrap()).collect()
}

pub fn ints(v: &[i64]) -> Vec<Integer> {
    v.iter().map(|&x| int(x)).collect()
}

pub fn abs_int(x: &Integer) -> Integer {
    x.abs()
}

/// Determinant by cofactor expansion over the rationals; d <= 3.
pub fn det_rat(m: &[Vec<Rational>]) -> Rational {
    match m.len() {
        1 => m[0][0].clone(),
        2 => &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0],
        3 => {
            let minor = |r1: usize, r2: usize, c1: usize, c2: usize| &m[r1][c1] * &m[r2][c2] - &m[r1][c2] * &m[r2][c1];
            &m[0][0] * minor(1, 2, 1, 2) - &m[0][1] * minor(1, 2, 0, 2) + &m[0][2] * minor(1, 2, 0, 1)
        }
        _ => panic!("det_rat handles d <= 3"),
    }
}

/// Membership by Cramer's rule: every coefficient of `x` in the basis
/// columns is an integer.
pub fn cramer_contains(basis: &RationalMatrix, x: &[Rational]) -> bool {
    let d = basis.rows();
    let rows = basis.to_rows();
    let det = det_rat(&rows);
    (0..d).all(|i| {
        let replaced: Vec<Vec<Rational>> =
            (0..d).map(|r| (0..d).map(|c| if c == i { x[r].clone() } else { rows[r][c].clone() }).collect()).collect();
        (det_rat(&replaced) / &det).is_integer()
    })
}
