//! Exact lattice algebra over the rationals.
//!
//! A [`Lattice`] is a full-rank subgroup `basis * Z^d` of `Q^d`. Two lattices
//! compare equal when their canonical Hermite bases agree, so the basis a
//! lattice was constructed with only matters for the fundamental domain
//! `basis * [0, 1)^d` used by [`Lattice::reduce`].

pub mod hnf;
pub mod snf;

use std::fmt;

use num_traits::{One, Signed, ToPrimitive};
use thiserror::Error;

use crate::matrix::{IntegerMatrix, RationalMatrix};
use crate::scalar::{floor, frac, rat_from_int, Integer, Rational};

pub use hnf::{hnf, Hnf};
pub use snf::{snf, Snf};

/// Upper bound on explicitly enumerated quotient groups.
pub const MAX_QUOTIENT_ORDER: u64 = 1 << 22;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("matrix does not have full row rank")]
    RankDeficient,
    #[error("basis is not square")]
    NotSquare,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("lattice is not a sublattice of Z^d")]
    NotSubLattice,
    #[error("quotient of order {0} is too large to enumerate")]
    QuotientTooLarge(Integer),
}

#[derive(Clone)]
pub struct Lattice {
    basis: RationalMatrix,
    inverse: RationalMatrix,
}

impl Lattice {
    /// Lattice generated by the columns of a nonsingular square matrix.
    pub fn new(basis: RationalMatrix) -> Result<Self, LatticeError> {
        if !basis.is_square() {
            return Err(LatticeError::NotSquare);
        }
        let inverse = basis.inverse().ok_or(LatticeError::RankDeficient)?;
        Ok(Lattice { basis, inverse })
    }

    /// `Z^d`
    pub fn standard(d: usize) -> Self {
        Lattice { basis: RationalMatrix::identity(d), inverse: RationalMatrix::identity(d) }
    }

    /// Lattice generated by an arbitrary spanning set of column vectors,
    /// returned with its canonical basis.
    pub fn from_generators(d: usize, generators: &[Vec<Rational>]) -> Result<Self, LatticeError> {
        if generators.is_empty() {
            return Err(LatticeError::RankDeficient);
        }
        let mut gens = RationalMatrix::zeros(d, generators.len());
        for (j, g) in generators.iter().enumerate() {
            if g.len() != d {
                return Err(LatticeError::DimensionMismatch(d, g.len()));
            }
            for (i, x) in g.iter().enumerate() {
                gens[(i, j)] = x.clone();
            }
        }
        Self::new(canonical_basis_of(&gens)?)
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &RationalMatrix {
        &self.basis
    }

    pub fn basis_inverse(&self) -> &RationalMatrix {
        &self.inverse
    }

    /// `|det basis|`
    pub fn volume(&self) -> Rational {
        self.basis.abs_det()
    }

    /// `1 / volume`
    pub fn density(&self) -> Rational {
        self.volume().recip()
    }

    /// Dual lattice with basis `basis^{-T}`.
    pub fn dual(&self) -> Lattice {
        Lattice { basis: self.inverse.transpose(), inverse: self.basis.transpose() }
    }

    /// Coordinates of `x` in this basis.
    pub fn coordinates(&self, x: &[Rational]) -> Vec<Rational> {
        self.inverse.mul_vec(x)
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.coordinates(x).iter().all(|c| c.denom().is_one())
    }

    /// The unique `y` in `basis * [0, 1)^d` with `x - y` in the lattice.
    pub fn reduce(&self, x: &[Rational]) -> Vec<Rational> {
        let c: Vec<Rational> = self.coordinates(x).iter().map(frac).collect();
        self.basis.mul_vec(&c)
    }

    /// Lattice vector `x - reduce(x)`, as integer coordinates.
    pub fn reduction_offset(&self, x: &[Rational]) -> Vec<Integer> {
        self.coordinates(x).iter().map(floor).collect()
    }

    /// Integer vector reduced into the fundamental domain; the lattice must be
    /// integral.
    pub fn reduce_integer(&self, x: &[Integer]) -> Vec<Integer> {
        let xr: Vec<Rational> = x.iter().cloned().map(rat_from_int).collect();
        self.reduce(&xr)
            .into_iter()
            .map(|y| {
                debug_assert!(y.denom().is_one());
                y.numer().clone()
            })
            .collect()
    }

    /// Canonical basis: Hermite form of the denominator-cleared basis,
    /// rescaled.
    pub fn canonical_basis(&self) -> RationalMatrix {
        canonical_basis_of(&self.basis).expect("nonsingular basis has a hermite form")
    }

    pub fn canonical(&self) -> Lattice {
        Lattice::new(self.canonical_basis()).expect("canonical basis is nonsingular")
    }

    pub fn is_integral(&self) -> bool {
        self.basis.is_integral()
    }

    /// `L1 ∩ L2` from the Hermite transform of `[J | K]`: with
    /// `[J | K] E = [L | 0]` and `D` the lower-right block of `E`, the
    /// intersection is `K D Z^d`.
    pub fn intersect(&self, other: &Lattice) -> Result<Lattice, LatticeError> {
        let d = self.dim();
        if other.dim() != d {
            return Err(LatticeError::DimensionMismatch(d, other.dim()));
        }
        let scale = crate::scalar::lcm(&self.basis.denominator_lcm(), &other.basis.denominator_lcm());
        let j = self.basis.scaled_to_integer(&scale);
        let k = other.basis.scaled_to_integer(&scale);
        let h = hnf(&j.hcat(&k))?;
        let block = h.transform.submatrix(d..2 * d, d..2 * d).to_rational();
        let kd = &other.basis * &block;
        Lattice::new(canonical_basis_of(&kd)?)
    }

    /// `L1 + L2`, the smallest lattice containing both.
    pub fn sum(&self, other: &Lattice) -> Result<Lattice, LatticeError> {
        let d = self.dim();
        if other.dim() != d {
            return Err(LatticeError::DimensionMismatch(d, other.dim()));
        }
        canonical_lattice_of(&self.basis.hcat(&other.basis))
    }

    /// Scales every basis vector by `s`.
    pub fn scaled(&self, s: &Rational) -> Result<Lattice, LatticeError> {
        Lattice::new(self.basis.scale(s))
    }

    /// `Z^d / self` for an integral lattice.
    pub fn quotient_structure(&self) -> Result<QuotientStructure, LatticeError> {
        QuotientStructure::new(self)
    }
}

impl PartialEq for Lattice {
    fn eq(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.canonical_basis() == other.canonical_basis()
    }
}

impl Eq for Lattice {}

impl fmt::Debug for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Lattice({:?})", self.basis)
    }
}

/// Canonical basis of the lattice spanned by the columns of a `d x n`
/// rational matrix of rank `d`.
fn canonical_basis_of(gens: &RationalMatrix) -> Result<RationalMatrix, LatticeError> {
    let scale = gens.denominator_lcm();
    let h = hnf(&gens.scaled_to_integer(&scale))?;
    let inv = rat_from_int(scale).recip();
    Ok(h.lower.to_rational().scale(&inv))
}

fn canonical_lattice_of(gens: &RationalMatrix) -> Result<Lattice, LatticeError> {
    Lattice::new(canonical_basis_of(gens)?)
}

/// Free-function form of [`Lattice::intersect`].
pub fn intersect(a: &Lattice, b: &Lattice) -> Result<Lattice, LatticeError> {
    a.intersect(b)
}

/// Free-function form of [`Lattice::sum`].
pub fn lattice_sum(a: &Lattice, b: &Lattice) -> Result<Lattice, LatticeError> {
    a.sum(b)
}

/// Free-function form of [`Lattice::reduce`].
pub fn reduce_mod(x: &[Rational], lattice: &Lattice) -> Vec<Rational> {
    lattice.reduce(x)
}

/// The finite group `Z^d / sub` in Smith coordinates.
#[derive(Clone, Debug)]
pub struct QuotientStructure {
    sub: Lattice,
    left: IntegerMatrix,
    elementary_divisors: Vec<Integer>,
    coset_reps: Vec<Vec<Integer>>,
}

impl QuotientStructure {
    /// Unimodular `U` with `U x mod divisors` the Smith coordinates of `x`.
    pub fn smith_left(&self) -> &IntegerMatrix {
        &self.left
    }

    pub fn new(sub: &Lattice) -> Result<Self, LatticeError> {
        let basis = sub.basis().to_integer().ok_or(LatticeError::NotSubLattice)?;
        let s = snf(&basis);
        let order: Integer = s.divisors.iter().product();
        let count = order
            .to_u64()
            .filter(|&c| c <= MAX_QUOTIENT_ORDER)
            .ok_or_else(|| LatticeError::QuotientTooLarge(order.clone()))?;

        // Z^d / M Z^d = U^{-1} (Z^d / S Z^d) with S = U M V.
        let left_inv = s.left.to_rational().inverse().expect("unimodular").to_integer().expect("unimodular inverse");
        let radices: Vec<u64> = s.divisors.iter().map(|x| x.to_u64().expect("divisor bounded by order")).collect();
        let mut coset_reps = Vec::with_capacity(count as usize);
        for idx in 0..count {
            let smith = mixed_radix_digits(idx, &radices);
            let rep = left_inv.mul_vec(&smith.into_iter().map(Integer::from).collect::<Vec<_>>());
            coset_reps.push(sub.reduce_integer(&rep));
        }
        Ok(QuotientStructure { sub: sub.clone(), left: s.left, elementary_divisors: s.divisors, coset_reps })
    }

    pub fn sub_lattice(&self) -> &Lattice {
        &self.sub
    }

    pub fn elementary_divisors(&self) -> &[Integer] {
        &self.elementary_divisors
    }

    /// Divisors greater than one.
    pub fn invariant_factors(&self) -> Vec<Integer> {
        self.elementary_divisors.iter().filter(|x| !x.is_one()).cloned().collect()
    }

    pub fn order(&self) -> usize {
        self.coset_reps.len()
    }

    /// Coset representatives, ordered lexicographically by Smith coordinates
    /// and reduced into the canonical fundamental domain of the sublattice.
    pub fn coset_reps(&self) -> &[Vec<Integer>] {
        &self.coset_reps
    }

    /// Smith coordinates of the class of `x`, each in `[0, divisor)`.
    pub fn smith_coordinates(&self, x: &[Integer]) -> Vec<Integer> {
        self.left
            .mul_vec(x)
            .into_iter()
            .zip(&self.elementary_divisors)
            .map(|(c, q)| num_integer::Integer::mod_floor(&c, q))
            .collect()
    }

    /// Position of the class of `x` in [`Self::coset_reps`].
    pub fn index_of(&self, x: &[Integer]) -> usize {
        let mut idx: u64 = 0;
        for (c, q) in self.smith_coordinates(x).iter().zip(&self.elementary_divisors) {
            idx = idx * q.to_u64().unwrap() + c.to_u64().unwrap();
        }
        idx as usize
    }
}

fn mixed_radix_digits(mut idx: u64, radices: &[u64]) -> Vec<u64> {
    let mut digits = vec![0; radices.len()];
    for (slot, &r) in digits.iter_mut().zip(radices).rev() {
        *slot = idx % r;
        idx /= r;
    }
    digits
}

/// Whether every column of `inner`'s basis lies in `outer`.
pub fn is_sublattice(inner: &Lattice, outer: &Lattice) -> bool {
    inner.basis().columns().iter().all(|c| outer.contains(c))
}

/// `|det|` of an integer matrix as a positive integer.
pub fn abs_det_integer(m: &IntegerMatrix) -> Integer {
    m.det().abs()
}

pub fn rational_vec(v: &[Integer]) -> Vec<Rational> {
    v.iter().cloned().map(rat_from_int).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::scalar::{int, rat};

    fn rl(rows: &[&[(i64, i64)]]) -> Lattice {
        Lattice::new(Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&(p, q)| rat(p, q)).collect()).collect()))
            .unwrap()
    }

    fn scalar(p: i64, q: i64) -> Lattice {
        rl(&[&[(p, q)]])
    }

    #[test]
    fn intersect_examples() {
        assert_eq!(scalar(1, 1).intersect(&scalar(1, 1)).unwrap(), scalar(1, 1));
        assert_eq!(scalar(2, 3).intersect(&scalar(1, 1)).unwrap(), scalar(2, 1));
        assert_eq!(scalar(6, 1).intersect(&scalar(4, 1)).unwrap(), scalar(12, 1));
    }

    #[test]
    fn sum_examples() {
        assert_eq!(scalar(2, 1).sum(&scalar(3, 1)).unwrap(), scalar(1, 1));
        assert_eq!(scalar(6, 1).sum(&scalar(4, 1)).unwrap(), scalar(2, 1));
        let l = rl(&[&[(1, 2), (1, 3)], &[(0, 1), (5, 7)]]);
        assert_eq!(l.sum(&l).unwrap(), l);
    }

    #[test]
    fn volume_and_dual() {
        assert_eq!(Lattice::standard(3).volume(), rat(1, 1));
        assert_eq!(Lattice::standard(2).dual(), Lattice::standard(2));
        assert_eq!(rl(&[&[(1, 1), (0, 1)], &[(0, 1), (3, 1)]]).volume(), rat(3, 1));
        assert_eq!(scalar(1, 2).dual(), scalar(2, 1));
        assert_eq!(scalar(1, 2).density(), rat(2, 1));
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(scalar(2, 1).reduce(&[rat(7, 3)]), vec![rat(1, 3)]);
        assert_eq!(scalar(1, 1).reduce(&[rat(-1, 4)]), vec![rat(3, 4)]);
        assert_eq!(scalar(2, 1).reduce(&[rat(3, 2)]), vec![rat(3, 2)]);
    }

    #[test]
    fn equality_ignores_basis_choice() {
        let a = rl(&[&[(1, 1), (0, 1)], &[(0, 1), (1, 1)]]);
        let b = rl(&[&[(2, 1), (1, 1)], &[(1, 1), (1, 1)]]);
        assert_eq!(a, b);
        let c = rl(&[&[(2, 1), (0, 1)], &[(0, 1), (1, 1)]]);
        assert_ne!(a, c);
    }

    #[test]
    fn singular_basis_rejected() {
        let m = Matrix::from_rows(vec![vec![rat(1, 2), rat(1, 1)], vec![rat(1, 1), rat(2, 1)]]);
        assert_eq!(Lattice::new(m).unwrap_err(), LatticeError::RankDeficient);
    }

    #[test]
    fn quotient_diagonal() {
        let q = rl(&[&[(2, 1), (0, 1)], &[(0, 1), (3, 1)]]).quotient_structure().unwrap();
        assert_eq!(q.elementary_divisors(), &[int(1), int(6)]);
        assert_eq!(q.order(), 6);
        let reps = q.coset_reps();
        for (i, a) in reps.iter().enumerate() {
            assert_eq!(q.index_of(a), i);
            for b in &reps[i + 1..] {
                let diff: Vec<Integer> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                assert!(!q.sub_lattice().contains(&rational_vec(&diff)));
            }
        }
    }

    #[test]
    fn quotient_cyclic() {
        let q = scalar(5, 1).quotient_structure().unwrap();
        assert_eq!(q.elementary_divisors(), &[int(5)]);
        let reps: Vec<Integer> = q.coset_reps().iter().map(|r| r[0].clone()).collect();
        assert_eq!(reps, (0..5).map(int).collect::<Vec<_>>());
    }

    #[test]
    fn quotient_requires_integer_basis() {
        assert_eq!(scalar(1, 2).quotient_structure().unwrap_err(), LatticeError::NotSubLattice);
    }

    #[test]
    fn dimension_identity_on_small_pair() {
        let a = rl(&[&[(1, 2), (0, 1)], &[(1, 3), (1, 1)]]);
        let b = rl(&[&[(1, 1), (1, 1)], &[(0, 1), (3, 2)]]);
        let s = a.sum(&b).unwrap();
        let i = a.intersect(&b).unwrap();
        assert_eq!(s.volume() * i.volume(), a.volume() * b.volume());
        assert!(is_sublattice(&i, &a) && is_sublattice(&i, &b));
        assert!(is_sublattice(&a, &s) && is_sublattice(&b, &s));
    }
}
