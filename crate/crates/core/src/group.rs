//! The time-frequency group generated by `T_k` (`k ∈ Z^d`) and `M_l`
//! (`l ∈ BZ^d`).
//!
//! An element `(k, c, θ)` stands for `e^{2πiθ} T_k M_{Bc}`. Moving a
//! modulation past a translation produces `M_l T_k = e^{2πi⟨l,k⟩} T_k M_l`,
//! which gives the group law
//! `(k1, c1, θ1)(k2, c2, θ2) = (k1 + k2, c1 + c2, θ1 + θ2 + ⟨B c1, k2⟩)`.

use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::lattice::{Lattice, LatticeError};
use crate::matrix::{IntegerMatrix, RationalMatrix};
use crate::scalar::{frac, int, lcm, rat_from_int, Integer, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("B is singular")]
    Singular,
    #[error("B must be square, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("irrational parameters are supported only for d = 1")]
    IrrationalUnsupported,
    #[error("elements belong to different groups")]
    MixedSpec,
    #[error("operation requires {expected} kind, got {actual:?}")]
    WrongKind { expected: &'static str, actual: GroupKind },
    #[error("commutator order {0} is too large")]
    OrderTooLarge(Integer),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GroupKind {
    /// `B` integral: the group is abelian.
    Integer,
    /// `B` rational with a non-integral entry: `[G, G] ≅ Z_m`, type I.
    RationalNonInteger,
    /// `d = 1` and `B = α` irrational: `[G, G]` is infinite, not type I.
    IrrationalD1,
}

impl GroupKind {
    pub fn name(self) -> &'static str {
        match self {
            GroupKind::Integer => "Integer",
            GroupKind::RationalNonInteger => "RationalNonInteger",
            GroupKind::IrrationalD1 => "IrrationalD1",
        }
    }
}

#[derive(Debug, Clone)]
enum Params {
    Rational { b: RationalMatrix, b_inv_tr: RationalMatrix, m: u64 },
    Irrational { alpha: f64 },
}

/// A classified time-frequency group.
#[derive(Debug, Clone)]
pub struct GroupSpec {
    d: usize,
    kind: GroupKind,
    params: Params,
}

/// Least common multiple of the denominators of `B`.
pub fn commutator_order(b: &RationalMatrix) -> Integer {
    b.entries().iter().fold(Integer::one(), |acc, x| lcm(&acc, x.denom()))
}

/// Classifies the group generated by a rational matrix `B`.
pub fn classify(b: RationalMatrix) -> Result<GroupSpec, GroupError> {
    if !b.is_square() {
        return Err(GroupError::NotSquare(b.rows(), b.cols()));
    }
    let d = b.rows();
    let b_inv_tr = b.inverse_transpose().ok_or(GroupError::Singular)?;
    let m_big = commutator_order(&b);
    let m = m_big.to_u64().ok_or(GroupError::OrderTooLarge(m_big))?;
    let kind = if m == 1 { GroupKind::Integer } else { GroupKind::RationalNonInteger };
    Ok(GroupSpec { d, kind, params: Params::Rational { b, b_inv_tr, m } })
}

/// Group for `d = 1` with modulation step `alpha`, declared irrational by the
/// caller. The value is only used numerically.
pub fn classify_irrational(d: usize, alpha: f64) -> Result<GroupSpec, GroupError> {
    if d != 1 {
        return Err(GroupError::IrrationalUnsupported);
    }
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(GroupError::Singular);
    }
    Ok(GroupSpec { d: 1, kind: GroupKind::IrrationalD1, params: Params::Irrational { alpha } })
}

/// Exact group element `e^{2πi phase} T_k M_{B l_coeff}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    pub k: Vec<Integer>,
    pub l_coeff: Vec<Integer>,
    /// Always reduced into `[0, 1)`.
    pub phase: Rational,
}

impl GroupElement {
    pub fn new(k: Vec<Integer>, l_coeff: Vec<Integer>, phase: Rational) -> Self {
        GroupElement { k, l_coeff, phase: frac(&phase) }
    }

    pub fn identity(d: usize) -> Self {
        GroupElement { k: vec![Integer::zero(); d], l_coeff: vec![Integer::zero(); d], phase: Rational::zero() }
    }

    pub fn translation(k: Vec<Integer>) -> Self {
        let d = k.len();
        GroupElement { k, l_coeff: vec![Integer::zero(); d], phase: Rational::zero() }
    }

    pub fn modulation(l_coeff: Vec<Integer>) -> Self {
        let d = l_coeff.len();
        GroupElement { k: vec![Integer::zero(); d], l_coeff, phase: Rational::zero() }
    }

    pub fn central(d: usize, phase: Rational) -> Self {
        GroupElement { k: vec![Integer::zero(); d], l_coeff: vec![Integer::zero(); d], phase: frac(&phase) }
    }

    pub fn dim(&self) -> usize {
        self.k.len()
    }

    pub fn is_identity(&self) -> bool {
        self.phase.is_zero() && self.k.iter().all(Zero::is_zero) && self.l_coeff.iter().all(Zero::is_zero)
    }

    pub fn is_central(&self) -> bool {
        self.k.iter().all(Zero::is_zero) && self.l_coeff.iter().all(Zero::is_zero)
    }
}

fn dot(a: &[Rational], b: &[Integer]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * rat_from_int(y.clone()))
}

impl GroupSpec {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn b(&self) -> Result<&RationalMatrix, GroupError> {
        match &self.params {
            Params::Rational { b, .. } => Ok(b),
            Params::Irrational { .. } => Err(GroupError::IrrationalUnsupported),
        }
    }

    /// `B^{-T}`, the basis of the dual of the modulation lattice.
    pub fn b_inv_tr(&self) -> Result<&RationalMatrix, GroupError> {
        match &self.params {
            Params::Rational { b_inv_tr, .. } => Ok(b_inv_tr),
            Params::Irrational { .. } => Err(GroupError::IrrationalUnsupported),
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match self.params {
            Params::Irrational { alpha } => Some(alpha),
            Params::Rational { .. } => None,
        }
    }

    /// Order `m` of the commutator subgroup; `None` when it is infinite.
    pub fn m(&self) -> Option<u64> {
        match self.params {
            Params::Rational { m, .. } => Some(m),
            Params::Irrational { .. } => None,
        }
    }

    pub(crate) fn rational_m(&self) -> Result<u64, GroupError> {
        self.m().ok_or(GroupError::IrrationalUnsupported)
    }

    pub fn require_kind(&self, kind: GroupKind) -> Result<(), GroupError> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(GroupError::WrongKind { expected: kind.name(), actual: self.kind })
        }
    }

    /// `|det B|`
    pub fn abs_det_b(&self) -> Result<Rational, GroupError> {
        Ok(self.b()?.abs_det())
    }

    /// The modulation lattice `BZ^d`.
    pub fn modulation_lattice(&self) -> Result<Lattice, GroupError> {
        Ok(Lattice::new(self.b()?.clone())?)
    }

    /// `B^{-T} Z^d`, with the basis `B^{-T}` kept for its fundamental domain.
    pub fn dual_modulation_lattice(&self) -> Result<Lattice, GroupError> {
        Ok(Lattice::new(self.b_inv_tr()?.clone())?)
    }

    /// `l = B c`
    pub fn modulation_vector(&self, l_coeff: &[Integer]) -> Result<Vec<Rational>, GroupError> {
        let lc: Vec<Rational> = l_coeff.iter().cloned().map(rat_from_int).collect();
        Ok(self.b()?.mul_vec(&lc))
    }

    fn check(&self, g: &GroupElement) -> Result<(), GroupError> {
        if g.k.len() != self.d || g.l_coeff.len() != self.d {
            return Err(GroupError::MixedSpec);
        }
        let m = self.rational_m()?;
        if !(m % g.phase.denom()).is_zero() {
            return Err(GroupError::MixedSpec);
        }
        Ok(())
    }

    /// Whether `g` is an element of this group: right dimension and phase in
    /// `(1/m) Z`.
    pub fn contains(&self, g: &GroupElement) -> bool {
        self.check(g).is_ok()
    }

    /// `e^{2πi⟨B c, k⟩}` exponent: the phase picked up by moving `M_{Bc}`
    /// to the right of `T_k`.
    pub fn swap_phase(&self, l_coeff: &[Integer], k: &[Integer]) -> Result<Rational, GroupError> {
        Ok(dot(&self.modulation_vector(l_coeff)?, k))
    }

    pub fn multiply(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check(g)?;
        self.check(h)?;
        Ok(self.multiply_unchecked(g, h))
    }

    pub(crate) fn multiply_unchecked(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        let b = self.b().expect("rational group");
        let l = b.mul_vec(&g.l_coeff.iter().cloned().map(rat_from_int).collect::<Vec<_>>());
        let phase = &g.phase + &h.phase + dot(&l, &h.k);
        GroupElement {
            k: g.k.iter().zip(&h.k).map(|(a, b)| a + b).collect(),
            l_coeff: g.l_coeff.iter().zip(&h.l_coeff).map(|(a, b)| a + b).collect(),
            phase: frac(&phase),
        }
    }

    pub fn inverse(&self, g: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check(g)?;
        Ok(self.inverse_unchecked(g))
    }

    pub(crate) fn inverse_unchecked(&self, g: &GroupElement) -> GroupElement {
        let phase = -&g.phase + self.swap_phase(&g.l_coeff, &g.k).expect("rational group");
        GroupElement {
            k: g.k.iter().map(|x| -x).collect(),
            l_coeff: g.l_coeff.iter().map(|x| -x).collect(),
            phase: frac(&phase),
        }
    }

    /// `g h g^{-1} h^{-1}`
    pub fn commutator(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement, GroupError> {
        let gh = self.multiply(g, h)?;
        let gi = self.inverse_unchecked(g);
        let hi = self.inverse_unchecked(h);
        Ok(self.multiply_unchecked(&self.multiply_unchecked(&gh, &gi), &hi))
    }

    /// `T_{e_i}`, `M_{B e_i}` and the central generator `e^{2πi/m}`.
    pub fn generators(&self) -> Result<Vec<GroupElement>, GroupError> {
        let m = self.rational_m()?;
        let d = self.d;
        let unit = |i: usize| (0..d).map(|j| int((i == j) as i64)).collect::<Vec<_>>();
        let mut out: Vec<GroupElement> = (0..d).map(|i| GroupElement::translation(unit(i))).collect();
        out.extend((0..d).map(|i| GroupElement::modulation(unit(i))));
        out.push(GroupElement::central(d, Rational::new(int(1), int(m as i64))));
        Ok(out)
    }

    /// Uniform random element with `|k_i|, |c_i| ≤ bound` and a random phase
    /// in `(1/m) Z`.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R, bound: i64) -> Result<GroupElement, GroupError> {
        let m = self.rational_m()? as i64;
        let k = (0..self.d).map(|_| int(rng.random_range(-bound..=bound))).collect();
        let l = (0..self.d).map(|_| int(rng.random_range(-bound..=bound))).collect();
        let theta = Rational::new(int(rng.random_range(0..m)), int(m));
        Ok(GroupElement::new(k, l, theta))
    }

    /// The normal subgroup `N = { e^{2πiθ} T_k M_l : k ∈ AZ^d }` where
    /// `AZ^d = B^{-T} Z^d ∩ Z^d`.
    pub fn normal_subgroup(&self) -> Result<NormalSubgroupN, GroupError> {
        let m = self.rational_m()?;
        let lattice = self.dual_modulation_lattice()?.intersect(&Lattice::standard(self.d))?;
        let a = lattice.basis().to_integer().expect("sublattice of Z^d has an integer canonical basis");
        Ok(NormalSubgroupN { a, lattice, m })
    }
}

/// The abelian normal subgroup `N`: all modulations and central phases
/// together with translations by `AZ^d`.
#[derive(Debug, Clone)]
pub struct NormalSubgroupN {
    a: IntegerMatrix,
    lattice: Lattice,
    m: u64,
}

impl NormalSubgroupN {
    /// Canonical (Hermite) basis `A`.
    pub fn a(&self) -> &IntegerMatrix {
        &self.a
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    /// `|det A| = (Z^d : AZ^d)`
    pub fn abs_det(&self) -> Integer {
        self.lattice.volume().to_integer()
    }

    pub fn contains_translation(&self, k: &[Integer]) -> bool {
        self.lattice.contains(&k.iter().cloned().map(rat_from_int).collect::<Vec<_>>())
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.contains_translation(&g.k)
    }
}

/// `g n g^{-1}`
pub fn conjugate(spec: &GroupSpec, g: &GroupElement, n: &GroupElement) -> Result<GroupElement, GroupError> {
    let gn = spec.multiply(g, n)?;
    Ok(spec.multiply_unchecked(&gn, &spec.inverse_unchecked(g)))
}
