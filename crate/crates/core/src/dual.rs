//! Irreducible representations in the rational case.
//!
//! Characters of `N` are triples `(γ1, γ2, σ)` acting by
//! `e^{2πi(⟨γ1,k⟩ + ⟨γ2,l⟩ + σθ)}`. The translation `T_s` moves `γ2` to
//! `γ2 + σs`, so the stabilizer of a character is
//! `G_λ = { k ∈ A(σ)Z^d }` with `A(σ)Z^d = { k : σk ∈ B^{-T}Z^d }`. Every
//! irreducible representation is induced from `G_λ` by the extension
//! `k, l, θ ↦ χ(k, l, θ) ζ(k)` with `ζ` a character of `A(σ)Z^d / AZ^d`.

use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::group::{GroupElement, GroupError, GroupSpec, NormalSubgroupN};
use crate::lattice::{snf, Lattice, LatticeError, QuotientStructure};
use crate::matrix::{IntegerMatrix, RationalMatrix};
use crate::scalar::{frac, int, rat_from_int, to_f64, Integer, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DualError {
    #[error("AZ^d is not contained in A(sigma)Z^d")]
    NotSubLattice,
    #[error("translation part is not in the stabilizer lattice")]
    NotInStabilizer,
    #[error("sigma = {0} is outside [0, m)")]
    SigmaOutOfRange(u64),
    #[error("little group character index does not match the elementary divisors")]
    BadZeta,
    #[error("dimension mismatch")]
    DimensionMismatch,
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

fn dot(a: &[Rational], b: &[Integer]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * rat_from_int(y.clone()))
}

fn dot_rr(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

fn to_rat(v: &[Integer]) -> Vec<Rational> {
    v.iter().cloned().map(rat_from_int).collect()
}

/// Character `(γ1, γ2, σ)` of `N`, with `γ1` reduced into `Λ1 = A^{-T}[0,1)^d`
/// and `γ2` into `Λ2 = B^{-T}[0,1)^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NCharacter {
    pub gamma1: Vec<Rational>,
    pub gamma2: Vec<Rational>,
    pub sigma: u64,
}

/// Parameter `(γ1, γ2, σ, ζ)` of an irreducible representation. `zeta`
/// holds one residue per elementary divisor of `A(σ)Z^d / AZ^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DualParameter {
    pub gamma1: Vec<Rational>,
    pub gamma2: Vec<Rational>,
    pub sigma: u64,
    pub zeta: Vec<Integer>,
}

/// Characters of the finite group `A(σ)Z^d / AZ^d`.
#[derive(Debug, Clone)]
pub struct LittleGroup {
    a_sigma_inv: RationalMatrix,
    left: IntegerMatrix,
    divisors: Vec<Integer>,
}

impl LittleGroup {
    /// `(U A(σ)^{-1}, U)`: coordinates of `k` are `U A(σ)^{-1} k` modulo the divisors.
    pub(crate) fn coordinate_map(&self) -> (&RationalMatrix, &IntegerMatrix) {
        (&self.a_sigma_inv, &self.left)
    }

    pub fn order(&self) -> Integer {
        self.divisors.iter().product()
    }

    pub fn divisors(&self) -> &[Integer] {
        &self.divisors
    }

    /// All character indices, in lexicographic order.
    pub fn characters(&self) -> Vec<Vec<Integer>> {
        let mut out = vec![Vec::new()];
        for q in &self.divisors {
            let q = q.to_u64().expect("little group order is small");
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..q).map(move |t| {
                        let mut v = prefix.clone();
                        v.push(Integer::from(t));
                        v
                    })
                })
                .collect();
        }
        out
    }

    pub fn check(&self, zeta: &[Integer]) -> Result<(), DualError> {
        let ok = zeta.len() == self.divisors.len()
            && zeta.iter().zip(&self.divisors).all(|(t, q)| !t.is_negative() && t < q);
        if ok {
            Ok(())
        } else {
            Err(DualError::BadZeta)
        }
    }

    /// Smith coordinates of the class of `k ∈ A(σ)Z^d`, reduced modulo the
    /// divisors.
    pub fn coordinates(&self, k: &[Integer]) -> Result<Vec<Integer>, DualError> {
        let x = self.a_sigma_inv.mul_vec(&to_rat(k));
        if x.iter().any(|c| !c.denom().is_one()) {
            return Err(DualError::NotInStabilizer);
        }
        let x: Vec<Integer> = x.into_iter().map(|c| c.to_integer()).collect();
        Ok(self.left.mul_vec(&x).iter().zip(&self.divisors).map(|(y, q)| num_integer::Integer::mod_floor(y, q)).collect())
    }

    /// Phase of `ζ_t(k)` for `k ∈ A(σ)Z^d`.
    pub fn evaluate(&self, zeta: &[Integer], k: &[Integer]) -> Result<Rational, DualError> {
        let y = self.coordinates(k)?;
        let mut phase = Rational::zero();
        for ((t, yi), q) in zeta.iter().zip(&y).zip(&self.divisors) {
            phase += Rational::new(t * yi, q.clone());
        }
        Ok(frac(&phase))
    }
}

/// Stabilizer lattice, orbit size and cross-section for one value of `σ`.
#[derive(Debug, Clone)]
pub struct StabilizerData {
    pub sigma: u64,
    /// Canonical basis of `A(σ)Z^d`.
    pub a_sigma: IntegerMatrix,
    pub a_sigma_lattice: Lattice,
    /// `|det A(σ)|`, the number of characters in the orbit.
    pub orbit_size: u64,
    /// `E_σ`, the canonical parallelepiped of `B^{-T}Z^d + σZ^d`.
    pub e_sigma: Lattice,
    /// `Z^d / A(σ)Z^d` with canonical coset representatives.
    pub cosets: QuotientStructure,
    pub little_group: LittleGroup,
}

/// The unitary dual of a group with rational `B`.
#[derive(Debug, Clone)]
pub struct RationalDual {
    spec: GroupSpec,
    normal: NormalSubgroupN,
    lambda1: Lattice,
    lambda2: Lattice,
    m: u64,
}

impl RationalDual {
    /// Integer `B` is accepted and degenerates to the abelian case
    /// (`m = 1`, `A = I`).
    pub fn new(spec: &GroupSpec) -> Result<Self, DualError> {
        let normal = spec.normal_subgroup()?;
        let lambda1 = normal.lattice().dual();
        let lambda2 = spec.dual_modulation_lattice()?;
        let m = spec.m().ok_or(GroupError::IrrationalUnsupported)?;
        Ok(RationalDual { spec: spec.clone(), normal, lambda1, lambda2, m })
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn normal_subgroup(&self) -> &NormalSubgroupN {
        &self.normal
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    /// `Λ1`, basis `A^{-T}`.
    pub fn lambda1(&self) -> &Lattice {
        &self.lambda1
    }

    /// `Λ2`, basis `B^{-T}`.
    pub fn lambda2(&self) -> &Lattice {
        &self.lambda2
    }

    pub fn abs_det_a(&self) -> Integer {
        self.normal.abs_det()
    }

    pub fn stabilizer(&self, sigma: u64) -> Result<StabilizerData, DualError> {
        if sigma >= self.m {
            return Err(DualError::SigmaOutOfRange(sigma));
        }
        let d = self.spec.dim();
        let (a_sigma_lattice, e_sigma) = if sigma == 0 {
            (Lattice::standard(d), self.lambda2.clone())
        } else {
            let s = rat_from_int(int(sigma as i64));
            let scaled = self.lambda2.scaled(&s.recip())?;
            let a_sigma = scaled.intersect(&Lattice::standard(d))?;
            let e = self.lambda2.sum(&Lattice::standard(d).scaled(&s)?)?;
            (a_sigma, e)
        };
        let a_sigma = a_sigma_lattice.basis().to_integer().ok_or(DualError::NotSubLattice)?;
        let cosets = a_sigma_lattice.quotient_structure()?;
        let orbit_size = cosets.order() as u64;

        // A(σ)Z^d / AZ^d ≅ Z^d / CZ^d with C = A(σ)^{-1} A.
        let a_sigma_inv = a_sigma_lattice.basis_inverse().clone();
        let c = (&a_sigma_inv * self.normal.lattice().basis()).to_integer().ok_or(DualError::NotSubLattice)?;
        let s = snf(&c);
        let little_group = LittleGroup { a_sigma_inv, left: s.left, divisors: s.divisors };

        Ok(StabilizerData { sigma, a_sigma, a_sigma_lattice, orbit_size, e_sigma, cosets, little_group })
    }

    pub fn stabilizers(&self) -> Result<Vec<StabilizerData>, DualError> {
        (0..self.m).map(|s| self.stabilizer(s)).collect()
    }

    /// Characters of `N` reduced into the canonical domains.
    pub fn character(&self, gamma1: &[Rational], gamma2: &[Rational], sigma: u64) -> NCharacter {
        NCharacter { gamma1: self.lambda1.reduce(gamma1), gamma2: self.lambda2.reduce(gamma2), sigma }
    }

    /// Phase of `χ(n)` for `n ∈ N`.
    pub fn evaluate_n(&self, chi: &NCharacter, n: &GroupElement) -> Result<Rational, DualError> {
        if !self.normal.contains(n) {
            return Err(DualError::NotInStabilizer);
        }
        self.raw_character(&chi.gamma1, &chi.gamma2, chi.sigma, n)
    }

    fn raw_character(&self, g1: &[Rational], g2: &[Rational], sigma: u64, g: &GroupElement) -> Result<Rational, DualError> {
        let l = self.spec.modulation_vector(&g.l_coeff)?;
        let phase = dot(g1, &g.k) + dot_rr(g2, &l) + rat_from_int(int(sigma as i64)) * &g.phase;
        Ok(frac(&phase))
    }

    /// `{ (γ1, ρ(γ2 + σs), σ) }` over coset representatives `s` of
    /// `Z^d / A(σ)Z^d`.
    pub fn orbit(&self, chi: &NCharacter) -> Result<Vec<NCharacter>, DualError> {
        let stab = self.stabilizer(chi.sigma)?;
        let s = rat_from_int(int(chi.sigma as i64));
        Ok(stab
            .cosets
            .coset_reps()
            .iter()
            .map(|rep| {
                let shifted: Vec<Rational> = chi.gamma2.iter().zip(rep).map(|(g, r)| g + &s * rat_from_int(r.clone())).collect();
                NCharacter { gamma1: chi.gamma1.clone(), gamma2: self.lambda2.reduce(&shifted), sigma: chi.sigma }
            })
            .collect())
    }

    /// Every character of `A(σ)Z^d / AZ^d`.
    pub fn little_group_dual(&self, sigma: u64) -> Result<Vec<Vec<Integer>>, DualError> {
        Ok(self.stabilizer(sigma)?.little_group.characters())
    }

    pub fn representation(&self, param: &DualParameter) -> Result<InducedRepresentation, DualError> {
        let stab = self.stabilizer(param.sigma)?;
        self.representation_with(&stab, param)
    }

    /// Induced representation reusing precomputed stabilizer data.
    pub fn representation_with(&self, stab: &StabilizerData, param: &DualParameter) -> Result<InducedRepresentation, DualError> {
        let d = self.spec.dim();
        if param.gamma1.len() != d || param.gamma2.len() != d || stab.sigma != param.sigma {
            return Err(DualError::DimensionMismatch);
        }
        stab.little_group.check(&param.zeta)?;
        Ok(InducedRepresentation {
            spec: self.spec.clone(),
            stab: stab.clone(),
            gamma1: param.gamma1.clone(),
            gamma2: param.gamma2.clone(),
            sigma: param.sigma,
            zeta: param.zeta.clone(),
        })
    }
}

/// Square matrix with a single unit-modulus entry `e^{2πi phases[a]}` per
/// row, in column `perm[a]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MonomialMatrix {
    pub perm: Vec<usize>,
    #[serde(serialize_with = "serialize_phases")]
    pub phases: Vec<Rational>,
}

fn serialize_phases<S: serde::Serializer>(p: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(p.len()))?;
    for x in p {
        seq.serialize_element(&crate::scalar::format_rational(x))?;
    }
    seq.end()
}

impl MonomialMatrix {
    pub fn identity(n: usize) -> Self {
        MonomialMatrix { perm: (0..n).collect(), phases: vec![Rational::zero(); n] }
    }

    pub fn scalar(n: usize, phase: Rational) -> Self {
        MonomialMatrix { perm: (0..n).collect(), phases: vec![frac(&phase); n] }
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Permutation is a bijection and every phase lies in `[0, 1)`. Unit
    /// modulus then holds by construction, so this is exact unitarity.
    pub fn is_unitary(&self) -> bool {
        let n = self.perm.len();
        let mut seen = vec![false; n];
        for &p in &self.perm {
            if p >= n || seen[p] {
                return false;
            }
            seen[p] = true;
        }
        self.phases.len() == n && self.phases.iter().all(|x| *x >= Rational::zero() && *x < Rational::one())
    }

    pub fn mul(&self, other: &MonomialMatrix) -> MonomialMatrix {
        let perm = self.perm.iter().map(|&p| other.perm[p]).collect();
        let phases = self.perm.iter().zip(&self.phases).map(|(&p, x)| frac(&(x + &other.phases[p]))).collect();
        MonomialMatrix { perm, phases }
    }

    /// Conjugate transpose, which is the inverse.
    pub fn inverse(&self) -> MonomialMatrix {
        let n = self.dim();
        let mut perm = vec![0; n];
        let mut phases = vec![Rational::zero(); n];
        for (a, &p) in self.perm.iter().enumerate() {
            perm[p] = a;
            phases[p] = frac(&-&self.phases[a]);
        }
        MonomialMatrix { perm, phases }
    }

    pub fn direct_sum(&self, other: &MonomialMatrix) -> MonomialMatrix {
        let n = self.dim();
        let mut perm = self.perm.clone();
        perm.extend(other.perm.iter().map(|p| p + n));
        let mut phases = self.phases.clone();
        phases.extend(other.phases.iter().cloned());
        MonomialMatrix { perm, phases }
    }

    pub fn trace(&self) -> Complex64 {
        self.perm
            .iter()
            .enumerate()
            .filter(|(a, p)| a == *p)
            .map(|(a, _)| Complex64::from_polar(1.0, std::f64::consts::TAU * to_f64(&self.phases[a])))
            .sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let n = self.dim();
        let mut out = vec![vec![Complex64::zero(); n]; n];
        for (a, &p) in self.perm.iter().enumerate() {
            out[a][p] = Complex64::from_polar(1.0, std::f64::consts::TAU * to_f64(&self.phases[a]));
        }
        out
    }
}

/// Row `a` of an induced matrix with the dependence on `(γ1, γ2)` left
/// open: the entry is `e^{2πi(−⟨γ1, k⟩ − ⟨γ2, l⟩ + constant)}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicEntry {
    pub column: usize,
    pub k: Vec<Integer>,
    pub l: Vec<Rational>,
    pub constant: Rational,
}

/// `Ind_{G_λ}^G (χ_λ ⊗ ζ̄)` realized on functions over the canonical coset
/// representatives of `Z^d / A(σ)Z^d`.
#[derive(Debug, Clone)]
pub struct InducedRepresentation {
    spec: GroupSpec,
    stab: StabilizerData,
    gamma1: Vec<Rational>,
    gamma2: Vec<Rational>,
    sigma: u64,
    zeta: Vec<Integer>,
}

impl InducedRepresentation {
    pub fn dim(&self) -> usize {
        self.stab.cosets.order()
    }

    pub fn stabilizer(&self) -> &StabilizerData {
        &self.stab
    }

    /// Phase of the extended character `χ_λ(k, l, θ) ζ(k)` on `G_λ`.
    pub fn extended_character(&self, g: &GroupElement) -> Result<Rational, DualError> {
        let l = self.spec.modulation_vector(&g.l_coeff)?;
        let z = self.stab.little_group.evaluate(&self.zeta, &g.k)?;
        let phase = dot(&self.gamma1, &g.k) + dot_rr(&self.gamma2, &l) + rat_from_int(int(self.sigma as i64)) * &g.phase + z;
        Ok(frac(&phase))
    }

    /// For every coset representative `k_a` write `g^{-1} T_{k_a} = T_{k_b} P`
    /// with `P ∈ G_λ`, returning `(b, P)`.
    fn decompose(&self, g: &GroupElement) -> Result<Vec<(usize, GroupElement)>, DualError> {
        let d = self.spec.dim();
        if g.dim() != d || !self.spec.contains(g) {
            return Err(GroupError::MixedSpec.into());
        }
        let gi = self.spec.inverse_unchecked(g);
        let li = self.spec.modulation_vector(&gi.l_coeff)?;
        let reps = self.stab.cosets.coset_reps();
        reps.iter()
            .map(|ka| {
                // g^{-1} T_{k_a}
                let kh: Vec<Integer> = gi.k.iter().zip(ka).map(|(x, y)| x + y).collect();
                let theta = frac(&(&gi.phase + dot(&li, ka)));
                let b = self.stab.cosets.index_of(&kh);
                let kp: Vec<Integer> = kh.iter().zip(&reps[b]).map(|(x, y)| x - y).collect();
                Ok((b, GroupElement { k: kp, l_coeff: gi.l_coeff.clone(), phase: theta }))
            })
            .collect()
    }

    pub fn matrix(&self, g: &GroupElement) -> Result<MonomialMatrix, DualError> {
        let parts = self.decompose(g)?;
        let mut perm = Vec::with_capacity(parts.len());
        let mut phases = Vec::with_capacity(parts.len());
        for (b, p) in parts {
            perm.push(b);
            phases.push(frac(&-self.extended_character(&p)?));
        }
        Ok(MonomialMatrix { perm, phases })
    }

    /// Matrix entries as affine functions of `(γ1, γ2)`; the stored
    /// `γ1, γ2` are ignored.
    pub fn symbolic(&self, g: &GroupElement) -> Result<Vec<SymbolicEntry>, DualError> {
        let sigma = rat_from_int(int(self.sigma as i64));
        self.decompose(g)?
            .into_iter()
            .map(|(b, p)| {
                let l = self.spec.modulation_vector(&p.l_coeff)?;
                let z = self.stab.little_group.evaluate(&self.zeta, &p.k)?;
                let constant = frac(&(z - &sigma * &p.phase));
                Ok(SymbolicEntry { column: b, k: p.k, l, constant })
            })
            .collect()
    }
}

/// Dimension of the commutant of the matrices `gens`, counted exactly.
///
/// `X R = R X` for `R` with entries `e(r_a)` at `(a, π(a))` reads
/// `X(π(i), π(a)) = e(r_a − r_i) X(i, a)`. Unknowns linked by these relations
/// form components; each component contributes one dimension unless the
/// phases around some cycle disagree, in which case it forces zero.
pub fn commutant_dimension(gens: &[MonomialMatrix]) -> usize {
    let Some(first) = gens.first() else {
        return 0;
    };
    let n = first.dim();
    let mut uf = PhaseUnionFind::new(n * n);
    for r in gens {
        assert_eq!(r.dim(), n, "generators must share a dimension");
        for i in 0..n {
            for a in 0..n {
                let w = frac(&(&r.phases[a] - &r.phases[i]));
                uf.relate(i * n + a, r.perm[i] * n + r.perm[a], w);
            }
        }
    }
    uf.consistent_components()
}

/// Union-find over unknowns with `value(u) = e(potential(u)) value(root)`.
struct PhaseUnionFind {
    parent: Vec<usize>,
    potential: Vec<Rational>,
    broken: Vec<bool>,
}

impl PhaseUnionFind {
    fn new(n: usize) -> Self {
        PhaseUnionFind { parent: (0..n).collect(), potential: vec![Rational::zero(); n], broken: vec![false; n] }
    }

    fn find(&mut self, u: usize) -> (usize, Rational) {
        let mut path = Vec::new();
        let mut r = u;
        while self.parent[r] != r {
            path.push(r);
            r = self.parent[r];
        }
        // Compress from the node nearest the root outward.
        for &v in path.iter().rev() {
            let p = self.parent[v];
            if p != r {
                let pv = frac(&(&self.potential[v] + &self.potential[p]));
                self.potential[v] = pv;
                self.parent[v] = r;
            }
        }
        (r, self.potential[u].clone())
    }

    /// Records `value(v) = e(w) value(u)`.
    fn relate(&mut self, u: usize, v: usize, w: Rational) {
        let (ru, pu) = self.find(u);
        let (rv, pv) = self.find(v);
        if ru == rv {
            if frac(&(&pu + &w - &pv)) != Rational::zero() {
                self.broken[ru] = true;
            }
            return;
        }
        // value(rv) = e(pu + w - pv) value(ru)
        self.parent[rv] = ru;
        self.potential[rv] = frac(&(pu + w - pv));
        if self.broken[rv] {
            self.broken[ru] = true;
        }
    }

    fn consistent_components(&mut self) -> usize {
        (0..self.parent.len()).filter(|&u| self.parent[u] == u && !self.broken[u]).count()
    }
}
