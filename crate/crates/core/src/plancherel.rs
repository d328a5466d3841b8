//! Plancherel measure and group Fourier transforms in the rational case.
//!
//! The measure is carried by the cells `Λ1 × E_σ × {σ} × {ζ}`. On each cell
//! it is Lebesgue measure with density `|det A| / vol(E_σ)`, and the
//! representation at `(γ1, γ2, σ, ζ)` has dimension `|det A(σ)|`. The
//! Fourier transform of a finitely supported function has entries that are
//! trigonometric polynomials in `(γ1, γ2)`, so `∫ trace(f̂ ĝ*)` is computed in
//! closed form after mapping each cell to the unit cube.

use std::collections::BTreeMap;

use num_complex::{Complex, Complex64};
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dual::{DualError, DualParameter, InducedRepresentation, RationalDual, StabilizerData};
use crate::group::{GroupElement, GroupError, GroupKind, GroupSpec};
use crate::lattice::Lattice;
use crate::matrix::RationalMatrix;
use crate::scalar::{format_rational, frac, int, rat, rat_from_int, to_f64, Integer, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlancherelError {
    #[error("function has empty support")]
    EmptySupport,
    #[error("integers in the closed-form integrator exceed 128 bits")]
    Overflow,
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Dual(#[from] DualError),
}

impl From<crate::lattice::LatticeError> for PlancherelError {
    fn from(e: crate::lattice::LatticeError) -> Self {
        PlancherelError::Group(e.into())
    }
}

/// Weight attached to each little-group character within a `σ` fiber.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ZetaWeighting {
    /// Every `ζ` counts once.
    Counting,
    /// Every `ζ` carries the index `(G_λ : N)`.
    LittleGroupIndex,
}

/// Placement of `|det A|` in the cell density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WeightFormula {
    /// `1 / (|det A|^{-1} vol(E_σ))`
    Literal,
    /// `|det A|^{-1} vol(E_σ)`
    Inverted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PlancherelConfig {
    pub zeta_weighting: ZetaWeighting,
    pub weight_formula: WeightFormula,
}

impl Default for PlancherelConfig {
    fn default() -> Self {
        PlancherelConfig { zeta_weighting: ZetaWeighting::Counting, weight_formula: WeightFormula::Literal }
    }
}

/// All atoms of the measure with a fixed `σ`.
#[derive(Debug, Clone)]
pub struct PlancherelAtomFamily {
    pub sigma: u64,
    pub e_sigma: Lattice,
    pub lambda1: Lattice,
    pub zeta_count: u64,
    /// Dimension of every representation in the family, `|det A(σ)|`.
    pub dim: u64,
    /// `|det A| / vol(E_σ)`
    pub density_weight: Rational,
}

/// The atom families, one per `σ ∈ [0, m)`.
pub fn measure_atoms(spec: &GroupSpec) -> Result<Vec<PlancherelAtomFamily>, PlancherelError> {
    let dual = RationalDual::new(spec)?;
    let det_a = rat_from_int(dual.abs_det_a());
    dual.stabilizers()?
        .into_iter()
        .map(|s| {
            let zeta_count = s.little_group.order().to_u64().expect("small little group");
            Ok(PlancherelAtomFamily {
                sigma: s.sigma,
                density_weight: &det_a / s.e_sigma.volume(),
                e_sigma: s.e_sigma,
                lambda1: dual.lambda1().clone(),
                zeta_count,
                dim: s.orbit_size,
            })
        })
        .collect()
}

pub type ExactComplex = Complex<Rational>;

/// Finitely supported function on the group.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroupFunction {
    terms: BTreeMap<GroupElement, ExactComplex>,
}

impl GroupFunction {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn delta(g: GroupElement) -> Self {
        let mut f = Self::new();
        f.add(g, Complex::new(rat(1, 1), rat(0, 1)));
        f
    }

    /// Adds `coeff` at `g`; coefficients at repeated elements are summed.
    pub fn add(&mut self, g: GroupElement, coeff: ExactComplex) {
        let entry = self.terms.entry(g).or_insert_with(|| Complex::new(Rational::zero(), Rational::zero()));
        *entry = &*entry + coeff;
        self.terms.retain(|_, c| !c.is_zero());
    }

    pub fn support(&self) -> impl Iterator<Item = (&GroupElement, &ExactComplex)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Σ |f(g)|²`, exact.
    pub fn norm_sqr(&self) -> Rational {
        self.terms.values().map(|c| c.norm_sqr()).fold(Rational::zero(), |a, b| a + b)
    }

    /// `Σ f(x) conj(g(x))`, exact.
    pub fn inner(&self, other: &GroupFunction) -> ExactComplex {
        let mut acc = Complex::new(Rational::zero(), Rational::zero());
        for (x, a) in &self.terms {
            if let Some(b) = other.terms.get(x) {
                acc = acc + a * b.conj();
            }
        }
        acc
    }

    /// Random function with `support` distinct elements drawn from
    /// `|k_i|, |c_i| ≤ bound` and coefficients with numerators in `[-9, 9]`
    /// and denominators in `[1, 6]`.
    pub fn random<R: Rng + ?Sized>(spec: &GroupSpec, rng: &mut R, support: usize, bound: i64) -> Result<Self, GroupError> {
        let mut f = GroupFunction::new();
        let mut guard = 0;
        while f.len() < support && guard < 100 * support + 100 {
            guard += 1;
            // Half the draws reuse a (k, l) already present with a new central
            // phase, so that different central characters are weighted apart.
            let g = if !f.is_empty() && rng.random_bool(0.5) {
                let base = f.terms.keys().nth(rng.random_range(0..f.len())).unwrap().clone();
                let m = spec.m().unwrap_or(1) as i64;
                let tau = GroupElement::central(spec.dim(), Rational::new(int(rng.random_range(1..m.max(2))), int(m)));
                spec.multiply(&base, &tau)?
            } else {
                spec.random_element(rng, bound)?
            };
            if f.terms.contains_key(&g) {
                continue;
            }
            let mut part = || Rational::new(int(rng.random_range(-9..=9)), int(rng.random_range(1..=6)));
            let c = Complex::new(part(), part());
            if !c.is_zero() {
                f.add(g, c);
            }
        }
        Ok(f)
    }
}

fn to_c64(c: &ExactComplex) -> Complex64 {
    Complex64::new(to_f64(&c.re), to_f64(&c.im))
}

fn e(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU * phase)
}

/// `∫_0^1 e^{2πiws} ds`
pub fn phi(w: &Rational) -> Complex64 {
    if w.is_zero() {
        Complex64::new(1.0, 0.0)
    } else if w.denom() == &int(1) {
        Complex64::zero()
    } else {
        let x = to_f64(w);
        (e(to_f64(&frac(w))) - 1.0) / Complex64::new(0.0, std::f64::consts::TAU * x)
    }
}

/// `coeff · e^{2πi(−⟨γ1, k⟩ − ⟨γ2, l⟩ + c)}`
#[derive(Debug, Clone, PartialEq)]
pub struct TrigTerm {
    pub coeff: Complex64,
    pub k: Vec<Integer>,
    pub l: Vec<Rational>,
    pub c: Rational,
}

impl TrigTerm {
    pub fn phase_at(&self, gamma1: &[Rational], gamma2: &[Rational]) -> Rational {
        let mut p = self.c.clone();
        for (g, k) in gamma1.iter().zip(&self.k) {
            p -= g * rat_from_int(k.clone());
        }
        for (g, l) in gamma2.iter().zip(&self.l) {
            p -= g * l;
        }
        frac(&p)
    }

    fn phase_at_f64(&self, gamma1: &[f64], gamma2: &[f64]) -> f64 {
        let mut p = to_f64(&self.c);
        for (g, k) in gamma1.iter().zip(&self.k) {
            p -= g * k.to_f64().unwrap();
        }
        for (g, l) in gamma2.iter().zip(&self.l) {
            p -= g * to_f64(l);
        }
        p
    }

    fn same_frequency(&self, other: &TrigTerm) -> bool {
        self.k == other.k && self.l == other.l && self.c == other.c
    }
}

/// Square matrix of trigonometric polynomials in `(γ1, γ2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolyMatrix {
    n: usize,
    entries: Vec<Vec<TrigTerm>>,
}

impl TrigPolyMatrix {
    pub fn zeros(n: usize) -> Self {
        TrigPolyMatrix { n, entries: vec![Vec::new(); n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> &[TrigTerm] {
        &self.entries[i * self.n + j]
    }

    pub fn push(&mut self, i: usize, j: usize, term: TrigTerm) {
        let slot = &mut self.entries[i * self.n + j];
        if let Some(t) = slot.iter_mut().find(|t| t.same_frequency(&term)) {
            t.coeff += term.coeff;
        } else {
            slot.push(term);
        }
    }

    pub fn term_count(&self) -> usize {
        self.entries.iter().map(Vec::len).sum()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                for t in self.entry(i, j) {
                    out.push(
                        j,
                        i,
                        TrigTerm {
                            coeff: t.coeff.conj(),
                            k: t.k.iter().map(|x| -x).collect(),
                            l: t.l.iter().map(|x| -x).collect(),
                            c: frac(&-&t.c),
                        },
                    );
                }
            }
        }
        out
    }

    pub fn product(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for m in 0..n {
                for a in self.entry(i, m) {
                    for j in 0..n {
                        for b in other.entry(m, j) {
                            out.push(
                                i,
                                j,
                                TrigTerm {
                                    coeff: a.coeff * b.coeff,
                                    k: a.k.iter().zip(&b.k).map(|(x, y)| x + y).collect(),
                                    l: a.l.iter().zip(&b.l).map(|(x, y)| x + y).collect(),
                                    c: frac(&(&a.c + &b.c)),
                                },
                            );
                        }
                    }
                }
            }
        }
        out
    }

    pub fn evaluate(&self, gamma1: &[f64], gamma2: &[f64]) -> Vec<Vec<Complex64>> {
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| self.entry(i, j).iter().map(|t| t.coeff * e(t.phase_at_f64(gamma1, gamma2))).sum())
                    .collect()
            })
            .collect()
    }

    pub fn trace_at(&self, gamma1: &[f64], gamma2: &[f64]) -> Complex64 {
        (0..self.n).flat_map(|i| self.entry(i, i)).map(|t| t.coeff * e(t.phase_at_f64(gamma1, gamma2))).sum()
    }

    /// `∫_{Λ1} ∫_{E} trace dγ2 dγ1` over the parallelepipeds spanned by the
    /// lattice bases.
    pub fn integrate_trace(&self, lambda1: &Lattice, e_sigma: &Lattice) -> Complex64 {
        let b1 = lambda1.basis().transpose();
        let b2 = e_sigma.basis().transpose();
        let vol = to_f64(&(lambda1.volume() * e_sigma.volume()));
        let mut acc = Complex64::zero();
        for t in (0..self.n).flat_map(|i| self.entry(i, i)) {
            let w1 = b1.mul_vec(&t.k.iter().cloned().map(rat_from_int).collect::<Vec<_>>());
            let w2 = b2.mul_vec(&t.l);
            let mut v = t.coeff * e(to_f64(&t.c));
            for w in w1.iter().chain(&w2) {
                v *= phi(&-w);
            }
            acc += v;
        }
        acc * vol
    }
}

/// `f̂(γ1, γ2, σ, ζ) = Σ_g f(g) ρ(g)` with `(γ1, γ2)` left symbolic.
pub fn fourier(dual: &RationalDual, f: &GroupFunction, sigma: u64, zeta: &[Integer]) -> Result<TrigPolyMatrix, PlancherelError> {
    let stab = dual.stabilizer(sigma)?;
    fourier_with(dual, &stab, f, zeta)
}

fn symbolic_rep(dual: &RationalDual, stab: &StabilizerData, zeta: &[Integer]) -> Result<InducedRepresentation, PlancherelError> {
    let d = dual.spec().dim();
    let zero = vec![Rational::zero(); d];
    let param = DualParameter { gamma1: zero.clone(), gamma2: zero, sigma: stab.sigma, zeta: zeta.to_vec() };
    Ok(dual.representation_with(stab, &param)?)
}

pub fn fourier_with(dual: &RationalDual, stab: &StabilizerData, f: &GroupFunction, zeta: &[Integer]) -> Result<TrigPolyMatrix, PlancherelError> {
    let rep = symbolic_rep(dual, stab, zeta)?;
    let mut out = TrigPolyMatrix::zeros(rep.dim());
    for (g, coeff) in f.support() {
        let c = to_c64(coeff);
        for (a, entry) in rep.symbolic(g)?.into_iter().enumerate() {
            out.push(a, entry.column, TrigTerm { coeff: c, k: entry.k, l: entry.l, c: entry.constant });
        }
    }
    Ok(out)
}

/// Row `a` of `ρ(g)` in integer form: frequencies scaled by per-`σ`
/// denominators so that differences are exact.
#[derive(Debug, Clone, PartialEq, Eq)]
struct RowData {
    column: usize,
    w1: Vec<i128>,
    w2: Vec<i128>,
    c: i128,
    y: Vec<i128>,
}

#[derive(Debug, Clone)]
struct SigmaCell {
    stab: StabilizerData,
    #[cfg(test)]
    rep: InducedRepresentation,
    /// `A^{-1}` times `den1`, integer.
    w1_map: Vec<Vec<i128>>,
    den1: i128,
    /// `E_σ^T B` times `den2`, integer.
    w2_map: Vec<Vec<i128>>,
    den2: i128,
    divisors: Vec<i128>,
    /// Coset representatives of `Z^d / A(σ)Z^d` and the Smith data to find them.
    reps: Vec<Vec<i128>>,
    coset_left: Vec<Vec<i128>>,
    coset_divisors: Vec<i128>,
    /// `U A(σ)^{-1}` times `little_den`.
    little_map: Vec<Vec<i128>>,
    little_den: i128,
    zeta_count: u64,
    weight: Rational,
    e_volume: Rational,
}

fn cell_weight(det_a: &Rational, e_volume: &Rational, formula: WeightFormula) -> Rational {
    match formula {
        WeightFormula::Literal => det_a / e_volume,
        WeightFormula::Inverted => e_volume / det_a,
    }
}

/// A group function with its per-cell row data computed.
#[derive(Debug, Clone)]
pub struct PreparedFunction {
    coeffs: Vec<Complex64>,
    rows: Vec<Vec<Vec<RowData>>>,
}

fn scaled_integer_map(m: &RationalMatrix) -> Result<(Vec<Vec<i128>>, i128), PlancherelError> {
    let den = m.denominator_lcm();
    let scaled = m.scaled_to_integer(&den);
    let den = den.to_i128().ok_or(PlancherelError::Overflow)?;
    let rows = scaled
        .to_rows()
        .into_iter()
        .map(|r| r.into_iter().map(|x| x.to_i128().ok_or(PlancherelError::Overflow)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok((rows, den))
}

/// Inverse of a support element, reduced to what every cell needs.
struct InverseData {
    k: Vec<i128>,
    l_coeff: Vec<Integer>,
    /// `m B c'`
    m_l: Vec<i128>,
    /// `m θ'`
    m_theta: i128,
}

fn to_i128_vec(v: &[Integer]) -> Result<Vec<i128>, PlancherelError> {
    v.iter().map(|x| x.to_i128().ok_or(PlancherelError::Overflow)).collect()
}

fn dot_i128(a: &[i128], b: &[i128]) -> Result<i128, PlancherelError> {
    a.iter().zip(b).try_fold(0i128, |acc, (x, y)| x.checked_mul(*y).and_then(|p| acc.checked_add(p)).ok_or(PlancherelError::Overflow))
}

fn apply(map: &[Vec<i128>], v: &[Integer]) -> Result<Vec<i128>, PlancherelError> {
    let v: Vec<i128> = v.iter().map(|x| x.to_i128().ok_or(PlancherelError::Overflow)).collect::<Result<_, _>>()?;
    map.iter()
        .map(|row| {
            row.iter().zip(&v).try_fold(0i128, |acc, (a, b)| a.checked_mul(*b).and_then(|p| acc.checked_add(p)).ok_or(PlancherelError::Overflow))
        })
        .collect()
}

/// `∫_0^1 e^{-2πi (num/den) s} ds`
fn phi_scaled(num: i128, den: i128) -> Complex64 {
    if num == 0 {
        Complex64::new(1.0, 0.0)
    } else if num % den == 0 {
        Complex64::zero()
    } else {
        let w = -(num as f64) / den as f64;
        let r = (-num).rem_euclid(den) as f64 / den as f64;
        (e(r) - 1.0) / Complex64::new(0.0, std::f64::consts::TAU * w)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PlancherelCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub rhs_imag: f64,
    pub rel_error: f64,
    pub fitted_constant: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PolarizedCheck {
    pub lhs: [f64; 2],
    pub rhs: [f64; 2],
    pub rel_error: f64,
}

/// Closed-form evaluator of `c Σ_σ Σ_ζ w_σ ∫∫ trace(f̂ ĝ*)`, with `c` fitted
/// so that the delta at the identity has norm one.
#[derive(Debug, Clone)]
pub struct PlancherelEngine {
    dual: RationalDual,
    config: PlancherelConfig,
    cells: Vec<SigmaCell>,
    /// `m B`, integral by the choice of `m`.
    m_b: Vec<Vec<i128>>,
    constant: f64,
}

impl PlancherelEngine {
    pub fn new(spec: &GroupSpec, config: PlancherelConfig) -> Result<Self, PlancherelError> {
        if spec.kind() == GroupKind::IrrationalD1 {
            return Err(GroupError::IrrationalUnsupported.into());
        }
        let dual = RationalDual::new(spec)?;
        let det_a = rat_from_int(dual.abs_det_a());
        let a_inv = dual.lambda1().basis().transpose();
        let (w1_map, den1) = scaled_integer_map(&a_inv)?;
        let b = spec.b()?;
        let cells = dual
            .stabilizers()?
            .into_iter()
            .map(|stab| {
                #[cfg(test)]
                let rep = symbolic_rep(&dual, &stab, &vec![Integer::zero(); stab.little_group.divisors().len()])?;
                let (w2_map, den2) = scaled_integer_map(&(&stab.e_sigma.basis().transpose() * b))?;
                let e_volume = stab.e_sigma.volume();
                let weight = cell_weight(&det_a, &e_volume, config.weight_formula);
                let zeta_count = stab.little_group.order().to_u64().expect("small little group");
                let divisors = stab.little_group.divisors().iter().map(|q| q.to_i128().unwrap()).collect();
                let reps = stab.cosets.coset_reps().iter().map(|r| to_i128_vec(r)).collect::<Result<_, _>>()?;
                let coset_left = stab.cosets.smith_left().to_rows().iter().map(|r| to_i128_vec(r)).collect::<Result<_, _>>()?;
                let coset_divisors = to_i128_vec(stab.cosets.elementary_divisors())?;
                let (a_inv, left) = stab.little_group.coordinate_map();
                let (little_map, little_den) = scaled_integer_map(&(&left.to_rational() * a_inv))?;
                Ok(SigmaCell {
                    #[cfg(test)]
                    rep,
                    w1_map: w1_map.clone(),
                    den1,
                    w2_map,
                    den2,
                    divisors,
                    reps,
                    coset_left,
                    coset_divisors,
                    little_map,
                    little_den,
                    zeta_count,
                    weight,
                    e_volume,
                    stab,
                })
            })
            .collect::<Result<Vec<_>, PlancherelError>>()?;
        let m_b = scaled_integer_map(&b.scale(&rat(dual.m() as i64, 1)))?.0;
        let mut engine = PlancherelEngine { dual, config, cells, m_b, constant: 1.0 };
        engine.fit_constant()?;
        Ok(engine)
    }

    fn fit_constant(&mut self) -> Result<(), PlancherelError> {
        let id = GroupFunction::delta(GroupElement::identity(self.dual.spec().dim()));
        let raw = self.raw_pairing(&id, &id)?;
        self.constant = 1.0 / raw.re;
        Ok(())
    }

    /// The same cells under another weighting convention, refitted.
    pub fn with_config(&self, config: PlancherelConfig) -> Result<Self, PlancherelError> {
        let det_a = rat_from_int(self.dual.abs_det_a());
        let mut out = self.clone();
        out.config = config;
        for cell in &mut out.cells {
            cell.weight = cell_weight(&det_a, &cell.e_volume, config.weight_formula);
        }
        out.fit_constant()?;
        Ok(out)
    }

    /// Row data of every support element in every cell. It does not depend
    /// on the weighting convention, so one preparation serves all of them.
    pub fn prepare(&self, f: &GroupFunction) -> Result<PreparedFunction, PlancherelError> {
        let coeffs = f.support().map(|(_, c)| to_c64(c)).collect();
        let elements = f.support().map(|(x, _)| self.inverse_data(x)).collect::<Result<Vec<_>, _>>()?;
        let rows = self
            .cells
            .par_iter()
            .map(|cell| elements.iter().map(|x| self.rows_fast(cell, x)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PreparedFunction { coeffs, rows })
    }

    pub fn dual(&self) -> &RationalDual {
        &self.dual
    }

    pub fn config(&self) -> PlancherelConfig {
        self.config
    }

    /// Constant fitted on the delta at the identity.
    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn atoms(&self) -> Vec<PlancherelAtomFamily> {
        let det_a = rat_from_int(self.dual.abs_det_a());
        self.cells
            .iter()
            .map(|c| PlancherelAtomFamily {
                sigma: c.stab.sigma,
                e_sigma: c.stab.e_sigma.clone(),
                lambda1: self.dual.lambda1().clone(),
                zeta_count: c.zeta_count,
                dim: c.stab.orbit_size,
                density_weight: &det_a / &c.e_volume,
            })
            .collect()
    }

    fn inverse_data(&self, g: &GroupElement) -> Result<InverseData, PlancherelError> {
        let spec = self.dual.spec();
        if !spec.contains(g) {
            return Err(GroupError::MixedSpec.into());
        }
        let gi = spec.inverse(g)?;
        let l_coeff = to_i128_vec(&gi.l_coeff)?;
        let m_l = self.m_b.iter().map(|row| dot_i128(row, &l_coeff)).collect::<Result<Vec<_>, _>>()?;
        let m_theta = (&gi.phase * rat(self.dual.m() as i64, 1)).to_integer().to_i128().ok_or(PlancherelError::Overflow)?;
        Ok(InverseData { k: to_i128_vec(&gi.k)?, l_coeff: gi.l_coeff, m_l, m_theta })
    }

    /// Same rows as the symbolic representation, in machine integers. With
    /// `g^{-1} = (k', c', θ')` and coset representative `k_a`,
    /// `g^{-1} T_{k_a} = T_{k_b} P` where `k_b ≡ k' + k_a` modulo `A(σ)`,
    /// `P = (k' + k_a − k_b, c', θ' + ⟨Bc', k_a⟩)`.
    fn rows_fast(&self, cell: &SigmaCell, g: &InverseData) -> Result<Vec<RowData>, PlancherelError> {
        let m = self.dual.m() as i128;
        let sigma = cell.stab.sigma as i128;
        let w2 = apply(&cell.w2_map, &g.l_coeff)?;
        cell.reps
            .iter()
            .map(|ka| {
                let kh: Vec<i128> = g.k.iter().zip(ka).map(|(x, y)| x + y).collect();
                let m_theta = (g.m_theta + dot_i128(&g.m_l, ka)?).rem_euclid(m);
                let mut column = 0usize;
                for (row, q) in cell.coset_left.iter().zip(&cell.coset_divisors) {
                    column = column * *q as usize + dot_i128(row, &kh)?.rem_euclid(*q) as usize;
                }
                let kp: Vec<i128> = kh.iter().zip(&cell.reps[column]).map(|(x, y)| x - y).collect();
                let w1 = cell.w1_map.iter().map(|row| dot_i128(row, &kp)).collect::<Result<Vec<_>, _>>()?;
                let y = cell
                    .little_map
                    .iter()
                    .zip(&cell.divisors)
                    .map(|(row, q)| Ok((dot_i128(row, &kp)? / cell.little_den).rem_euclid(*q)))
                    .collect::<Result<Vec<_>, PlancherelError>>()?;
                let c = (-sigma * m_theta).rem_euclid(m);
                Ok(RowData { column, w1, w2: w2.clone(), c, y })
            })
            .collect()
    }

    #[cfg(test)]
    fn rows(&self, cell: &SigmaCell, g: &GroupElement) -> Result<Vec<RowData>, PlancherelError> {
        let m = self.dual.m() as i128;
        cell.rep
            .symbolic(g)?
            .into_iter()
            .map(|entry| {
                let w1 = apply(&cell.w1_map, &entry.k)?;
                // l = B c, so E^T l = (E^T B) c with c the modulation coefficient.
                let w2 = apply(&cell.w2_map, &g_inverse_coeff(g))?;
                let c = (&entry.constant * rat_from_int(int(m as i64))).to_integer().to_i128().ok_or(PlancherelError::Overflow)?;
                let y = cell
                    .stab
                    .little_group
                    .coordinates(&entry.k)?
                    .iter()
                    .map(|v| v.to_i128().unwrap())
                    .collect();
                Ok(RowData { column: entry.column, w1, w2, c, y })
            })
            .collect()
    }

    fn cell_pairing(&self, idx: usize, f: &PreparedFunction, g: &PreparedFunction) -> Complex64 {
        let cell = &self.cells[idx];
        let m = self.dual.m() as i128;
        let fr: Vec<_> = f.coeffs.iter().zip(&f.rows[idx]).collect();
        let gr: Vec<_> = g.coeffs.iter().zip(&g.rows[idx]).collect();
        let n = cell.stab.orbit_size as usize;
        let zeta_count = cell.zeta_count as f64;
        // Summing e(ζ(y - y')) over all ζ gives the group order when
        // y ≡ y' and zero otherwise.
        let zeta_factor = match self.config.zeta_weighting {
            ZetaWeighting::Counting => zeta_count,
            ZetaWeighting::LittleGroupIndex => zeta_count * zeta_count,
        };
        let mut acc = Complex64::zero();
        for a in 0..n {
            for (cf, rf) in &fr {
                let x = &rf[a];
                for (cg, rg) in &gr {
                    let y = &rg[a];
                    if x.column != y.column {
                        continue;
                    }
                    if x.y.iter().zip(&y.y).zip(&cell.divisors).any(|((p, q), s)| (p - q).rem_euclid(*s) != 0) {
                        continue;
                    }
                    let mut v = *cf * cg.conj() * e((x.c - y.c).rem_euclid(m) as f64 / m as f64);
                    for (p, q) in x.w1.iter().zip(&y.w1) {
                        v *= phi_scaled(p - q, cell.den1);
                    }
                    for (p, q) in x.w2.iter().zip(&y.w2) {
                        v *= phi_scaled(p - q, cell.den2);
                    }
                    acc += v;
                }
            }
        }
        let vol = to_f64(&(self.dual.lambda1().volume() * &cell.e_volume));
        acc * vol * to_f64(&cell.weight) * zeta_factor
    }

    /// `Σ_σ Σ_ζ w_σ ∫∫ trace(f̂ ĝ*)` before applying the fitted constant.
    pub fn raw_pairing(&self, f: &GroupFunction, g: &GroupFunction) -> Result<Complex64, PlancherelError> {
        let pf = self.prepare(f)?;
        if f == g {
            return Ok(self.raw_pairing_prepared(&pf, &pf));
        }
        Ok(self.raw_pairing_prepared(&pf, &self.prepare(g)?))
    }

    pub fn raw_pairing_prepared(&self, f: &PreparedFunction, g: &PreparedFunction) -> Complex64 {
        let parts: Vec<Complex64> = (0..self.cells.len()).into_par_iter().map(|i| self.cell_pairing(i, f, g)).collect();
        parts.into_iter().fold(Complex64::zero(), |a, b| a + b)
    }

    pub fn pairing(&self, f: &GroupFunction, g: &GroupFunction) -> Result<Complex64, PlancherelError> {
        Ok(self.raw_pairing(f, g)? * self.constant)
    }

    pub fn verify(&self, f: &GroupFunction) -> Result<PlancherelCheck, PlancherelError> {
        if f.is_empty() {
            return Err(PlancherelError::EmptySupport);
        }
        let pf = self.prepare(f)?;
        self.verify_prepared(f, &pf)
    }

    /// [`Self::verify`] with the rows of `f` already computed.
    pub fn verify_prepared(&self, f: &GroupFunction, pf: &PreparedFunction) -> Result<PlancherelCheck, PlancherelError> {
        if f.is_empty() {
            return Err(PlancherelError::EmptySupport);
        }
        let lhs = to_f64(&f.norm_sqr());
        let rhs = self.raw_pairing_prepared(pf, pf) * self.constant;
        Ok(PlancherelCheck { lhs, rhs: rhs.re, rhs_imag: rhs.im, rel_error: (rhs - lhs).norm() / lhs, fitted_constant: self.constant })
    }

    /// Relative error normalized by `‖f‖ ‖g‖`, since `⟨f, g⟩` may vanish.
    pub fn verify_polarized(&self, f: &GroupFunction, g: &GroupFunction) -> Result<PolarizedCheck, PlancherelError> {
        if f.is_empty() || g.is_empty() {
            return Err(PlancherelError::EmptySupport);
        }
        let lhs = to_c64(&f.inner(g));
        let rhs = self.pairing(f, g)?;
        let scale = (to_f64(&f.norm_sqr()) * to_f64(&g.norm_sqr())).sqrt();
        Ok(PolarizedCheck { lhs: [lhs.re, lhs.im], rhs: [rhs.re, rhs.im], rel_error: (rhs - lhs).norm() / scale })
    }

    /// Same quantity as [`Self::raw_pairing`] for `g = f`, computed through
    /// explicit trigonometric-polynomial products and an explicit loop over
    /// `ζ`. Slow; used to cross-check the pairwise evaluator.
    pub fn raw_norm_via_products(&self, f: &GroupFunction) -> Result<Complex64, PlancherelError> {
        let mut acc = Complex64::zero();
        for cell in &self.cells {
            let per_zeta = match self.config.zeta_weighting {
                ZetaWeighting::Counting => 1.0,
                ZetaWeighting::LittleGroupIndex => cell.zeta_count as f64,
            };
            for zeta in cell.stab.little_group.characters() {
                let fh = fourier_with(&self.dual, &cell.stab, f, &zeta)?;
                let t = fh.product(&fh.adjoint()).integrate_trace(self.dual.lambda1(), &cell.stab.e_sigma);
                acc += t * to_f64(&cell.weight) * per_zeta;
            }
        }
        Ok(acc)
    }
}

/// Modulation coefficient of `g^{-1}`, which is what the rows of `ρ(g)`
/// carry.
#[cfg(test)]
fn g_inverse_coeff(g: &GroupElement) -> Vec<Integer> {
    g.l_coeff.iter().map(|x| -x).collect()
}

/// One-shot check with the default configuration.
pub fn verify_plancherel(spec: &GroupSpec, f: &GroupFunction) -> Result<PlancherelCheck, PlancherelError> {
    PlancherelEngine::new(spec, PlancherelConfig::default())?.verify(f)
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AtomReport {
    pub sigma: u64,
    pub dim: u64,
    pub zeta_count: u64,
    pub weight: String,
    #[serde(rename = "ESigmaVolume")]
    pub e_sigma_volume: String,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PlancherelSummary {
    pub c: f64,
    pub max_rel_error: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct WeightingTrial {
    pub zeta_weighting: ZetaWeighting,
    pub weight_formula: WeightFormula,
    pub c: f64,
    pub max_rel_error: f64,
    pub passes: bool,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PlancherelReport {
    pub kind: GroupKind,
    pub m: u64,
    pub det_a: String,
    pub atoms: Vec<AtomReport>,
    pub plancherel_check: PlancherelSummary,
    pub polarized_check: PlancherelSummary,
    pub weighting_study: Vec<WeightingTrial>,
}

pub fn atom_reports(atoms: &[PlancherelAtomFamily]) -> Vec<AtomReport> {
    atoms
        .iter()
        .map(|a| AtomReport {
            sigma: a.sigma,
            dim: a.dim,
            zeta_count: a.zeta_count,
            weight: format_rational(&a.density_weight),
            e_sigma_volume: format_rational(&a.e_sigma.volume()),
        })
        .collect()
}

fn max_error(engine: &PlancherelEngine, fs: &[(GroupFunction, PreparedFunction)]) -> Result<f64, PlancherelError> {
    fs.iter().map(|(f, pf)| engine.verify_prepared(f, pf).map(|c| c.rel_error)).try_fold(0.0f64, |m, r| r.map(|x| m.max(x)))
}

fn random_prepared<R: Rng + ?Sized>(
    engine: &PlancherelEngine,
    spec: &GroupSpec,
    rng: &mut R,
    trials: usize,
    support: usize,
) -> Result<Vec<(GroupFunction, PreparedFunction)>, PlancherelError> {
    (0..trials)
        .map(|_| {
            let f = GroupFunction::random(spec, rng, support, 6)?;
            let pf = engine.prepare(&f)?;
            Ok((f, pf))
        })
        .collect()
}

/// Atom table, Plancherel identity on random functions, polarized identity
/// on random pairs, and the comparison of weighting conventions.
pub fn plancherel_report<R: Rng + ?Sized>(
    spec: &GroupSpec,
    rng: &mut R,
    trials: usize,
    support: usize,
    tolerance: f64,
) -> Result<PlancherelReport, PlancherelError> {
    let engine = PlancherelEngine::new(spec, PlancherelConfig::default())?;
    let fs = random_prepared(&engine, spec, rng, trials, support)?;
    let max_rel = max_error(&engine, &fs)?;
    let pairs = trials.div_ceil(2);
    let mut max_pol = 0.0f64;
    for _ in 0..pairs {
        let f = GroupFunction::random(spec, rng, support, 6)?;
        let g = GroupFunction::random(spec, rng, support, 6)?;
        max_pol = max_pol.max(engine.verify_polarized(&f, &g)?.rel_error);
    }
    let mut study = Vec::new();
    for zeta_weighting in [ZetaWeighting::Counting, ZetaWeighting::LittleGroupIndex] {
        for weight_formula in [WeightFormula::Literal, WeightFormula::Inverted] {
            let config = PlancherelConfig { zeta_weighting, weight_formula };
            let alt = engine.with_config(config)?;
            let err = max_error(&alt, &fs)?;
            study.push(WeightingTrial { zeta_weighting, weight_formula, c: alt.constant(), max_rel_error: err, passes: err < tolerance });
        }
    }
    Ok(PlancherelReport {
        kind: spec.kind(),
        m: engine.dual().m(),
        det_a: engine.dual().abs_det_a().to_string(),
        atoms: atom_reports(&engine.atoms()),
        plancherel_check: PlancherelSummary { c: engine.constant(), max_rel_error: max_rel, trials },
        polarized_check: PlancherelSummary { c: engine.constant(), max_rel_error: max_pol, trials: pairs },
        weighting_study: study,
    })
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IntegerSpectrumReport {
    /// Columns spanning the translation part of `Λ`, `[0,1)^d`.
    pub lambda1_basis: Vec<Vec<String>>,
    /// Columns spanning `B^{-T}[0,1)^d`.
    pub lambda2_basis: Vec<Vec<String>>,
    pub density: String,
    pub dual: String,
    pub plancherel_check: PlancherelSummary,
}

fn matrix_strings(m: &RationalMatrix) -> Vec<Vec<String>> {
    m.to_rows().iter().map(|r| r.iter().map(format_rational).collect()).collect()
}

/// In the abelian case every irreducible representation is a character
/// and the measure is Lebesgue measure on `[0,1)^d × B^{-T}[0,1)^d` with
/// density `|det B|`.
pub fn integer_spectrum<R: Rng + ?Sized>(spec: &GroupSpec, rng: &mut R, trials: usize, support: usize) -> Result<IntegerSpectrumReport, PlancherelError> {
    spec.require_kind(GroupKind::Integer)?;
    let engine = PlancherelEngine::new(spec, PlancherelConfig::default())?;
    let fs = random_prepared(&engine, spec, rng, trials, support)?;
    let max_rel = max_error(&engine, &fs)?;
    let atoms = engine.atoms();
    debug_assert_eq!(atoms.len(), 1);
    Ok(IntegerSpectrumReport {
        lambda1_basis: matrix_strings(engine.dual().lambda1().basis()),
        lambda2_basis: matrix_strings(engine.dual().lambda2().basis()),
        density: format_rational(&spec.abs_det_b()?),
        dual: "(R^d/Z^d) x (R^d/B^{-T}Z^d)".into(),
        plancherel_check: PlancherelSummary { c: engine.constant(), max_rel_error: max_rel, trials },
    })
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LeftRegularReport {
    pub kind: GroupKind,
    pub decomposition: String,
    /// `(σ, n(λ))` for each fiber; the multiplicity equals the dimension.
    pub multiplicities: Vec<(u64, u64)>,
    pub gabor_multiplicity: Option<String>,
    pub gabor_admissible: Option<bool>,
    pub quasi_equivalent_to_left_regular: Option<bool>,
}

pub fn left_regular_report(spec: &GroupSpec) -> Result<LeftRegularReport, PlancherelError> {
    let atoms = measure_atoms(spec)?;
    let multiplicities = atoms.iter().map(|a| (a.sigma, a.dim)).collect();
    let (gm, adm, qe) = if spec.kind() == GroupKind::Integer {
        let det = spec.abs_det_b()?;
        (Some(format_rational(&det)), Some(det == rat(1, 1)), Some(true))
    } else {
        (None, None, None)
    };
    Ok(LeftRegularReport {
        kind: spec.kind(),
        decomposition: "L = integral of rho_lambda (x) 1_{C^{n(lambda)}} dmu(lambda), n(lambda) = dim rho_lambda".into(),
        multiplicities,
        gabor_multiplicity: gm,
        gabor_admissible: adm,
        quasi_equivalent_to_left_regular: qe,
    })
}

/// `Λ2 = B^{-T}[0,1)^d` as a matrix.
pub fn lambda2_basis(spec: &GroupSpec) -> Result<RationalMatrix, PlancherelError> {
    Ok(spec.b_inv_tr()?.clone())
}
