//! The integer Heisenberg group and the irrational one-dimensional case.
//!
//! `P_{l,m,k}` is the upper unitriangular matrix with first row `(1, m, l)`
//! and second row `(0, 1, k)`. For `B = α` irrational the time-frequency
//! group is isomorphic to this lattice via `Θ^α`, which sends `P_{0,m,0}` to
//! `T_m` and `P_{0,0,k}` to `M_{kα}`. Since `T_m M_β = e^{-2πiβm} M_β T_m`,
//! the centre must then act by `e^{-2πiαl}`.

use num_complex::{Complex, Complex64};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::gabor::{GaborError, SampledSignal};
use crate::group::{GroupKind, GroupSpec};
use crate::scalar::{int, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HeisenbergError {
    #[error("shift moves mass {mass:e} outside the window")]
    WindowSpill { mass: f64 },
    #[error("group is not marked irrational")]
    NotIrrational,
    #[error("t = {t} is outside [0, |lambda|) for lambda = {lambda}")]
    ParameterRange { lambda: f64, t: f64 },
    #[error(transparent)]
    Gabor(#[from] GaborError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct HeisenbergElement {
    pub l: i64,
    pub m: i64,
    pub k: i64,
}

impl HeisenbergElement {
    pub const IDENTITY: HeisenbergElement = HeisenbergElement { l: 0, m: 0, k: 0 };

    pub fn new(l: i64, m: i64, k: i64) -> Self {
        HeisenbergElement { l, m, k }
    }

    /// `P_{l,m,k} P_{l',m',k'} = P_{l+l'+mk', m+m', k+k'}`
    pub fn mul(self, o: HeisenbergElement) -> HeisenbergElement {
        HeisenbergElement { l: self.l + o.l + self.m * o.k, m: self.m + o.m, k: self.k + o.k }
    }

    pub fn inverse(self) -> HeisenbergElement {
        HeisenbergElement { l: -self.l + self.m * self.k, m: -self.m, k: -self.k }
    }

    pub fn is_central(self) -> bool {
        self.m == 0 && self.k == 0
    }

    pub fn to_matrix(self) -> [[i64; 3]; 3] {
        [[1, self.m, self.l], [0, 1, self.k], [0, 0, 1]]
    }

    pub fn from_matrix(p: &[[i64; 3]; 3]) -> Option<Self> {
        let unitriangular = p[0][0] == 1 && p[1][1] == 1 && p[2][2] == 1 && p[1][0] == 0 && p[2][0] == 0 && p[2][1] == 0;
        unitriangular.then_some(HeisenbergElement { l: p[0][2], m: p[0][1], k: p[1][2] })
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, bound: i64) -> Self {
        HeisenbergElement {
            l: rng.random_range(-bound..=bound),
            m: rng.random_range(-bound..=bound),
            k: rng.random_range(-bound..=bound),
        }
    }
}

pub fn matmul3(a: &[[i64; 3]; 3], b: &[[i64; 3]; 3]) -> [[i64; 3]; 3] {
    let mut out = [[0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|r| a[i][r] * b[r][j]).sum();
        }
    }
    out
}

fn cis<F: Real>(turns: F) -> Complex<F> {
    let t = turns - turns.floor();
    let a = F::TAU() * t;
    Complex::new(a.cos(), a.sin())
}

/// `Θ^α(P_{l,m,k}) f(x) = e^{-2πiαl} e^{2πikαx} f(x - m)`
pub fn theta_alpha<F: Real>(alpha: F, p: HeisenbergElement, f: &SampledSignal<F>) -> SampledSignal<F> {
    let shifted = f.translate(&[int(p.m)]);
    let modulated = if p.k == 0 { shifted } else { shifted.modulate_real(F::lit(p.k as f64) * alpha) };
    if p.l == 0 {
        modulated
    } else {
        modulated.scale(cis(-alpha * F::lit(p.l as f64)))
    }
}

/// Schrödinger representation restricted to the lattice:
/// `π_λ(P_{l,m,k}) f(t) = e^{2πilλ} e^{-2πikλt} f(t - m)`.
///
/// This is `Θ^{-λ}`; with `e^{+2πikλt}` the map is not multiplicative.
pub fn pi_lambda<F: Real>(lambda: F, p: HeisenbergElement, f: &SampledSignal<F>) -> SampledSignal<F> {
    theta_alpha(-lambda, p, f)
}

/// The formula with `e^{+2πikλt}`, kept to exhibit that it fails to be a
/// homomorphism.
pub fn pi_lambda_unsigned<F: Real>(lambda: F, p: HeisenbergElement, f: &SampledSignal<F>) -> SampledSignal<F> {
    let shifted = f.translate(&[int(p.m)]);
    let modulated = if p.k == 0 { shifted } else { shifted.modulate_real(F::lit(p.k as f64) * lambda) };
    modulated.scale(cis(lambda * F::lit(p.l as f64)))
}

/// Finite window `u(a)`, `a ∈ [-W, W]`, of a sequence in `ℓ²(Z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSequence {
    pub window: i64,
    pub values: Vec<Complex64>,
}

impl TruncatedSequence {
    pub fn zeros(window: i64) -> Self {
        TruncatedSequence { window, values: vec![Complex64::new(0.0, 0.0); (2 * window + 1) as usize] }
    }

    pub fn from_fn(window: i64, f: impl FnMut(i64) -> Complex64) -> Self {
        TruncatedSequence { window, values: (-window..=window).map(f).collect() }
    }

    pub fn get(&self, a: i64) -> Complex64 {
        if a.abs() <= self.window {
            self.values[(a + self.window) as usize]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, window: i64, support: i64) -> Self {
        TruncatedSequence::from_fn(window, |a| {
            if a.abs() <= support {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }
}

/// `Ind_K^Γ χ_{(|λ|, t)}` on `ℓ²(Γ/K) ≅ ℓ²(Z)` with cosets represented by
/// `P_{0,a,0}` and `K = { P_{l,0,k} }`:
/// `(ρ(P_{l,m,k}) u)(a) = e^{2πi(|λ|l − |λ|ak + tk)} u(a − m)`.
pub fn induced_shift(lambda: f64, t: f64, p: HeisenbergElement, u: &TruncatedSequence) -> Result<TruncatedSequence, HeisenbergError> {
    let lam = lambda.abs();
    if !(0.0..lam).contains(&t) {
        return Err(HeisenbergError::ParameterRange { lambda, t });
    }
    let w = u.window;
    let spill: f64 = (-w..=w).filter(|a| (a + p.m).abs() > w).map(|a| u.get(a).norm_sqr()).sum();
    if spill > 0.0 {
        return Err(HeisenbergError::WindowSpill { mass: spill });
    }
    Ok(TruncatedSequence::from_fn(w, |a| {
        let phase = lam * p.l as f64 - lam * (a as f64) * p.k as f64 + t * p.k as f64;
        cis(phase) * u.get(a - p.m)
    }))
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub max_error: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CentralSummary {
    pub spectrum: String,
    pub multiplicity: u32,
    pub weight: String,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IrrationalReport {
    pub alpha: f64,
    pub decomposition: String,
    pub measure: String,
    pub central: CentralSummary,
    pub von_neumann_type: String,
    pub checks: Vec<CheckResult>,
}

impl IrrationalReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Sizes for the numerical evidence in [`irrational_report`].
#[derive(Debug, Clone, Copy)]
pub struct IrrationalCheckConfig {
    pub trials: usize,
    pub samples_per_unit: usize,
    pub extent: usize,
    pub window: i64,
    pub tolerance: f64,
}

impl Default for IrrationalCheckConfig {
    fn default() -> Self {
        IrrationalCheckConfig { trials: 50, samples_per_unit: 16, extent: 16, window: 40, tolerance: 1e-12 }
    }
}

fn check(name: &str, errors: impl IntoIterator<Item = f64>, tolerance: f64) -> CheckResult {
    let mut worst = 0.0f64;
    let mut n = 0;
    for e in errors {
        worst = worst.max(e);
        n += 1;
    }
    CheckResult { name: name.into(), passed: worst <= tolerance, max_error: worst, samples: n }
}

/// Decomposition statements for the irrational case together with
/// numerical evidence: group law, homomorphism and unitarity of the
/// lattice representations, and agreement of central characters.
pub fn irrational_report<R: Rng + ?Sized>(spec: &GroupSpec, rng: &mut R, cfg: IrrationalCheckConfig) -> Result<IrrationalReport, HeisenbergError> {
    if spec.kind() != GroupKind::IrrationalD1 {
        return Err(HeisenbergError::NotIrrational);
    }
    let alpha = spec.alpha().expect("irrational spec carries alpha");
    let mut checks = Vec::new();

    let law = (0..cfg.trials * 10).map(|_| {
        let p = HeisenbergElement::random(rng, 1000);
        let q = HeisenbergElement::random(rng, 1000);
        let ok = HeisenbergElement::from_matrix(&matmul3(&p.to_matrix(), &q.to_matrix())) == Some(p.mul(q));
        if ok {
            0.0
        } else {
            1.0
        }
    });
    checks.push(check("group law equals matrix product", law.collect::<Vec<_>>(), 0.0));

    let f = SampledSignal::<f64>::gaussian(1, cfg.samples_per_unit, cfg.extent, 1.0, &[0.0])?;
    let small = |rng: &mut R| HeisenbergElement::random(rng, 3);
    let mut theta_err = Vec::new();
    let mut pi_err = Vec::new();
    let mut unitary = Vec::new();
    for _ in 0..cfg.trials {
        let (p, q) = (small(rng), small(rng));
        let lhs = theta_alpha(alpha, p, &theta_alpha(alpha, q, &f));
        theta_err.push(lhs.max_abs_diff(&theta_alpha(alpha, p.mul(q), &f))?);
        let lambda: f64 = rng.random_range(-1.0..1.0);
        let lhs = pi_lambda(lambda, p, &pi_lambda(lambda, q, &f));
        pi_err.push(lhs.max_abs_diff(&pi_lambda(lambda, p.mul(q), &f))?);
        unitary.push((pi_lambda(lambda, p, &f).norm_sqr() - f.norm_sqr()).abs() / f.norm_sqr());
    }
    checks.push(check("theta homomorphism", theta_err, cfg.tolerance));
    checks.push(check("pi_lambda homomorphism", pi_err, cfg.tolerance));
    checks.push(check("pi_lambda unitary", unitary, cfg.tolerance));

    let mut ind_hom = Vec::new();
    let mut ind_unit = Vec::new();
    for _ in 0..cfg.trials {
        let lambda: f64 = rng.random_range(-1.0..1.0);
        if lambda == 0.0 {
            continue;
        }
        let t = rng.random_range(0.0..lambda.abs());
        let (p, q) = (small(rng), small(rng));
        let u = TruncatedSequence::random(rng, cfg.window, cfg.window / 4);
        let pq = induced_shift(lambda, t, p, &induced_shift(lambda, t, q, &u)?)?;
        ind_hom.push(pq.max_abs_diff(&induced_shift(lambda, t, p.mul(q), &u)?));
        ind_unit.push((induced_shift(lambda, t, p, &u)?.norm_sqr() - u.norm_sqr()).abs() / u.norm_sqr());
    }
    checks.push(check("induced homomorphism", ind_hom, cfg.tolerance));
    checks.push(check("induced unitary", ind_unit, cfg.tolerance));

    // Both constructions send P_{l,0,0} to the scalar e^{2πiλl} for λ > 0.
    let ones = SampledSignal::<f64>::indicator(1, cfg.samples_per_unit, cfg.extent)?;
    let mut central = Vec::new();
    for _ in 0..cfg.trials {
        let lambda: f64 = rng.random_range(f64::MIN_POSITIVE..=1.0);
        let l = rng.random_range(-20..=20);
        let z = HeisenbergElement::new(l, 0, 0);
        let u = TruncatedSequence::from_fn(2, |_| Complex64::new(1.0, 0.0));
        let induced = induced_shift(lambda, 0.0, z, &u)?.values[0];
        let pi = pi_lambda(lambda, z, &ones);
        let idx = ones.values().iter().position(|v| v.re == 1.0).expect("indicator support");
        central.push((pi.values()[idx] - induced).norm());
    }
    checks.push(check("central characters agree", central, 0.0));

    Ok(IrrationalReport {
        alpha,
        decomposition: "Ind_K^Gamma".into(),
        measure: "|lambda| dt dlambda".into(),
        central: CentralSummary { spectrum: "(0,1]".into(), multiplicity: 2, weight: "|lambda| dlambda".into() },
        von_neumann_type: "II".into(),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn law_matches_matrices() {
        let p = HeisenbergElement::new(3, -2, 5);
        let q = HeisenbergElement::new(-1, 4, 7);
        assert_eq!(HeisenbergElement::from_matrix(&matmul3(&p.to_matrix(), &q.to_matrix())), Some(p.mul(q)));
        assert_eq!(p.mul(p.inverse()), HeisenbergElement::IDENTITY);
    }

    #[test]
    fn theta_generators() {
        let f = SampledSignal::<f64>::gaussian(1, 8, 8, 1.0, &[0.0]).unwrap();
        assert_eq!(theta_alpha(2f64.sqrt(), HeisenbergElement::IDENTITY, &f), f);
        assert_eq!(theta_alpha(2f64.sqrt(), HeisenbergElement::new(0, 1, 0), &f), f.translate(&[int(1)]));
    }

    #[test]
    fn unsigned_formula_is_not_multiplicative() {
        let f = SampledSignal::<f64>::gaussian(1, 8, 8, 1.0, &[0.0]).unwrap();
        let (p, q) = (HeisenbergElement::new(0, 1, 0), HeisenbergElement::new(0, 0, 1));
        let lam = 0.3;
        let lhs = pi_lambda_unsigned(lam, p, &pi_lambda_unsigned(lam, q, &f));
        let rhs = pi_lambda_unsigned(lam, p.mul(q), &f);
        assert!(lhs.max_abs_diff(&rhs).unwrap() > 0.1);
        let lhs = pi_lambda(lam, p, &pi_lambda(lam, q, &f));
        assert!(lhs.max_abs_diff(&pi_lambda(lam, p.mul(q), &f)).unwrap() < 1e-12);
    }

    #[test]
    fn induced_generators_on_small_window() {
        let (lam, t) = (0.3, 0.1);
        let u = TruncatedSequence::from_fn(2, |a| Complex64::new(if a.abs() <= 1 { 1.0 + a as f64 } else { 0.0 }, 0.0));
        let v = induced_shift(lam, t, HeisenbergElement::new(0, 1, 0), &u).unwrap();
        for a in -2..=2 {
            assert_eq!(v.get(a), u.get(a - 1));
        }
        let v = induced_shift(lam, t, HeisenbergElement::new(0, 0, 1), &u).unwrap();
        for a in -2..=2 {
            assert!((v.get(a) - cis(t - lam * a as f64) * u.get(a)).norm() < 1e-15);
        }
        let v = induced_shift(lam, t, HeisenbergElement::new(2, 0, 0), &u).unwrap();
        assert!(v.max_abs_diff(&TruncatedSequence::from_fn(2, |a| cis(2.0 * lam) * u.get(a))) < 1e-15);
        assert!(matches!(induced_shift(lam, t, HeisenbergElement::new(0, 2, 0), &u), Err(HeisenbergError::WindowSpill { .. })));
        assert!(matches!(induced_shift(lam, 0.5, HeisenbergElement::IDENTITY, &u), Err(HeisenbergError::ParameterRange { .. })));
    }
}
