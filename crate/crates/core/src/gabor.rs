//! Gabor analysis on uniformly sampled functions.
//!
//! A [`SampledSignal`] stores `f` on the grid `-M + j/n` (`j = 0 .. 2Mn`)
//! along each axis of `[-M, M)^d`, `d ∈ {1, 2}`. Inner products and norms are
//! Riemann sums with cell volume `n^{-d}`. Integer translations are exact
//! index shifts and modulation phases are reduced modulo one in integer
//! arithmetic before conversion, so both sides of the Zak relations see the
//! same rounding.

use num_complex::Complex;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{GroupError, GroupKind, GroupSpec};
use crate::matrix::RationalMatrix;
use crate::scalar::{format_rational, rat, to_f64, Integer, Rational, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaborError {
    #[error("sampled operations support d = 1 or 2, got {0}")]
    UnsupportedDimension(usize),
    #[error("signal tail mass {mass:e} exceeds tolerance {tolerance:e}")]
    TailTooLarge { mass: f64, tolerance: f64 },
    #[error("operation requires integer B")]
    WrongKind,
    #[error("matrix is singular")]
    Singular,
    #[error("translation {0} is not a multiple of the grid spacing")]
    NotGridAligned(String),
    #[error("signals live on different grids")]
    GridMismatch,
    #[error("grid with {samples_per_unit} samples per unit aliases frequency {frequency}; need more than {needed}")]
    GridTooCoarse { samples_per_unit: usize, frequency: f64, needed: usize },
    #[error("bad signal data: {0}")]
    BadSignal(String),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Function sampled on a uniform grid over `[-M, M)^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal<F: Real> {
    d: usize,
    samples_per_unit: usize,
    extent: usize,
    values: Vec<Complex<F>>,
}

/// JSON form: interleaved real and imaginary parts in row-major order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignalData {
    pub d: usize,
    pub grid: usize,
    pub extent: usize,
    pub values: Vec<f64>,
}

fn e<F: Real>(num: i128, den: i128) -> Complex<F> {
    let r = num.rem_euclid(den);
    let angle = F::TAU() * F::lit(r as f64) / F::lit(den as f64);
    Complex::new(angle.cos(), angle.sin())
}

fn as_fraction(x: &Rational) -> (i128, i128) {
    (x.numer().to_i128().expect("modest rational"), x.denom().to_i128().expect("modest rational"))
}

impl<F: Real> SampledSignal<F> {
    pub fn zeros(d: usize, samples_per_unit: usize, extent: usize) -> Result<Self, GaborError> {
        if d == 0 || d > 2 {
            return Err(GaborError::UnsupportedDimension(d));
        }
        let n = 2 * extent * samples_per_unit;
        Ok(SampledSignal { d, samples_per_unit, extent, values: vec![Complex::zero(); n.pow(d as u32)] })
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(d: usize, samples_per_unit: usize, extent: usize, f: impl Fn(&[F]) -> Complex<F>) -> Result<Self, GaborError> {
        let mut s = Self::zeros(d, samples_per_unit, extent)?;
        let mut x = vec![F::zero(); d];
        for idx in 0..s.values.len() {
            s.point(idx, &mut x);
            s.values[idx] = f(&x);
        }
        Ok(s)
    }

    /// Indicator of `[0, 1)^d`.
    pub fn indicator(d: usize, samples_per_unit: usize, extent: usize) -> Result<Self, GaborError> {
        let mut s = Self::zeros(d, samples_per_unit, extent)?;
        let lo = extent * samples_per_unit;
        let hi = lo + samples_per_unit;
        for idx in 0..s.values.len() {
            if s.multi_index(idx).iter().all(|&i| (lo..hi).contains(&i)) {
                s.values[idx] = Complex::new(F::one(), F::zero());
            }
        }
        Ok(s)
    }

    /// `e^{-π|x - center|² / width²}`
    pub fn gaussian(d: usize, samples_per_unit: usize, extent: usize, width: F, center: &[F]) -> Result<Self, GaborError> {
        Self::from_fn(d, samples_per_unit, extent, |x| {
            let r2 = x.iter().zip(center).fold(F::zero(), |acc, (a, c)| acc + (*a - *c) * (*a - *c));
            Complex::new((-F::PI() * r2 / (width * width)).exp(), F::zero())
        })
    }

    /// Builds a signal by name: `"indicator"` or `"gaussian:<width>"`.
    pub fn named(name: &str, d: usize, samples_per_unit: usize, extent: usize) -> Result<Self, GaborError> {
        if name == "indicator" {
            return Self::indicator(d, samples_per_unit, extent);
        }
        if let Some(w) = name.strip_prefix("gaussian:") {
            let w: f64 = w.parse().map_err(|_| GaborError::BadSignal(format!("bad width in {name}")))?;
            if w <= 0.0 {
                return Err(GaborError::BadSignal("width must be positive".into()));
            }
            return Self::gaussian(d, samples_per_unit, extent, F::lit(w), &vec![F::zero(); d]);
        }
        Err(GaborError::BadSignal(format!("unknown signal {name}")))
    }

    pub fn from_data(data: &SignalData) -> Result<Self, GaborError> {
        let mut s = Self::zeros(data.d, data.grid, data.extent)?;
        if data.values.len() != 2 * s.values.len() {
            return Err(GaborError::BadSignal(format!("expected {} numbers, got {}", 2 * s.values.len(), data.values.len())));
        }
        for (v, pair) in s.values.iter_mut().zip(data.values.chunks(2)) {
            *v = Complex::new(F::lit(pair[0]), F::lit(pair[1]));
        }
        Ok(s)
    }

    pub fn to_data(&self) -> SignalData {
        SignalData {
            d: self.d,
            grid: self.samples_per_unit,
            extent: self.extent,
            values: self.values.iter().flat_map(|c| [c.re.to_f64().unwrap(), c.im.to_f64().unwrap()]).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn samples_per_unit(&self) -> usize {
        self.samples_per_unit
    }

    pub fn extent(&self) -> usize {
        self.extent
    }

    pub fn values(&self) -> &[Complex<F>] {
        &self.values
    }

    /// Samples per axis.
    pub fn axis_len(&self) -> usize {
        2 * self.extent * self.samples_per_unit
    }

    fn multi_index(&self, idx: usize) -> Vec<usize> {
        let n = self.axis_len();
        if self.d == 1 {
            vec![idx]
        } else {
            vec![idx / n, idx % n]
        }
    }

    fn point(&self, idx: usize, x: &mut [F]) {
        let ns = F::lit(self.samples_per_unit as f64);
        for (xa, i) in x.iter_mut().zip(self.multi_index(idx)) {
            *xa = F::lit(i as f64) / ns - F::lit(self.extent as f64);
        }
    }

    fn same_grid(&self, other: &Self) -> Result<(), GaborError> {
        if self.d == other.d && self.samples_per_unit == other.samples_per_unit && self.extent == other.extent {
            Ok(())
        } else {
            Err(GaborError::GridMismatch)
        }
    }

    fn cell(&self) -> F {
        F::one() / F::lit((self.samples_per_unit as f64).powi(self.d as i32))
    }

    pub fn norm_sqr(&self) -> F {
        self.values.iter().fold(F::zero(), |acc, v| acc + v.norm_sqr()) * self.cell()
    }

    /// `∫ f conj(g)`
    pub fn inner(&self, other: &Self) -> Result<Complex<F>, GaborError> {
        self.same_grid(other)?;
        let s = self.values.iter().zip(&other.values).fold(Complex::zero(), |acc, (a, b)| acc + a * b.conj());
        Ok(s * self.cell())
    }

    pub fn scale(&self, c: Complex<F>) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = *v * c);
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self, GaborError> {
        self.same_grid(other)?;
        let mut out = self.clone();
        out.values.iter_mut().zip(&other.values).for_each(|(a, b)| *a = *a + b);
        Ok(out)
    }

    /// Relative mass in the outermost unit shell of the extent.
    pub fn tail_mass(&self) -> F {
        let total = self.norm_sqr();
        if total.is_zero() {
            return F::zero();
        }
        let n = self.axis_len();
        let band = self.samples_per_unit;
        let outer = |i: usize| i < band || i >= n - band;
        let mut tail = F::zero();
        for (idx, v) in self.values.iter().enumerate() {
            let hit = if self.d == 1 { outer(idx) } else { outer(idx / n) || outer(idx % n) };
            if hit {
                tail = tail + v.norm_sqr();
            }
        }
        tail * self.cell() / total
    }

    /// `f(x - shift / n)` for an integer number of grid steps per axis.
    /// Samples pushed past the edge are dropped.
    pub fn shift_steps(&self, steps: &[i64]) -> Self {
        let n = self.axis_len() as i64;
        let mut out = Self::zeros(self.d, self.samples_per_unit, self.extent).expect("same shape");
        // Destination indices whose source i - s lies in [0, n).
        let live = |s: i64| s.max(0)..(n + s).min(n);
        if self.d == 1 {
            for i in live(steps[0]) {
                out.values[i as usize] = self.values[(i - steps[0]) as usize];
            }
        } else {
            for i0 in live(steps[0]) {
                let (dst, src) = (i0 * n, (i0 - steps[0]) * n);
                for i1 in live(steps[1]) {
                    out.values[(dst + i1) as usize] = self.values[(src + i1 - steps[1]) as usize];
                }
            }
        }
        out
    }

    /// `T_k f(x) = f(x - k)`
    pub fn translate(&self, k: &[Integer]) -> Self {
        let steps: Vec<i64> = k.iter().map(|x| x.to_i64().unwrap() * self.samples_per_unit as i64).collect();
        self.shift_steps(&steps)
    }

    /// `f(x - a)` for a rational vector `a` on the grid.
    pub fn translate_rational(&self, a: &[Rational]) -> Result<Self, GaborError> {
        let ns = rat(self.samples_per_unit as i64, 1);
        let steps = a
            .iter()
            .map(|x| {
                let s = x * &ns;
                if s.is_integer() {
                    Ok(s.to_integer().to_i64().unwrap())
                } else {
                    Err(GaborError::NotGridAligned(format_rational(x)))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.shift_steps(&steps))
    }

    /// `M_l f(x) = e^{2πi⟨l, x⟩} f(x)` with the phase reduced exactly.
    pub fn modulate(&self, l: &[Rational]) -> Self {
        let ns = self.samples_per_unit as i128;
        let off = (self.extent * self.samples_per_unit) as i128;
        // The phase separates over axes; each factor is reduced exactly.
        let tables: Vec<Vec<Complex<F>>> = l
            .iter()
            .map(|x| {
                let (p, q) = as_fraction(x);
                (0..self.axis_len() as i128).map(|i| e::<F>(p * (i - off), q * ns)).collect()
            })
            .collect();
        let n = self.axis_len();
        let mut out = self.clone();
        for (idx, v) in out.values.iter_mut().enumerate() {
            if v.is_zero() {
                continue;
            }
            *v = if self.d == 1 { *v * tables[0][idx] } else { *v * tables[0][idx / n] * tables[1][idx % n] };
        }
        out
    }

    /// `M_l f` with `l` given as a float, for the irrational case.
    pub fn modulate_real(&self, l: F) -> Self {
        assert_eq!(self.d, 1);
        let mut out = self.clone();
        let mut x = [F::zero()];
        for (idx, v) in out.values.iter_mut().enumerate() {
            self.point(idx, &mut x);
            let a = F::TAU() * l * x[0];
            *v = *v * Complex::new(a.cos(), a.sin());
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<F, GaborError> {
        self.same_grid(other)?;
        Ok(self.values.iter().zip(&other.values).fold(F::zero(), |m, (a, b)| m.max((a - b).norm())))
    }
}

/// `Zf(x, y)` on the grid `x ∈ (1/n)Z^d ∩ [0,1)^d`, `y ∈ (1/n_y)Z^d ∩ [0,1)^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZakArray<F: Real> {
    pub d: usize,
    pub nx: usize,
    pub ny: usize,
    /// Truncation `|m|_∞ ≤ M`.
    pub truncation: usize,
    /// Index `x_flat * ny^d + y_flat`.
    pub values: Vec<Complex<F>>,
}

impl<F: Real> ZakArray<F> {
    pub fn get(&self, x: &[usize], y: &[usize]) -> Complex<F> {
        let xf = x.iter().fold(0, |acc, &i| acc * self.nx + i);
        let yf = y.iter().fold(0, |acc, &i| acc * self.ny + i);
        self.values[xf * self.ny.pow(self.d as u32) + yf]
    }

    /// Riemann sum over `[0,1)^{2d}`.
    pub fn norm_sqr(&self) -> F {
        let cell = F::lit(((self.nx * self.ny) as f64).powi(self.d as i32));
        self.values.iter().fold(F::zero(), |acc, v| acc + v.norm_sqr()) / cell
    }

    pub fn max_abs_diff(&self, other: &Self) -> F {
        self.values.iter().zip(&other.values).fold(F::zero(), |m, (a, b)| m.max((a - b).norm()))
    }
}

/// `Σ_{|m|_∞ ≤ M} f(x + offset + m) e^{2πi⟨m, y⟩}` with `x` over the unit
/// cell starting at the integer `offset`. Samples outside the stored
/// extent count as zero.
fn zak_at<F: Real>(f: &SampledSignal<F>, ny: usize, truncation: usize, offset: &[i64]) -> ZakArray<F> {
    let d = f.d;
    let ns = f.samples_per_unit;
    let m = truncation as i64;
    let stored = f.extent as i64;
    let n = f.axis_len();
    // e(m y) for m ∈ [-M, M], y = j / ny
    let twiddle: Vec<Complex<F>> = (-m..=m)
        .flat_map(|mm| (0..ny).map(move |jy| e::<F>(mm as i128 * jy as i128, ny as i128)))
        .collect();
    let tw = |mm: i64, jy: usize| twiddle[(mm + m) as usize * ny + jy];
    // Values of m whose cell lies inside the stored grid, per axis.
    let ms: Vec<Vec<i64>> = offset.iter().map(|off| ((-stored - off).max(-m)..=(stored - 1 - off).min(m)).collect()).collect();
    let index = |jx: usize, mm: i64, axis: usize| ((mm + stored + offset[axis]) as usize) * ns + jx;

    let mut values = Vec::with_capacity((ns * ny).pow(d as u32));
    if d == 1 {
        for jx in 0..ns {
            let a: Vec<(i64, Complex<F>)> =
                ms[0].iter().map(|&mm| (mm, f.values[index(jx, mm, 0)])).filter(|(_, v)| !v.is_zero()).collect();
            for jy in 0..ny {
                values.push(a.iter().fold(Complex::zero(), |s, (mm, v)| s + v * tw(*mm, jy)));
            }
        }
    } else {
        let mut partial = vec![Complex::<F>::zero(); ms[0].len() * ny];
        for jx0 in 0..ns {
            for jx1 in 0..ns {
                // partial[m0][y1] = Σ_{m1} f(x + m) e(m1 y1)
                partial.iter_mut().for_each(|p| *p = Complex::zero());
                for (r, &m0) in ms[0].iter().enumerate() {
                    let row = index(jx0, m0, 0) * n;
                    for &m1 in &ms[1] {
                        let v = f.values[row + index(jx1, m1, 1)];
                        if v.is_zero() {
                            continue;
                        }
                        let t = &twiddle[(m1 + m) as usize * ny..][..ny];
                        for (p, w) in partial[r * ny..][..ny].iter_mut().zip(t) {
                            *p = *p + v * w;
                        }
                    }
                }
                let start = values.len();
                values.resize(start + ny * ny, Complex::zero());
                for (r, &m0) in ms[0].iter().enumerate() {
                    let row = &partial[r * ny..][..ny];
                    if row.iter().all(Zero::is_zero) {
                        continue;
                    }
                    for jy0 in 0..ny {
                        let t = tw(m0, jy0);
                        for (s, p) in values[start + jy0 * ny..][..ny].iter_mut().zip(row) {
                            *s = *s + p * t;
                        }
                    }
                }
            }
        }
    }
    ZakArray { d, nx: ns, ny, truncation, values }
}

/// Zak transform truncated to `|m|_∞ ≤ M`, with `y` sampled `ny` times per
/// axis. Fails if more than `tolerance` of the mass of `f` sits in the
/// outermost unit shell.
pub fn zak<F: Real>(f: &SampledSignal<F>, ny: usize, tolerance: f64) -> Result<ZakArray<F>, GaborError> {
    zak_truncated(f, ny, f.extent, tolerance)
}

/// [`zak`] with the truncation `M` set apart from the sampled extent, as
/// if `f` were zero-padded to `[-M, M)^d`.
pub fn zak_truncated<F: Real>(f: &SampledSignal<F>, ny: usize, truncation: usize, tolerance: f64) -> Result<ZakArray<F>, GaborError> {
    let mass = f.tail_mass().to_f64().unwrap();
    if mass > tolerance {
        return Err(GaborError::TailTooLarge { mass, tolerance });
    }
    Ok(zak_at(f, ny, truncation, &vec![0; f.d]))
}

/// Largest deviation from `Zf(x + e_i, y) = e^{-2πi y_i} Zf(x, y)`.
pub fn zak_quasi_periodicity_error<F: Real>(f: &SampledSignal<F>, ny: usize) -> F {
    let z = zak_at(f, ny, f.extent, &vec![0; f.d]);
    let mut worst = F::zero();
    for axis in 0..f.d {
        let mut off = vec![0; f.d];
        off[axis] = 1;
        let shifted = zak_at(f, ny, f.extent, &off);
        let per = ny.pow(f.d as u32);
        for (idx, (a, b)) in shifted.values.iter().zip(&z.values).enumerate() {
            let yf = idx % per;
            let yi = if f.d == 1 { yf } else if axis == 0 { yf / ny } else { yf % ny };
            let expect = b * e::<F>(-(yi as i128), ny as i128);
            worst = worst.max((a - expect).norm());
        }
    }
    worst
}

/// `max |Z(T_k M_l f) − e^{2πi⟨k,y⟩} e^{2πi⟨l,x⟩} Zf|` over the grid for
/// `l = B c`, `B` integral.
///
/// With `Zf(x,y) = Σ_m f(x+m) e^{2πi⟨m,y⟩}` the translation contributes
/// `e^{+2πi⟨k,y⟩}`.
pub fn zak_intertwine<F: Real>(
    spec: &GroupSpec,
    f: &SampledSignal<F>,
    k: &[Integer],
    l_coeff: &[Integer],
    ny: usize,
    tolerance: f64,
) -> Result<F, GaborError> {
    if spec.kind() != GroupKind::Integer {
        return Err(GaborError::WrongKind);
    }
    let z = zak(f, ny, tolerance)?;
    zak_intertwine_with(spec, f, &z, k, l_coeff, tolerance)
}

/// [`zak_intertwine`] against a precomputed `Zf`, whose `ny` and truncation
/// are reused.
pub fn zak_intertwine_with<F: Real>(
    spec: &GroupSpec,
    f: &SampledSignal<F>,
    z: &ZakArray<F>,
    k: &[Integer],
    l_coeff: &[Integer],
    tolerance: f64,
) -> Result<F, GaborError> {
    if spec.kind() != GroupKind::Integer {
        return Err(GaborError::WrongKind);
    }
    if spec.dim() != f.d || z.d != f.d || z.nx != f.samples_per_unit {
        return Err(GaborError::GridMismatch);
    }
    let ny = z.ny;
    let l = spec.modulation_vector(l_coeff)?;
    let lhs = zak_truncated(&f.modulate(&l).translate(k), ny, z.truncation, tolerance)?;
    let ns = f.samples_per_unit as i128;
    let li: Vec<i128> = l.iter().map(|x| x.to_integer().to_i128().unwrap()).collect();
    let ki: Vec<i128> = k.iter().map(|x| x.to_i128().unwrap()).collect();
    let per = ny.pow(f.d as u32);
    let split = |flat: usize, side: usize| if f.d == 1 { [flat, 0] } else { [flat / side, flat % side] };
    // e(⟨k, y⟩) and e(⟨l, x⟩), each reduced exactly
    let y_phase: Vec<Complex<F>> = (0..per)
        .map(|yf| e::<F>(ki.iter().zip(split(yf, ny)).map(|(kk, y)| kk * y as i128).sum(), ny as i128))
        .collect();
    let x_phase: Vec<Complex<F>> = (0..f.samples_per_unit.pow(f.d as u32))
        .map(|xf| e::<F>(li.iter().zip(split(xf, f.samples_per_unit)).map(|(ll, x)| ll * x as i128).sum(), ns))
        .collect();
    let mut worst = F::zero();
    for (idx, (a, b)) in lhs.values.iter().zip(&z.values).enumerate() {
        let expect = b * x_phase[idx / per] * y_phase[idx % per];
        worst = worst.max((a - expect).norm());
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DensityVerdict {
    pub parseval_exists: bool,
    pub orthonormal_basis_possible: bool,
    pub vol: String,
}

/// A Parseval Gabor frame over `AZ^d × BZ^d` exists iff
/// `|det A det B| ≤ 1`; an orthonormal basis needs equality.
pub fn density_predicate(a: &RationalMatrix, b: &RationalMatrix) -> Result<DensityVerdict, GaborError> {
    let vol = a.abs_det() * b.abs_det();
    if vol.is_zero() {
        return Err(GaborError::Singular);
    }
    let one = rat(1, 1);
    Ok(DensityVerdict { parseval_exists: vol <= one, orthonormal_basis_possible: vol == one, vol: format_rational(&vol) })
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FrameSum {
    pub value: f64,
    /// Contribution of the outermost shell `max(|n|_∞, |k|_∞) = R`.
    pub boundary_shell: f64,
    pub terms: usize,
}

fn lattice_points(d: usize, r: i64) -> Vec<Vec<i64>> {
    let side: Vec<i64> = (-r..=r).collect();
    if d == 1 {
        side.iter().map(|&x| vec![x]).collect()
    } else {
        side.iter().flat_map(|&x| side.iter().map(move |&y| vec![x, y])).collect()
    }
}

/// Largest coordinate of `Bk` over `|k|_∞ ≤ R`.
pub fn max_frequency(b: &RationalMatrix, r: i64) -> f64 {
    (0..b.rows()).map(|i| b.row(i).iter().map(|x| to_f64(x).abs()).sum::<f64>() * r as f64).fold(0.0, f64::max)
}

/// Smallest power of two that resolves every modulation `Bk`, `|k|_∞ ≤ R`.
pub fn frame_grid(b: &RationalMatrix, r: usize) -> usize {
    let need = (2.0 * max_frequency(b, r as i64)).floor() as usize + 1;
    need.next_power_of_two()
}

/// `Σ_{|n|_∞, |k|_∞ ≤ R} |⟨h, M_{Bk} T_{An} g⟩|²`.
///
/// The grid must resolve the highest frequency `Bk`: a discrete sum over
/// `n` samples per unit cannot tell `ξ` from `ξ + n`.
///
/// Fails when the outermost shell carries more than `tolerance` of the
/// total, which signals that `R` does not cover the interactions.
pub fn frame_sum<F: Real>(
    g: &SampledSignal<F>,
    h: &SampledSignal<F>,
    a: &RationalMatrix,
    b: &RationalMatrix,
    r: usize,
    tolerance: f64,
) -> Result<FrameSum, GaborError> {
    g.same_grid(h)?;
    let d = g.d;
    if a.rows() != d || b.rows() != d || !a.is_square() || !b.is_square() {
        return Err(GaborError::GridMismatch);
    }
    if a.abs_det().is_zero() || b.abs_det().is_zero() {
        return Err(GaborError::Singular);
    }
    let r = r as i64;
    let ns = g.samples_per_unit;
    let top = max_frequency(b, r);
    if 2.0 * top >= ns as f64 {
        return Err(GaborError::GridTooCoarse { samples_per_unit: ns, frequency: top, needed: (2.0 * top).floor() as usize });
    }
    let pts = lattice_points(d, r);
    let to_rat = |v: &[i64]| v.iter().map(|&x| rat(x, 1)).collect::<Vec<_>>();
    let mut total = 0.0;
    let mut shell = 0.0;
    let mut terms = 0;
    for n in &pts {
        let shifted = g.translate_rational(&a.mul_vec(&to_rat(n)))?;
        // F = h · conj(T_{An} g); ⟨h, M_l T g⟩ = ∫ F e^{-2πi⟨l,x⟩}
        let mut prod = h.clone();
        prod.values.iter_mut().zip(&shifted.values).for_each(|(p, s)| *p = *p * s.conj());
        if prod.values.iter().all(Zero::is_zero) {
            continue;
        }
        for k in &pts {
            let l: Vec<Rational> = b.mul_vec(&to_rat(k)).into_iter().map(|x| -x).collect();
            let c = prod.modulate(&l).values.iter().fold(Complex::<F>::zero(), |acc, v| acc + v) * prod.cell();
            let v = c.norm_sqr().to_f64().unwrap();
            total += v;
            terms += 1;
            if n.iter().chain(k).any(|x| x.abs() == r) {
                shell += v;
            }
        }
    }
    if total > 0.0 && shell / total > tolerance {
        return Err(GaborError::TailTooLarge { mass: shell / total, tolerance });
    }
    Ok(FrameSum { value: total, boundary_shell: shell, terms })
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GaborAdmissibilityReport {
    pub kind: GroupKind,
    pub abs_det_b: String,
    pub admissible: Option<bool>,
    pub multiplicity: Option<String>,
    pub decomposition: Option<String>,
    pub density_condition: bool,
    pub rescaling: Option<String>,
    pub verdict: String,
}

pub fn gabor_admissibility_report(spec: &GroupSpec) -> Result<GaborAdmissibilityReport, GaborError> {
    let det = spec.abs_det_b()?;
    let det_s = format_rational(&det);
    let one = rat(1, 1);
    match spec.kind() {
        GroupKind::Integer => {
            let admissible = det == one;
            let verdict = if admissible { "admissible".to_string() } else { format!("not admissible, multiplicity {det_s}") };
            Ok(GaborAdmissibilityReport {
                kind: spec.kind(),
                abs_det_b: det_s.clone(),
                admissible: Some(admissible),
                multiplicity: Some(det_s.clone()),
                decomposition: Some(format!("integral of chi (x) 1_{{C^{det_s}}} over [0,1)^d x B^{{-T}}[0,1)^d")),
                density_condition: det <= one,
                rescaling: None,
                verdict,
            })
        }
        GroupKind::RationalNonInteger => {
            let m = spec.m().expect("rational");
            let ok = det <= one;
            Ok(GaborAdmissibilityReport {
                kind: spec.kind(),
                abs_det_b: det_s,
                admissible: None,
                multiplicity: None,
                decomposition: None,
                density_condition: ok,
                rescaling: Some(format!("sqrt({m})")),
                verdict: if ok { "density condition holds".into() } else { "not admissible: |det B| > 1".into() },
            })
        }
        GroupKind::IrrationalD1 => Err(GroupError::IrrationalUnsupported.into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::classify;
    use crate::matrix::Matrix;
    use crate::scalar::int;

    fn m1(p: i64, q: i64) -> RationalMatrix {
        Matrix::from_rows(vec![vec![rat(p, q)]])
    }

    #[test]
    fn indicator_zak_is_one() {
        let f = SampledSignal::<f64>::indicator(1, 16, 4).unwrap();
        let z = zak(&f, 16, 1e-9).unwrap();
        assert!(z.values.iter().all(|v| *v == Complex::new(1.0, 0.0)));
        let f = SampledSignal::<f64>::indicator(2, 4, 2).unwrap();
        let z = zak(&f, 4, 1e-9).unwrap();
        assert!(z.values.iter().all(|v| *v == Complex::new(1.0, 0.0)));
    }

    #[test]
    fn zero_signal() {
        let f = SampledSignal::<f64>::zeros(1, 8, 3).unwrap();
        assert!(zak(&f, 8, 1e-9).unwrap().values.iter().all(|v| v.is_zero()));
    }

    #[test]
    fn gaussian_norm_preserved() {
        let f = SampledSignal::<f64>::gaussian(1, 32, 8, 1.3, &[0.2]).unwrap();
        let z = zak(&f, 32, 1e-9).unwrap();
        assert!((z.norm_sqr() - f.norm_sqr()).abs() < 1e-6);
        assert!(zak_quasi_periodicity_error(&f, 32) < 1e-12);
    }

    #[test]
    fn heavy_tail_rejected() {
        let f = SampledSignal::<f64>::gaussian(1, 8, 2, 3.0, &[0.0]).unwrap();
        assert!(matches!(zak(&f, 8, 1e-6), Err(GaborError::TailTooLarge { .. })));
    }

    #[test]
    fn intertwining_examples() {
        let spec = classify(m1(3, 1)).unwrap();
        let g = SampledSignal::<f64>::gaussian(1, 32, 12, 1.0, &[0.0]).unwrap();
        let err = zak_intertwine(&spec, &g, &[int(1)], &[int(1)], 32, 1e-9).unwrap();
        assert!(err < 1e-10, "{err}");
        let err = zak_intertwine(&spec, &g, &[int(0)], &[int(0)], 32, 1e-9).unwrap();
        assert_eq!(err, 0.0);
        let ind = SampledSignal::<f64>::indicator(1, 16, 6).unwrap();
        let err = zak_intertwine(&spec, &ind, &[int(2)], &[int(0)], 16, 1e-9).unwrap();
        assert!(err < 1e-12);
        let rational = classify(m1(1, 2)).unwrap();
        assert_eq!(zak_intertwine(&rational, &g, &[int(0)], &[int(0)], 32, 1e-9), Err(GaborError::WrongKind));
    }

    #[test]
    fn density_table() {
        let one = m1(1, 1);
        assert_eq!(density_predicate(&one, &m1(3, 1)).unwrap().parseval_exists, false);
        let v = density_predicate(&one, &one).unwrap();
        assert!(v.parseval_exists && v.orthonormal_basis_possible);
        let v = density_predicate(&one, &m1(1, 2)).unwrap();
        assert!(v.parseval_exists && !v.orthonormal_basis_possible);
        assert_eq!(v.vol, "1/2");
        assert_eq!(density_predicate(&one, &m1(0, 1)), Err(GaborError::Singular));
    }

    #[test]
    fn frame_sum_zero_signal() {
        let g = SampledSignal::<f64>::indicator(1, 8, 4).unwrap();
        let h = SampledSignal::<f64>::zeros(1, 8, 4).unwrap();
        assert_eq!(frame_sum(&g, &h, &m1(1, 1), &m1(1, 1), 3, 1.0).unwrap().value, 0.0);
    }

    #[test]
    fn modulation_by_integer_on_grid() {
        let f = SampledSignal::<f64>::indicator(1, 4, 2).unwrap();
        let g = f.modulate(&[rat(1, 1)]);
        // x = 1/4 inside [0, 1) picks up e^{iπ/2}
        let idx = 2 * 4 + 1;
        assert!((g.values()[idx] - Complex::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn admissibility_verdicts() {
        let r = gabor_admissibility_report(&classify(m1(3, 1)).unwrap()).unwrap();
        assert_eq!(r.verdict, "not admissible, multiplicity 3");
        let r = gabor_admissibility_report(&classify(m1(1, 1)).unwrap()).unwrap();
        assert_eq!(r.admissible, Some(true));
    }
}
