//! Scalar types.
//!
//! Exact objects (lattice bases, group phases, character parameters) use
//! arbitrary-precision integers and rationals. Sampled-signal numerics are
//! generic over a floating point type implementing [`Real`].

use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision integer.
pub type Integer = BigInt;
/// Arbitrary-precision rational, always stored in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// Floating point scalar used by the sampled-function numerics.
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Send + Sync + 'static {
    /// Converts an `f64` constant into `Self`.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub fn int(n: i64) -> Integer {
    BigInt::from(n)
}

pub fn rat(p: i64, q: i64) -> Rational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

pub fn rat_from_int(n: Integer) -> Rational {
    BigRational::from_integer(n)
}

/// Floor of a rational as an integer.
pub fn floor(x: &Rational) -> Integer {
    x.numer().div_floor(x.denom())
}

/// Fractional part in `[0, 1)`.
pub fn frac(x: &Rational) -> Rational {
    x - rat_from_int(floor(x))
}

pub fn is_integral(x: &Rational) -> bool {
    x.denom().is_one()
}

pub fn to_f64(x: &Rational) -> f64 {
    // Rationals here have modest size; fall back to numerator/denominator
    // division when the direct conversion overflows.
    x.to_f64().unwrap_or_else(|| {
        let n = x.numer().to_f64().unwrap_or(f64::NAN);
        let d = x.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn lcm(a: &Integer, b: &Integer) -> Integer {
    if a.is_zero() || b.is_zero() {
        return Integer::zero();
    }
    a.lcm(b).abs()
}

/// Parses `"p/q"`, `"p"` or `"-p/q"` into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: Integer = num.parse().ok()?;
    let den: Integer = den.parse().ok()?;
    if den.is_zero() {
        return None;
    }
    Some(BigRational::new(num, den))
}

/// Formats a rational as `"p"` or `"p/q"`.
pub fn format_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_and_frac_handle_negatives() {
        assert_eq!(floor(&rat(-1, 4)), int(-1));
        assert_eq!(frac(&rat(-1, 4)), rat(3, 4));
        assert_eq!(frac(&rat(7, 3)), rat(1, 3));
        assert_eq!(frac(&rat(2, 1)), rat(0, 1));
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("-3/4"), Some(rat(-3, 4)));
        assert_eq!(parse_rational("6/4"), Some(rat(3, 2)));
        assert_eq!(parse_rational(" 5 "), Some(rat(5, 1)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("0.5"), None);
        assert_eq!(format_rational(&rat(-6, 4)), "-3/2");
        assert_eq!(format_rational(&rat(4, 2)), "2");
    }
}
