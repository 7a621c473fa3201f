//! Scalar abstraction shared by the finite and sampled regimes.
//!
//! Every finite-system algorithm is written against [`Scalar`]. The exact
//! instantiation is [`BigRational`](num_rational::BigRational); `f64`/`f32`
//! instantiations exist for quick numerical experiments but carry no
//! exactness guarantee.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Ordered field element used by the finite regime.
pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// `num / den`. Panics if `den == 0`.
    fn from_ratio(num: i64, den: i64) -> Self;

    /// Parses `"p/q"`, an integer, or a decimal literal such as `"-0.125"`.
    fn parse(text: &str) -> Result<Self>;

    /// Canonical text form: `"p/q"` (or `"p"`) for exact types, shortest
    /// round-trip decimal for floats.
    fn render(&self) -> String;

    /// Slack allowed when validating equalities such as `Σ weights = 1`.
    /// Zero for exact types.
    fn tolerance() -> Self;

    /// Whether arithmetic on this type is exact.
    fn is_exact() -> bool;

    /// Smallest integer `≥ self`, saturating at zero for negative inputs.
    fn ceil_u64(&self) -> u64;

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable as scalar")
    }

    fn approx_eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).abs() <= Self::tolerance()
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Positive part `max(self, 0)`.
    fn positive_part(&self) -> Self {
        self.clone().max_of(Self::zero())
    }
}

fn parse_error(text: &str) -> Error {
    Error::Parse(format!("not a number: {text:?}"))
}

/// Parses a decimal literal (optionally with exponent) into an exact rational.
fn parse_decimal_exact(text: &str) -> Option<BigRational> {
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((a, b)) => (a, b),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str(if all_digits.is_empty() { "0" } else { &all_digits }).ok()?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u8);
    let mut value = BigRational::from_integer(numer);
    if scale >= 0 {
        value *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if negative { -value } else { value })
}

impl Scalar for BigRational {
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if let Some((p, q)) = text.split_once('/') {
            let p = BigInt::from_str(p.trim()).map_err(|_| parse_error(text))?;
            let q = BigInt::from_str(q.trim()).map_err(|_| parse_error(text))?;
            if q.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {text:?}")));
            }
            return Ok(BigRational::new(p, q));
        }
        parse_decimal_exact(text).ok_or_else(|| parse_error(text))
    }

    fn render(&self) -> String {
        if self.denom().is_one() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }

    fn tolerance() -> Self {
        BigRational::zero()
    }

    fn is_exact() -> bool {
        true
    }

    fn ceil_u64(&self) -> u64 {
        if self.is_negative() {
            return 0;
        }
        self.ceil().to_integer().to_u64().expect("ceiling fits in u64")
    }
}

macro_rules! float_scalar {
    ($t:ty, $tol:expr) => {
        impl Scalar for $t {
            fn from_ratio(num: i64, den: i64) -> Self {
                assert!(den != 0, "zero denominator");
                num as $t / den as $t
            }

            fn parse(text: &str) -> Result<Self> {
                let text = text.trim();
                if let Some((p, q)) = text.split_once('/') {
                    let p: $t = p.trim().parse().map_err(|_| parse_error(text))?;
                    let q: $t = q.trim().parse().map_err(|_| parse_error(text))?;
                    if q == 0.0 {
                        return Err(Error::Parse(format!("zero denominator in {text:?}")));
                    }
                    return Ok(p / q);
                }
                let value: $t = text.parse().map_err(|_| parse_error(text))?;
                if !value.is_finite() {
                    return Err(parse_error(text));
                }
                Ok(value)
            }

            fn render(&self) -> String {
                format!("{}", self)
            }

            fn tolerance() -> Self {
                $tol
            }

            fn is_exact() -> bool {
                false
            }

            fn ceil_u64(&self) -> u64 {
                if *self <= 0.0 {
                    0
                } else {
                    Float::ceil(*self) as u64
                }
            }
        }
    };
}

float_scalar!(f64, 1e-12);
float_scalar!(f32, 1e-6);

/// Floating-point scalar used by the sampled regime.
pub trait Real: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("float literal representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Decimal convenience rendering used next to exact `"p/q"` columns.
pub fn to_decimal<S: Scalar>(value: &S) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    #[test]
    fn parses_rational_forms() {
        assert_eq!(BigRational::parse("1/3").unwrap(), q(1, 3));
        assert_eq!(BigRational::parse("-6/4").unwrap(), q(-3, 2));
        assert_eq!(BigRational::parse("7").unwrap(), q(7, 1));
        assert_eq!(BigRational::parse("0.125").unwrap(), q(1, 8));
        assert_eq!(BigRational::parse("-2.5e-1").unwrap(), q(-1, 4));
        assert_eq!(BigRational::parse("1e3").unwrap(), q(1000, 1));
        assert!(BigRational::parse("1/0").is_err());
        assert!(BigRational::parse("abc").is_err());
        assert!(BigRational::parse("").is_err());
    }

    #[test]
    fn renders_canonical_text() {
        assert_eq!(q(2, 6).render(), "1/3");
        assert_eq!(q(-4, 2).render(), "-2");
        assert_eq!(0.1f64.render(), "0.1");
    }

    #[test]
    fn ceil_and_parts() {
        assert_eq!(q(7, 2).ceil_u64(), 4);
        assert_eq!(q(3, 1).ceil_u64(), 3);
        assert_eq!(q(-3, 1).ceil_u64(), 0);
        assert_eq!(q(-3, 1).positive_part(), q(0, 1));
        assert_eq!(2.5f64.ceil_u64(), 3);
    }

    #[test]
    fn float_parse_accepts_fractions() {
        assert_eq!(f64::parse("1/4").unwrap(), 0.25);
        assert!(f64::parse("inf").is_err());
    }
}
