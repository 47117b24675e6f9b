//! Exact fractions and their `"p/q"` text form.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rational = num_rational::BigRational;

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"3"`, `"-2"`, or `"1/3"`. Whitespace around the parts is allowed.
pub fn parse(text: &str) -> Result<Rational> {
    let bad = |why: &str| Error::parse(text.to_string(), why.to_string());
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text.trim(), "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad("numerator is not an integer"))?;
    let den: BigInt = den.parse().map_err(|_| bad("denominator is not an integer"))?;
    if den.is_zero() {
        return Err(bad("zero denominator"));
    }
    Ok(Rational::new(num, den))
}

/// Formats in lowest terms; integers print without a denominator.
pub fn format(value: &Rational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn is_probability(value: &Rational) -> bool {
    !value.is_negative() && value <= &one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_reduces() {
        assert_eq!(parse("2/6").unwrap(), frac(1, 3));
        assert_eq!(parse(" 7 ").unwrap(), int(7));
        assert_eq!(parse("100000").unwrap(), int(100_000));
        assert_eq!(parse("-1/2").unwrap(), frac(-1, 2));
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse("1/0").is_err());
        assert!(parse("a/3").is_err());
        assert!(parse("").is_err());
        assert!(parse("0.5").is_err());
    }

    #[test]
    fn formats_canonically() {
        assert_eq!(format(&frac(2, 4)), "1/2");
        assert_eq!(format(&int(3)), "3");
        assert_eq!(format(&frac(1, 12)), "1/12");
    }
}
