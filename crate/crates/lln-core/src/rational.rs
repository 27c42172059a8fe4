//! Canonical parsing and formatting for exact rationals.
//!
//! Every number that crosses a file boundary (JSON, CSV, CLI flags) is an
//! arbitrary-precision rational rendered as a string: `"p/q"` in lowest terms,
//! or just `"p"` when the denominator is one. Parsing additionally accepts
//! plain decimals (`"0.25"` becomes `1/4`), since hand-written inputs tend to
//! use them.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

/// Exact rational scalar used throughout the crate.
pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseRationalError {
    #[error("empty rational string")]
    Empty,
    #[error("malformed rational `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Shorthand for small rationals in tests and fixtures.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Integer as a rational.
pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Canonical lowest-terms rendering: `"p"` for integers, `"p/q"` otherwise.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse `"p/q"`, an integer, or a plain decimal into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| ParseRationalError::Malformed(s.to_string()))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| ParseRationalError::Malformed(s.to_string()))?;
        if d.is_zero() {
            return Err(ParseRationalError::ZeroDenominator(s.to_string()));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ParseRationalError::Malformed(s.to_string()));
        }
        let negative = int_part.starts_with('-');
        let int_digits = int_part.trim_start_matches(['-', '+']);
        if !int_digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ParseRationalError::Malformed(s.to_string()));
        }
        let joined = format!("{}{}", int_digits, frac_part);
        let n: BigInt = joined
            .parse()
            .map_err(|_| ParseRationalError::Malformed(s.to_string()))?;
        let d = BigInt::from(10u32).pow(frac_part.len() as u32);
        let r = Rational::new(n, d);
        return Ok(if negative { -r } else { r });
    }
    let n: BigInt = s
        .parse()
        .map_err(|_| ParseRationalError::Malformed(s.to_string()))?;
    Ok(Rational::from_integer(n))
}

/// Convert to `f64` only when the conversion is exactly invertible.
///
/// Integer atom values below 2^53 and dyadic rationals pass; anything that
/// would round returns `None` so callers can refuse lossy sampling.
pub fn to_f64_lossless(r: &Rational) -> Option<f64> {
    let f = num_traits::ToPrimitive::to_f64(r)?;
    if !f.is_finite() {
        return None;
    }
    let back = Rational::from_float(f)?;
    if &back == r {
        Some(f)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_lowest_terms() {
        assert_eq!(format_rational(&rat(2, 4)), "1/2");
        assert_eq!(format_rational(&rat(-6, 3)), "-2");
        assert_eq!(format_rational(&rat(0, 5)), "0");
        assert_eq!(format_rational(&rat(7, -2)), "-7/2");
    }

    #[test]
    fn parses_fractions_integers_decimals() {
        assert_eq!(parse_rational("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rational("-10").unwrap(), rat_int(-10));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational(" 9/12 ").unwrap(), rat(3, 4));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse_rational(""), Err(ParseRationalError::Empty)));
        assert!(matches!(
            parse_rational("1/0"),
            Err(ParseRationalError::ZeroDenominator(_))
        ));
        assert!(parse_rational("a/b").is_err());
        assert!(parse_rational("1.2.3").is_err());
        assert!(parse_rational("1.").is_err());
    }

    #[test]
    fn roundtrips_canonical_strings() {
        for s in ["0", "1", "-3/7", "22/7", "123456789012345678901234567891/7"] {
            let r = parse_rational(s).unwrap();
            assert_eq!(format_rational(&r), *s);
        }
    }

    #[test]
    fn lossless_f64_detection() {
        assert_eq!(to_f64_lossless(&rat(1, 2)), Some(0.5));
        assert_eq!(to_f64_lossless(&rat_int(10)), Some(10.0));
        assert_eq!(to_f64_lossless(&rat(1, 3)), None);
        let huge = Rational::from_integer(BigInt::from(2u8).pow(90) + 1);
        assert_eq!(to_f64_lossless(&huge), None);
    }
}
