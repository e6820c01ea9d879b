//! Exact rationals and their canonical text form.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

pub type Rational = BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    BigRational::new(numer.into(), denom.into())
}

pub fn int(value: i64) -> Rational {
    BigRational::from_integer(value.into())
}

pub fn indicator(cond: bool) -> Rational {
    if cond {
        Rational::one()
    } else {
        Rational::zero()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("`{input}` is not an exact rational: {reason}")]
pub struct ParseRationalError {
    pub input: String,
    pub reason: &'static str,
}

/// Parses `"a/b"`, a signed integer, or a terminating decimal such as
/// `"-0.125"`. The result is in lowest terms.
pub fn parse_rational(input: &str) -> Result<Rational, ParseRationalError> {
    let err = |reason| ParseRationalError {
        input: input.to_string(),
        reason,
    };
    let text = input.trim();
    if text.is_empty() {
        return Err(err("empty string"));
    }
    if let Some((numer, denom)) = text.split_once('/') {
        let numer = parse_integer(numer).ok_or_else(|| err("bad numerator"))?;
        let denom = parse_integer(denom).ok_or_else(|| err("bad denominator"))?;
        if denom.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(Rational::new(numer, denom));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        let (negative, whole) = match whole.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, whole.strip_prefix('+').unwrap_or(whole)),
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err("bad fractional part"));
        }
        if !whole.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err("bad integer part"));
        }
        let digits = format!("{whole}{frac}");
        let numer: BigInt = digits.parse().map_err(|_| err("bad digits"))?;
        let denom = num_traits::pow(BigInt::from(10u8), frac.len());
        let value = Rational::new(numer, denom);
        return Ok(if negative { -value } else { value });
    }
    parse_integer(text)
        .map(Rational::from_integer)
        .ok_or_else(|| err("not a number"))
}

fn parse_integer(text: &str) -> Option<BigInt> {
    let text = text.trim();
    let digits = text.strip_prefix(['-', '+']).unwrap_or(text);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    text.parse().ok()
}

/// Canonical lowest-terms rendering: `"2/3"`, `"-1/4"`, `"5"`.
pub fn format_rational(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_integers_and_decimals() {
        assert_eq!(parse_rational("2/6").unwrap(), rat(1, 3));
        assert_eq!(parse_rational("-3").unwrap(), int(-3));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
        assert_eq!(parse_rational(" 4/-8 ").unwrap(), rat(-1, 2));
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in ["", "1/0", "a/2", "1.", "1.2.3", "--1", "1e3", "0x10"] {
            assert!(parse_rational(bad).is_err(), "{bad:?} should fail");
        }
    }

    #[test]
    fn renders_lowest_terms() {
        assert_eq!(format_rational(&rat(4, 6)), "2/3");
        assert_eq!(format_rational(&rat(-2, 8)), "-1/4");
        assert_eq!(format_rational(&int(7)), "7");
        assert_eq!(format_rational(&int(0)), "0");
    }
}
