//! Exact rational values shared across ingestion, the equation engine, and scoring.
//!
//! Answer values and equation literals are kept as arbitrary-precision
//! rationals from the moment they are parsed, so downstream tolerance
//! comparisons measure model error rather than rounding introduced here.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// Build a rational from an integer numerator/denominator pair.
///
/// # Panics
///
/// Panics if `denom` is zero.
pub fn ratio(numer: i64, denom: i64) -> Rational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    BigRational::from_integer(BigInt::from(value))
}

/// Parse a numeric string into an exact rational.
///
/// Accepted forms: integers (`26`, `-9`), decimals (`7.50`, `.5`),
/// fractions (`3/5`, `-15/2`), and scientific notation (`1e-5`, `2.5e3`).
/// Parsing is exact: `"7.5"` becomes 15/2, never a float.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((numer, denom)) = s.split_once('/') {
        let n = parse_simple(numer)?;
        let d = parse_simple(denom)?;
        if d.is_zero() {
            return None;
        }
        return Some(n / d);
    }
    parse_simple(s)
}

/// Integer, decimal, or scientific form; no fraction slash.
fn parse_simple(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = s[pos + 1..].parse().ok()?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => match mantissa.strip_prefix('+') {
            Some(rest) => (1, rest),
            None => (1, mantissa),
        },
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let joined = format!("{int_part}{frac_part}");
    let numer: BigInt = joined.parse().ok()?;
    let mut value = BigRational::new(numer, pow10(frac_part.len() as i32));
    if exponent != 0 {
        let scale = BigRational::new(pow10(exponent.max(0)), pow10((-exponent).max(0)));
        value *= scale;
    }
    if sign < 0 {
        value = -value;
    }
    Some(value)
}

fn pow10(exp: i32) -> BigInt {
    let mut out = BigInt::one();
    for _ in 0..exp {
        out *= 10;
    }
    out
}

/// Render a rational in the canonical file syntax.
///
/// Integers print bare (`17`), values with a terminating decimal expansion
/// print as decimals (`7.5`), everything else prints as a fraction (`1/3`).
/// Every output re-parses to the identical rational.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        return r.numer().to_string();
    }
    if let Some(digits) = decimal_digits(r) {
        return digits;
    }
    format!("{}/{}", r.numer(), r.denom())
}

/// Terminating decimal expansion, if one exists (denominator 2^a * 5^b).
fn decimal_digits(r: &Rational) -> Option<String> {
    let mut denom = r.denom().clone();
    let mut twos = 0u32;
    let mut fives = 0u32;
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while (&denom % &two).is_zero() {
        denom /= &two;
        twos += 1;
    }
    while (&denom % &five).is_zero() {
        denom /= &five;
        fives += 1;
    }
    if !denom.is_one() {
        return None;
    }
    let places = twos.max(fives);
    let scaled = r * BigRational::from_integer(pow10(places as i32));
    debug_assert!(scaled.denom().is_one());
    let digits = scaled.numer().abs().to_string();
    let sign = if r.is_negative() { "-" } else { "" };
    let digits = if digits.len() <= places as usize {
        format!("{}{}", "0".repeat(places as usize - digits.len() + 1), digits)
    } else {
        digits
    };
    let split = digits.len() - places as usize;
    Some(format!("{sign}{}.{}", &digits[..split], &digits[split..]))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_integers_and_decimals() {
        assert_eq!(parse_rational("26").unwrap(), int(26));
        assert_eq!(parse_rational("7.50").unwrap(), ratio(15, 2));
        assert_eq!(parse_rational("-9").unwrap(), int(-9));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("0.1").unwrap(), ratio(1, 10));
    }

    #[test]
    fn parses_fractions_and_scientific() {
        assert_eq!(parse_rational("3/5").unwrap(), ratio(3, 5));
        assert_eq!(parse_rational("-15/2").unwrap(), ratio(-15, 2));
        assert_eq!(parse_rational("1e-5").unwrap(), ratio(1, 100_000));
        assert_eq!(parse_rational("2.5e3").unwrap(), int(2500));
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("abc").is_none());
        assert!(parse_rational("").is_none());
        assert!(parse_rational(".").is_none());
    }

    #[test]
    fn formats_round_trip() {
        for text in ["17", "7.5", "-3.25", "1/3", "-22/7", "0.001", "100"] {
            let value = parse_rational(text).unwrap();
            let printed = format_rational(&value);
            assert_eq!(parse_rational(&printed).unwrap(), value, "{text} -> {printed}");
        }
        assert_eq!(format_rational(&ratio(15, 2)), "7.5");
        assert_eq!(format_rational(&int(17)), "17");
        assert_eq!(format_rational(&ratio(1, 3)), "1/3");
        assert_eq!(format_rational(&ratio(-1, 2)), "-0.5");
        assert_eq!(format_rational(&ratio(1, 1000)), "0.001");
    }
}
