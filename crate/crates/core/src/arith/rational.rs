use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ArithError;

/// Arbitrary-precision reduced fraction with a positive denominator.
pub type Rational = BigRational;

/// Parses `"8.5"`, `"-42.25"`, `"17"` or `"-3/7"` exactly.
pub fn parse_rational(text: &str) -> Result<Rational, ArithError> {
    let s = text.trim();
    let err = || ArithError::Parse(text.to_string());
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| err())?;
        let den: BigInt = den.trim().parse().map_err(|_| err())?;
        if den.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(num, den));
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    let all_digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
    if !all_digits(int_part) || !all_digits(frac_part) {
        return Err(err());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| err())?
    };
    if negative {
        num = -num;
    }
    let den = num_traits::pow(BigInt::from(10u32), frac_part.len());
    Ok(Rational::new(num, den))
}

/// Like [`parse_rational`] but also accepts exponent notation (`"1e3"`,
/// `"2.5E-2"`), as produced by spreadsheets.
pub fn rational_from_f64_str(text: &str) -> Result<Rational, ArithError> {
    let s = text.trim();
    match s.find(['e', 'E']) {
        None => parse_rational(s),
        Some(pos) => {
            let mantissa = parse_rational(&s[..pos])?;
            let exp: i32 = s[pos + 1..]
                .parse()
                .map_err(|_| ArithError::Parse(text.to_string()))?;
            let scale = Rational::from_integer(num_traits::pow(
                BigInt::from(10u32),
                exp.unsigned_abs() as usize,
            ));
            Ok(if exp < 0 {
                mantissa / scale
            } else {
                mantissa * scale
            })
        }
    }
}

fn only_two_and_five(den: &BigInt) -> Option<(usize, usize)> {
    let mut d = den.clone();
    let two = BigInt::from(2u32);
    let five = BigInt::from(5u32);
    let (mut twos, mut fives) = (0usize, 0usize);
    while d.is_even() && !d.is_zero() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    d.is_one().then_some((twos, fives))
}

/// Exact text form: a plain decimal when the value terminates in base ten,
/// otherwise `num/den`.
pub fn format_rational(value: &Rational) -> String {
    if value.is_integer() {
        return value.numer().to_string();
    }
    let Some((twos, fives)) = only_two_and_five(value.denom()) else {
        return format!("{}/{}", value.numer(), value.denom());
    };
    let places = twos.max(fives);
    let scale = num_traits::pow(BigInt::from(10u32), places);
    let scaled = (value.numer() * &scale) / value.denom();
    let negative = scaled.is_negative();
    let digits = scaled.abs().to_string();
    let padded = format!("{digits:0>width$}", width = places + 1);
    let (int_part, frac_part) = padded.split_at(padded.len() - places);
    let sign = if negative { "-" } else { "" };
    format!("{sign}{int_part}.{frac_part}")
}

/// Rounds half away from zero to the nearest integer.
pub fn round_to_integer(value: &Rational) -> BigInt {
    value.round().to_integer()
}

/// Rounds half away from zero to `decimals` places, exactly.
pub fn round_to_decimals(value: &Rational, decimals: u32) -> Rational {
    let scale = num_traits::pow(BigInt::from(10u32), decimals as usize);
    let scaled = value * Rational::from_integer(scale.clone());
    Rational::new(round_to_integer(&scaled), scale)
}

/// Lossy conversion for display and tolerance checks.
pub fn to_f64(value: &Rational) -> f64 {
    // Split off the integer part so huge numerators and denominators with
    // a modest quotient still convert accurately.
    let (int, rem) = value.numer().div_rem(value.denom());
    let int_f = int.to_f64().unwrap_or(f64::NAN);
    if rem.is_zero() {
        return int_f;
    }
    let bits = value.denom().bits().saturating_sub(60);
    let den = value.denom() >> bits;
    let rem = rem >> bits;
    int_f + rem.to_f64().unwrap_or(0.0) / den.to_f64().unwrap_or(f64::INFINITY)
}

/// Serde adapter storing a [`Rational`] as its exact text form.
pub mod serde_rational {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Vec<Rational>` as an array of exact strings.
pub mod serde_rational_vec {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(values: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(values.iter().map(format_rational))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let texts = Vec::<String>::deserialize(d)?;
        texts
            .iter()
            .map(|t| parse_rational(t).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Serde adapter for `Vec<Vec<Rational>>` as nested arrays of exact strings.
pub mod serde_rational_rows {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(rows: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(
            rows.iter()
                .map(|r| r.iter().map(format_rational).collect::<Vec<_>>()),
        )
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Rational>>, D::Error> {
        let rows = Vec::<Vec<String>>::deserialize(d)?;
        rows.iter()
            .map(|r| {
                r.iter()
                    .map(|t| parse_rational(t).map_err(serde::de::Error::custom))
                    .collect()
            })
            .collect()
    }
}

/// Serde adapter for `Vec<BigInt>` as an array of decimal strings.
pub mod serde_bigint_vec {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(values: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(values.iter().map(|v| v.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let texts = Vec::<String>::deserialize(d)?;
        texts
            .iter()
            .map(|t| t.trim().parse().map_err(serde::de::Error::custom))
            .collect()
    }
}
