use std::fmt;
use std::str::FromStr;

use rug::ops::Pow;
use rug::{Integer, Rational};

use super::enclosure::Enclosure;
use crate::error::{Error, Result};

/// A real number that is either known exactly as a rational or only through
/// a certified enclosure.
#[derive(Clone, Debug)]
pub enum ExactReal {
    Rational(Rational),
    Approx(Enclosure),
}

impl ExactReal {
    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Self::Rational(q) => Some(q),
            Self::Approx(_) => None,
        }
    }

    /// Enclosure at `prec` bits. Rationals convert with one outward rounding;
    /// approximations are returned as stored.
    pub fn to_enclosure(&self, prec: u32) -> Enclosure {
        match self {
            Self::Rational(q) => Enclosure::from_rational(q, prec),
            Self::Approx(e) => e.clone(),
        }
    }

    pub fn mul(&self, other: &Self, prec: u32) -> Self {
        match (self, other) {
            (Self::Rational(a), Self::Rational(b)) => Self::Rational(Rational::from(a * b)),
            _ => Self::Approx(self.to_enclosure(prec).mul(&other.to_enclosure(prec))),
        }
    }
}

/// The exponent `r` of `sigma_{-r}`, held as an exact rational together with
/// the text it was parsed from.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Exponent {
    value: Rational,
    text: String,
}

impl Exponent {
    pub fn from_rational(value: Rational) -> Self {
        let text = format_decimal(&value);
        Self { value, text }
    }

    pub fn value(&self) -> &Rational {
        &self.value
    }

    /// The string the exponent was parsed from (or its canonical rendering).
    pub fn text(&self) -> &str {
        &self.text
    }

    /// `Some(k)` when `r` is a positive integer that fits in `u32`.
    pub fn as_integer(&self) -> Option<u32> {
        if *self.value.denom() == 1 && self.value > 0 {
            self.value.numer().to_u32()
        } else {
            None
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }

    pub fn enclose(&self, prec: u32) -> Enclosure {
        Enclosure::from_rational(&self.value, prec)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let value = parse_rational(s)?;
        Ok(Self {
            value,
            text: s.trim().to_owned(),
        })
    }
}

/// Parses `"2"`, `"-1.25"`, `"3.5"` or `"7/2"` exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a decimal or fraction: {s:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: Integer = num.trim().parse().map_err(|_| bad())?;
        let den: Integer = den.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        return Ok(Rational::from((num, den)));
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    let digits_ok = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
    if (int_part.is_empty() && frac_part.is_empty())
        || !digits_ok(int_part)
        || !digits_ok(frac_part)
    {
        return Err(bad());
    }
    let mut num: Integer = format!("{int_part}{frac_part}")
        .trim_start_matches('0')
        .parse()
        .unwrap_or_default();
    if negative {
        num = -num;
    }
    let den = Integer::from(10).pow(frac_part.len() as u32);
    Ok(Rational::from((num, den)))
}

/// Exact decimal when the denominator is of the form `2^a 5^b`, `"p/q"` otherwise.
pub fn format_decimal(q: &Rational) -> String {
    let mut den = q.denom().clone();
    let mut twos = 0u32;
    let mut fives = 0u32;
    while den.is_divisible_u(2) {
        den /= 2;
        twos += 1;
    }
    while den.is_divisible_u(5) {
        den /= 5;
        fives += 1;
    }
    if den != 1 {
        return format!("{}/{}", q.numer(), q.denom());
    }
    let places = twos.max(fives);
    if places == 0 {
        return q.numer().to_string();
    }
    let scaled = (q.numer() * Integer::from(10).pow(places)) / q.denom();
    let negative = scaled < 0;
    let digits = Integer::from(scaled.abs_ref()).to_string();
    let digits = format!("{digits:0>width$}", width = places as usize + 1);
    let (int_part, frac_part) = digits.split_at(digits.len() - places as usize);
    format!("{}{int_part}.{frac_part}", if negative { "-" } else { "" })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_and_fractions() {
        assert_eq!(parse_rational("2").unwrap(), 2);
        assert_eq!(parse_rational("3.5").unwrap(), Rational::from((7, 2)));
        assert_eq!(
            parse_rational("1.8877909").unwrap(),
            Rational::from((18877909, 10000000))
        );
        assert_eq!(parse_rational("7/2").unwrap(), Rational::from((7, 2)));
        assert_eq!(parse_rational("-0.25").unwrap(), Rational::from((-1, 4)));
        assert_eq!(parse_rational(".5").unwrap(), Rational::from((1, 2)));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("1e3").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn decimal_formatting() {
        assert_eq!(format_decimal(&Rational::from((7, 2))), "3.5");
        assert_eq!(format_decimal(&Rational::from(2)), "2");
        assert_eq!(format_decimal(&Rational::from((1, 3))), "1/3");
        assert_eq!(format_decimal(&Rational::from((201, 100))), "2.01");
        assert_eq!(format_decimal(&Rational::from((1, 40))), "0.025");
        assert_eq!(format_decimal(&Rational::from((-3, 4))), "-0.75");
    }

    #[test]
    fn integer_detection() {
        assert_eq!("2".parse::<Exponent>().unwrap().as_integer(), Some(2));
        assert_eq!("2.0".parse::<Exponent>().unwrap().as_integer(), Some(2));
        assert_eq!("2.5".parse::<Exponent>().unwrap().as_integer(), None);
    }
}
