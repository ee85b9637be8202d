//! Scalars of the max-plus semiring.
//!
//! A [`MaxPlusScalar`] is either an exact rational or the bottom element
//! `-inf`, which is neutral for ⊕ (max) and absorbing for ⊗ (+). Bottom is a
//! separate variant, so no arithmetic can silently run on an infinity.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational used for every finite time quantity.
pub type Rational = BigRational;

/// Canonical token for the bottom element.
pub const BOTTOM_TOKEN: &str = "-inf";

/// Element of `R ∪ {-inf}` with exact rational finite values.
///
/// The derived ordering places `Bottom` below every finite value, which is
/// exactly the order ⊕ takes the maximum over.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum MaxPlusScalar {
    #[default]
    Bottom,
    Finite(Rational),
}

impl MaxPlusScalar {
    /// The ⊕-identity, `-inf`.
    pub fn bottom() -> Self {
        MaxPlusScalar::Bottom
    }

    /// The ⊗-identity, `0`.
    pub fn unit() -> Self {
        MaxPlusScalar::Finite(Rational::zero())
    }

    pub fn finite(q: Rational) -> Self {
        MaxPlusScalar::Finite(q)
    }

    pub fn from_int(v: i64) -> Self {
        MaxPlusScalar::Finite(Rational::from_integer(BigInt::from(v)))
    }

    /// `num/den` in lowest terms. Panics if `den == 0`.
    pub fn from_ratio(num: i64, den: i64) -> Self {
        MaxPlusScalar::Finite(Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, MaxPlusScalar::Bottom)
    }

    pub fn is_finite(&self) -> bool {
        !self.is_bottom()
    }

    pub fn as_finite(&self) -> Option<&Rational> {
        match self {
            MaxPlusScalar::Finite(q) => Some(q),
            MaxPlusScalar::Bottom => None,
        }
    }

    pub fn into_finite(self) -> Option<Rational> {
        match self {
            MaxPlusScalar::Finite(q) => Some(q),
            MaxPlusScalar::Bottom => None,
        }
    }

    /// a ⊕ b = max(a, b).
    pub fn oplus(&self, other: &Self) -> Self {
        if self >= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    /// a ⊗ b = a + b, with bottom absorbing.
    pub fn otimes(&self, other: &Self) -> Self {
        match (self, other) {
            (MaxPlusScalar::Finite(a), MaxPlusScalar::Finite(b)) => MaxPlusScalar::Finite(a + b),
            _ => MaxPlusScalar::Bottom,
        }
    }

    /// k-th ⊗-power, i.e. `k × a`. `a^0` is the unit.
    pub fn pow(&self, k: u64) -> Self {
        match self {
            MaxPlusScalar::Finite(a) => {
                MaxPlusScalar::Finite(a * Rational::from_integer(BigInt::from(k)))
            }
            MaxPlusScalar::Bottom if k == 0 => MaxPlusScalar::unit(),
            MaxPlusScalar::Bottom => MaxPlusScalar::Bottom,
        }
    }

    /// Ordinary division of a finite value by a positive integer (used for
    /// cycle means). Bottom stays bottom.
    pub fn div_int(&self, k: u64) -> Self {
        match self {
            MaxPlusScalar::Finite(a) => {
                MaxPlusScalar::Finite(a / Rational::from_integer(BigInt::from(k)))
            }
            MaxPlusScalar::Bottom => MaxPlusScalar::Bottom,
        }
    }

    /// Decimal rendering with `digits` fractional digits; bottom renders as `-inf`.
    pub fn to_decimal(&self, digits: usize) -> String {
        match self {
            MaxPlusScalar::Finite(q) => format_decimal(q, digits),
            MaxPlusScalar::Bottom => BOTTOM_TOKEN.to_string(),
        }
    }
}

impl From<Rational> for MaxPlusScalar {
    fn from(q: Rational) -> Self {
        MaxPlusScalar::Finite(q)
    }
}

impl From<i64> for MaxPlusScalar {
    fn from(v: i64) -> Self {
        MaxPlusScalar::from_int(v)
    }
}

impl fmt::Display for MaxPlusScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaxPlusScalar::Finite(q) => f.write_str(&format_rational(q)),
            MaxPlusScalar::Bottom => f.write_str(BOTTOM_TOKEN),
        }
    }
}

impl FromStr for MaxPlusScalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == BOTTOM_TOKEN {
            return Ok(MaxPlusScalar::Bottom);
        }
        parse_rational(s).map(MaxPlusScalar::Finite)
    }
}

/// Canonical text of a rational: `3`, `-7/3` (lowest terms, positive denominator).
pub fn format_rational(q: &Rational) -> String {
    // Ratio keeps itself reduced with a positive denominator.
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Round-half-away-from-zero decimal rendering of an exact rational.
pub fn format_decimal(q: &Rational, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10u32), digits);
    let scaled = q * Rational::from_integer(scale.clone());
    let abs = scaled.abs();
    let (whole, rem) = abs.numer().div_rem(abs.denom());
    let twice = rem * 2u32;
    let rounded = if twice >= *abs.denom() {
        whole + 1u32
    } else {
        whole
    };
    let negative = q.is_negative() && !rounded.is_zero();
    let (int_part, frac_part) = rounded.div_rem(&scale);
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    out.push_str(&int_part.to_string());
    if digits > 0 {
        let frac = frac_part.to_string();
        out.push('.');
        out.push_str(&"0".repeat(digits - frac.len()));
        out.push_str(&frac);
    }
    out
}

/// Parses `3`, `-7/3`, `2.5`, `+0.125` into an exact rational.
///
/// Decimal input converts exactly (`2.5` → `5/2`). Exponent notation is not
/// accepted.
pub fn parse_rational(s: &str) -> Result<Rational> {
    parse_rational_at(s, 1, 1)
}

pub(crate) fn parse_rational_at(s: &str, line: usize, column: usize) -> Result<Rational> {
    let err = |msg: &str| Error::parse(line, column, format!("{msg} in `{s}`"));
    if s.is_empty() {
        return Err(err("empty number"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_integer(num).ok_or_else(|| err("invalid numerator"))?;
        let den = parse_unsigned(den).ok_or_else(|| err("invalid denominator"))?;
        if den.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(Rational::new(num, den));
    }
    let (negative, body) = match s.as_bytes()[0] {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (int_digits, frac_digits) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_digits.is_empty() && frac_digits.is_empty() {
        return Err(err("missing digits"));
    }
    let all_digits = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
    if !all_digits(int_digits) || !all_digits(frac_digits) {
        return Err(err("invalid digit"));
    }
    let mantissa: BigInt = format!("{int_digits}{frac_digits}")
        .parse()
        .map_err(|_| err("invalid number"))?;
    let denom = num_traits::pow(BigInt::from(10u32), frac_digits.len());
    let q = Rational::new(mantissa, denom);
    Ok(if negative { -q } else { q })
}

fn parse_integer(s: &str) -> Option<BigInt> {
    let body = s.strip_prefix(['-', '+']).unwrap_or(s);
    if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

fn parse_unsigned(s: &str) -> Option<BigInt> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Shorthand for building an exact rational `num/den` in code and tests.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Shorthand for an integer-valued rational.
pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}
