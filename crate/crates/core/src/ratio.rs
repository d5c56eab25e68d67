//! Exact rational helpers shared by the topology parser, the objective and
//! the report writer.

use std::fmt;

use num_integer::Integer;
use num_traits::Zero;

pub type Rational = num_rational::Ratio<i64>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid decimal `{0}`")]
pub struct DecimalError(pub String);

/// Parses a plain decimal string (`3`, `0.25`, `-1.5`, `.5`) into an exact rational.
pub fn parse_decimal(text: &str) -> Result<Rational, DecimalError> {
    let err = || DecimalError(text.to_string());
    let s = text.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit())
        || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(err());
    }
    let mut numer: i64 = 0;
    let mut denom: i64 = 1;
    for b in int_part.bytes().chain(frac_part.bytes()) {
        numer = numer
            .checked_mul(10)
            .and_then(|n| n.checked_add(i64::from(b - b'0')))
            .ok_or_else(err)?;
    }
    for _ in 0..frac_part.len() {
        denom = denom.checked_mul(10).ok_or_else(err)?;
    }
    if neg {
        numer = -numer;
    }
    Ok(Rational::new(numer, denom))
}

/// Parses a factor written either as a decimal or as an exact fraction `p/q`.
pub fn parse_factor(text: &str) -> Result<Rational, DecimalError> {
    match text.trim().split_once('/') {
        Some((p, q)) => {
            let p: i64 = p
                .trim()
                .parse()
                .map_err(|_| DecimalError(text.to_string()))?;
            let q: i64 = q
                .trim()
                .parse()
                .map_err(|_| DecimalError(text.to_string()))?;
            if q == 0 {
                return Err(DecimalError(text.to_string()));
            }
            Ok(Rational::new(p, q))
        }
        None => parse_decimal(text),
    }
}

/// Renders a rational as a terminating decimal when one exists, else as `p/q`.
/// The output always parses back to the same value with [`parse_factor`].
pub fn format_factor(r: &Rational) -> String {
    let mut d = *r.denom();
    let (mut twos, mut fives) = (0u32, 0u32);
    while d % 2 == 0 {
        d /= 2;
        twos += 1;
    }
    while d % 5 == 0 {
        d /= 5;
        fives += 1;
    }
    if d != 1 {
        return format_rational(r);
    }
    let digits = twos.max(fives);
    if digits == 0 {
        return r.numer().to_string();
    }
    let Some(scale) = 10i64.checked_pow(digits) else {
        return format_rational(r);
    };
    let Some(scaled) = r.numer().checked_mul(scale / *r.denom()) else {
        return format_rational(r);
    };
    let sign = if scaled < 0 { "-" } else { "" };
    let abs = scaled.unsigned_abs();
    let int = abs / scale as u64;
    let frac = abs % scale as u64;
    format!("{sign}{int}.{frac:0width$}", width = digits as usize)
}

/// Renders a rational as `p` or `p/q`.
pub fn format_rational(r: &Rational) -> String {
    DisplayRational(r).to_string()
}

pub struct DisplayRational<'a>(pub &'a Rational);

impl fmt::Display for DisplayRational<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.0;
        if *r.denom() == 1 {
            write!(f, "{}", r.numer())
        } else {
            write!(f, "{}/{}", r.numer(), r.denom())
        }
    }
}

/// Least common multiple with overflow detection.
pub(crate) fn checked_lcm(a: i64, b: i64) -> Option<i64> {
    if a.is_zero() || b.is_zero() {
        return Some(0);
    }
    (a / a.gcd(&b)).checked_mul(b).map(i64::abs)
}
