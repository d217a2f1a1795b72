//! Exact rational helpers shared by every module.

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational used for every exact probability.
pub type Rational = BigRational;

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Parses `"a/b"`, integers, and plain or scientific decimals (`"0.6"`, `"1e-3"`)
/// into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = s[i + 1..].parse().map_err(|_| bad())?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: BigInt = format!("{int_part}{frac_part}")
        .parse::<BigInt>()
        .map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        Rational::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(all, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Converts to `f64`, going through logarithms when the plain conversion
/// would underflow or overflow.
pub fn to_f64(r: &Rational) -> f64 {
    match r.to_f64() {
        Some(v) if v.is_finite() && (v != 0.0 || r.is_zero()) => v,
        _ => {
            if r.is_zero() {
                0.0
            } else {
                let sign = if r.is_negative() { -1.0 } else { 1.0 };
                sign * ln(&r.abs()).exp()
            }
        }
    }
}

fn ln_bigint(x: &BigInt) -> f64 {
    debug_assert_eq!(x.sign(), Sign::Plus);
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().unwrap_or(f64::INFINITY).ln()
    } else {
        let shift = bits - 64;
        let top: BigInt = x >> shift;
        top.to_f64().unwrap_or(f64::INFINITY).ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// Natural logarithm of a nonnegative rational; `-inf` at zero.
pub fn ln(r: &Rational) -> f64 {
    assert!(!r.is_negative(), "logarithm of a negative rational");
    if r.is_zero() {
        return f64::NEG_INFINITY;
    }
    if r.is_one() {
        return 0.0;
    }
    ln_bigint(r.numer()) - ln_bigint(r.denom())
}

/// Formats a rational as `"a/b"`, or `"a"` when integral.
pub fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Rounds to 15 significant digits.
pub fn round_sig15(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

/// Renders a float with 15 significant digits in positional notation.
pub fn fmt_sig15(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (14 - magnitude).clamp(0, 340) as usize;
    let s = format!("{:.*}", decimals, round_sig15(x));
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Exact binomial coefficient.
pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("4/5").unwrap(), ratio(4, 5));
        assert_eq!(parse_rational("0").unwrap(), int(0));
        assert_eq!(parse_rational("0.6").unwrap(), ratio(3, 5));
        assert_eq!(parse_rational("1.0").unwrap(), int(1));
        assert_eq!(parse_rational("-2.5e-1").unwrap(), ratio(-1, 4));
        assert_eq!(parse_rational("3e2").unwrap(), int(300));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn logarithms_of_extreme_rationals() {
        assert_eq!(ln(&int(0)), f64::NEG_INFINITY);
        assert!((ln(&ratio(19, 90)) - (19.0f64 / 90.0).ln()).abs() < 1e-15);
        let tiny = Rational::new(BigInt::one(), num_traits::pow(BigInt::from(10), 400));
        assert!((ln(&tiny) + 400.0 * 10f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn formatting() {
        assert_eq!(fmt_rational(&ratio(19, 90)), "19/90");
        assert_eq!(fmt_rational(&int(0)), "0");
        assert_eq!(fmt_sig15(19.0 / 90.0), "0.211111111111111");
        assert_eq!(fmt_sig15(0.25), "0.25");
        assert_eq!(fmt_sig15(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(16, 8), BigInt::from(12870));
        assert_eq!(binomial(3, 5), BigInt::zero());
    }
}
