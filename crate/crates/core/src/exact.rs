//! Exact rational helpers: decimal parsing, directed conversion to `f64`,
//! and the `"num/den"` text form used in certificates.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact value of a finite double.
pub fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

/// Parses a decimal literal such as `0.785`, `-1.5e-3` or `7` exactly.
pub fn parse_decimal(s: &str) -> Result<BigRational> {
    let bad = || Error::Config(format!("not a decimal number: {s:?}"));
    let t = s.trim();
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let n: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let mut r = if scale >= 0 {
        BigRational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(n, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

/// Smallest double `>= r`.
pub fn f64_at_least(r: &BigRational) -> f64 {
    let mut x = r.to_f64().unwrap_or(if r.is_negative() { f64::MIN } else { f64::MAX });
    while &rational(x) < r {
        x = x.next_up();
    }
    while &rational(x.next_down()) >= r {
        x = x.next_down();
    }
    x
}

/// Largest double `<= r`.
pub fn f64_at_most(r: &BigRational) -> f64 {
    let mut x = r.to_f64().unwrap_or(if r.is_negative() { f64::MIN } else { f64::MAX });
    while &rational(x) > r {
        x = x.next_down();
    }
    while &rational(x.next_up()) <= r {
        x = x.next_up();
    }
    x
}

/// `"num/den"` in lowest terms (`"n/1"` for integers).
pub fn to_fraction_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Terminating decimal expansion of `r`, if it has at most `max_digits`
/// fractional digits.
pub fn to_decimal_string(r: &BigRational, max_digits: usize) -> Option<String> {
    let ten = BigInt::from(10u32);
    let mut scaled = r.abs();
    for digits in 0..=max_digits {
        if scaled.is_integer() {
            let n = scaled.to_integer().to_string();
            let n = format!("{n:0>width$}", width = digits + 1);
            let (int, frac) = n.split_at(n.len() - digits);
            let sign = if r.is_negative() { "-" } else { "" };
            return Some(if digits == 0 { format!("{sign}{int}") } else { format!("{sign}{int}.{frac}") });
        }
        scaled *= &ten;
    }
    None
}

pub fn parse_fraction_string(s: &str) -> Result<BigRational> {
    let bad = || Error::Certificate(format!("not a fraction: {s:?}"));
    let (n, d) = s.split_once('/').ok_or_else(bad)?;
    let n: BigInt = n.trim().parse().map_err(|_| bad())?;
    let d: BigInt = d.trim().parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

/// Exact rational of a double in fraction form.
pub fn f64_fraction_string(x: f64) -> String {
    to_fraction_string(&rational(x))
}

pub fn is_probability(r: &BigRational) -> bool {
    !r.is_negative() && r <= &BigRational::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_strings() {
        for s in ["0.9579", "0.0001", "12", "-0.5", "1.25"] {
            assert_eq!(to_decimal_string(&parse_decimal(s).unwrap(), 10).as_deref(), Some(s));
        }
        assert_eq!(to_decimal_string(&BigRational::new(1.into(), 3.into()), 30), None);
    }
    use proptest::prelude::*;

    #[test]
    fn decimals_parse_exactly() {
        assert_eq!(parse_decimal("0.785").unwrap(), BigRational::new(785.into(), 1000.into()));
        assert_eq!(parse_decimal("1e-4").unwrap(), BigRational::new(1.into(), 10000.into()));
        assert_eq!(parse_decimal("-2.5").unwrap(), BigRational::new((-5).into(), 2.into()));
        assert_eq!(parse_decimal(".5").unwrap(), BigRational::new(1.into(), 2.into()));
        assert!(parse_decimal("abc").is_err());
        assert!(parse_decimal("").is_err());
        assert!(parse_decimal("1.2.3").is_err());
    }

    #[test]
    fn directed_conversion_brackets_decimals() {
        for s in ["0.785", "0.859", "0.9579", "0.1", "0.5"] {
            let r = parse_decimal(s).unwrap();
            let (lo, hi) = (f64_at_most(&r), f64_at_least(&r));
            assert!(rational(lo) <= r && r <= rational(hi));
            if rational(lo) == r {
                assert_eq!(lo, hi);
            } else {
                assert_eq!(lo.next_up(), hi);
            }
        }
    }

    #[test]
    fn fraction_round_trip() {
        let r = rational(0.1);
        assert_eq!(parse_fraction_string(&to_fraction_string(&r)).unwrap(), r);
        assert_eq!(f64_fraction_string(0.25), "1/4");
        assert!(parse_fraction_string("1/0").is_err());
    }

    proptest! {
        #[test]
        fn doubles_round_trip_through_decimal(x in 0.0f64..1.0) {
            let r = parse_decimal(&format!("{x:e}")).unwrap();
            // the shortest representation rounds back to x
            prop_assert!(f64_at_most(&r) == x || f64_at_least(&r) == x);
            prop_assert!(rational(f64_at_most(&r)) <= r);
            prop_assert!(rational(f64_at_least(&r)) >= r);
        }
    }
}
