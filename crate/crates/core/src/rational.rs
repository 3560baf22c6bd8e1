//! Exact rational scalar used for every geometric quantity: box corners,
//! lattice scales, grid points. Values in `Q` never round, so measure
//! bookkeeping (volumes, overlaps, lattice indices) is exact and the
//! floating side only sees one rounding at the very end.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Exact rational with the same value as a finite float.
pub fn rat_from_f64(x: f64) -> Result<Rat> {
    Rat::from_float(x).ok_or_else(|| Error::Parse(format!("not a finite number: {x}")))
}

/// Parses "7", "-3/4", "0.125" (and "1.5e-2" style exponents).
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let num: BigInt = n
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let den: BigInt = d
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rat::new(num, den));
    }
    if let Ok(num) = s.parse::<BigInt>() {
        return Ok(Rat::from_integer(num));
    }
    let x: f64 = s
        .parse()
        .map_err(|_| Error::Parse(format!("not a rational: {s:?}")))?;
    // Decimal literals are re-read digit by digit so "0.1" means 1/10, not
    // the binary float nearest to it.
    if let Some((mant, exp)) = split_decimal(s) {
        return Ok(mant * pow10(exp));
    }
    rat_from_f64(x)
}

fn split_decimal(s: &str) -> Option<(Rat, i64)> {
    let (body, exp) = match s.split_once(['e', 'E']) {
        Some((b, e)) => (b, e.parse::<i64>().ok()?),
        None => (s, 0),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if frac_part.chars().any(|c| !c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mant: BigInt = digits.parse().ok()?;
    Some((
        Rat::from_integer(mant),
        exp - frac_part.len() as i64,
    ))
}

fn pow10(e: i64) -> Rat {
    let ten = BigInt::from(10);
    let p = ten.pow(e.unsigned_abs() as u32);
    if e >= 0 {
        Rat::from_integer(p)
    } else {
        Rat::new(BigInt::one(), p)
    }
}

pub fn rat_floor_i64(r: &Rat) -> i64 {
    r.floor()
        .to_integer()
        .to_i64()
        .expect("lattice index fits in i64")
}

pub fn rat_ceil(r: &Rat) -> Rat {
    Rat::from_integer(r.ceil().to_integer())
}

pub fn is_integer_multiple(value: &Rat, unit: &Rat) -> bool {
    (value / unit).is_integer()
}

/// Least common denominator of a set of rationals (all in reduced form).
pub fn common_denominator<'a, I: IntoIterator<Item = &'a Rat>>(it: I) -> BigInt {
    let mut lcm = BigInt::one();
    for r in it {
        lcm = lcm.lcm(r.denom());
    }
    lcm
}

/// Exact integer power with negative exponents allowed.
pub fn rat_pow_i(base: &Rat, e: i64) -> Rat {
    if e >= 0 {
        base.pow(e as i32)
    } else {
        base.pow(-e as i32).recip()
    }
}

pub fn require_positive(r: &Rat) -> Result<()> {
    if r.is_positive() {
        Ok(())
    } else {
        Err(Error::NonPositiveScale(r.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_integer_and_decimal_forms() {
        assert_eq!(parse_rat("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rat("-7").unwrap(), rat_int(-7));
        assert_eq!(parse_rat("0.1").unwrap(), rat(1, 10));
        assert_eq!(parse_rat("2.5e-1").unwrap(), rat(1, 4));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("abc").is_err());
    }

    #[test]
    fn common_denominator_is_lcm_of_reduced_denoms() {
        let xs = [rat(1, 6), rat(3, 4), rat_int(2)];
        assert_eq!(common_denominator(xs.iter()), BigInt::from(12));
    }

    #[test]
    fn integer_powers_are_exact_both_ways() {
        assert_eq!(rat_pow_i(&rat(2, 3), 2), rat(4, 9));
        assert_eq!(rat_pow_i(&rat(2, 3), -2), rat(9, 4));
        assert_eq!(rat_pow_i(&rat(5, 1), 0), rat_int(1));
    }

    #[test]
    fn floor_and_multiple_checks() {
        assert_eq!(rat_floor_i64(&rat(-7, 2)), -4);
        assert!(is_integer_multiple(&rat(3, 2), &rat(1, 2)));
        assert!(!is_integer_multiple(&rat(3, 2), &rat(1, 3)));
    }
}
