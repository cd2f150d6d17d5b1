//! Exact rational scalars and small integer helpers shared across the crate.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};

use crate::error::{Error, Result};

/// Exact rational coefficient type used throughout.
pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Render a rational as `p` or `p/q` (reduced, q > 0).
pub fn rat_to_string(x: &Rat) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parse `p` or `p/q` with optional sign.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let mk_err = || Error::Parse(format!("invalid rational '{s}'"));
    match s.split_once('/') {
        None => {
            let n: BigInt = s.parse().map_err(|_| mk_err())?;
            Ok(Rat::from_integer(n))
        }
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| mk_err())?;
            let q: BigInt = q.trim().parse().map_err(|_| mk_err())?;
            if q.is_zero() {
                return Err(mk_err());
            }
            Ok(Rat::new(p, q))
        }
    }
}

pub fn rat_to_f64(x: &Rat) -> f64 {
    num::ToPrimitive::to_f64(x).expect("rational out of f64 range")
}

/// Exact floor of a rational.
pub fn rat_floor(x: &Rat) -> BigInt {
    x.floor().to_integer()
}

pub fn gcd_i64(a: i64, b: i64) -> i64 {
    num::integer::gcd(a, b)
}

pub fn lcm_i64(a: i64, b: i64) -> i64 {
    num::integer::lcm(a, b)
}

/// Floor division for i64 (rounds toward negative infinity).
pub fn div_floor_i64(a: i64, b: i64) -> i64 {
    num::integer::Integer::div_floor(&a, &b)
}

/// Ceiling division for i64.
pub fn div_ceil_i64(a: i64, b: i64) -> i64 {
    num::integer::Integer::div_ceil(&a, &b)
}

/// Integer square root of a nonnegative i128: the largest k with k*k <= n.
pub fn isqrt_i128(n: i128) -> i128 {
    assert!(n >= 0, "isqrt of negative value");
    if n == 0 {
        return 0;
    }
    let mut k = (n as f64).sqrt() as i128;
    while k > 0 && k * k > n {
        k -= 1;
    }
    while (k + 1) * (k + 1) <= n {
        k += 1;
    }
    k
}

/// Denominator of `x` as i64, or an error if it does not fit.
pub fn denom_i64(x: &Rat) -> Result<i64> {
    num::ToPrimitive::to_i64(x.denom())
        .ok_or_else(|| Error::Parse(format!("denominator of {x} too large")))
}

/// Numerator of `x` as i64, or an error if it does not fit.
pub fn numer_i64(x: &Rat) -> Result<i64> {
    num::ToPrimitive::to_i64(x.numer())
        .ok_or_else(|| Error::Parse(format!("numerator of {x} too large")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["3/4", "-2", "0", "-7/3", "12"] {
            let x = parse_rat(s).unwrap();
            assert_eq!(rat_to_string(&x), s);
        }
        assert_eq!(rat_to_string(&parse_rat("6/4").unwrap()), "3/2");
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("abc").is_err());
    }

    #[test]
    fn isqrt_edges() {
        assert_eq!(isqrt_i128(0), 0);
        assert_eq!(isqrt_i128(1), 1);
        assert_eq!(isqrt_i128(3), 1);
        assert_eq!(isqrt_i128(4), 2);
        assert_eq!(isqrt_i128(99), 9);
        assert_eq!(isqrt_i128(100), 10);
        assert_eq!(isqrt_i128((1i128 << 80) - 1), (1i128 << 40) - 1);
    }

    #[test]
    fn floor_div_negative() {
        assert_eq!(div_floor_i64(-7, 2), -4);
        assert_eq!(div_ceil_i64(-7, 2), -3);
        assert_eq!(div_floor_i64(7, 2), 3);
    }
}
