//! Exact rational arithmetic helpers shared across the crate.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::error::{Error, Result};

/// The crate-wide exact rational type.
pub type Q = BigRational;

pub fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_usize(n: usize) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_zero() -> Q {
    Q::zero()
}

pub fn q_one() -> Q {
    Q::one()
}

/// Renders a rational as `p/q` with q >= 1, e.g. `1/2`, `-3/4`, `1/1`.
pub fn format_q(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parses `p/q` or a bare integer `p`. Rejects anything with a decimal point.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    if s.contains('.') {
        return Err(Error::input(format!(
            "`{s}`: floating-point input is not accepted, use p/q"
        )));
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| Error::input(format!("`{s}`: bad rational numerator")))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| Error::input(format!("`{s}`: bad rational denominator")))?;
    if d.is_zero() {
        return Err(Error::input(format!("`{s}`: zero denominator")));
    }
    Ok(Q::new(n, d))
}

/// Checks that the weights form an exact probability vector.
pub fn check_distribution(weights: &[Q]) -> Result<()> {
    let mut total = Q::zero();
    for w in weights {
        if w.is_negative() {
            return Err(Error::input(format!(
                "negative probability {}",
                format_q(w)
            )));
        }
        total += w;
    }
    if !total.is_one() {
        return Err(Error::input(format!(
            "probabilities sum to {}, expected 1/1",
            format_q(&total)
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(format_q(&parse_q("3/6").unwrap()), "1/2");
        assert_eq!(format_q(&parse_q("2").unwrap()), "2/1");
        assert_eq!(format_q(&parse_q("-1/3").unwrap()), "-1/3");
        assert!(parse_q("0.5").is_err());
        assert!(parse_q("1/0").is_err());
    }

    #[test]
    fn distribution_check() {
        assert!(check_distribution(&[q(1, 2), q(1, 2)]).is_ok());
        assert!(check_distribution(&[q(1, 2), q(1, 3)]).is_err());
        assert!(check_distribution(&[q(-1, 2), q(3, 2)]).is_err());
    }
}
