//! Exact rationals. Everything in the crate that is a weight, a mass or an
//! integrand value is a [`Q`]; there is no floating point in the core.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(numer: i64, denom: i64) -> Q {
    Q::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

/// Parses `p/q` or a bare integer `p`. Decimal notation is rejected.
pub fn parse_q(text: &str) -> Result<Q> {
    let bad = || Error::InvalidRational(text.to_string());
    let parse_int = |s: &str| -> Result<BigInt> {
        let digits = s.strip_prefix('-').unwrap_or(s);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        s.parse::<BigInt>().map_err(|_| bad())
    };
    match text.split_once('/') {
        Some((n, d)) => {
            let d = parse_int(d)?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(parse_int(n)?, d))
        }
        None => Ok(Q::from_integer(parse_int(text)?)),
    }
}

/// Renders in lowest terms: `5/12`, `0`, `1`.
pub fn fmt_q(value: &Q) -> String {
    value.to_string()
}

pub fn in_unit_interval(value: &Q) -> bool {
    !value.is_negative() && value <= &Q::one()
}

/// A value known to lie in `[0,1]`: the result of evaluating a valuation on
/// an open set or of integrating a `[0,1]`-valued map.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MassValue(Q);

impl MassValue {
    pub fn new(value: Q) -> Result<Self> {
        if in_unit_interval(&value) {
            Ok(MassValue(value))
        } else {
            Err(Error::OutOfRange(fmt_q(&value)))
        }
    }

    pub fn zero() -> Self {
        MassValue(Q::zero())
    }

    pub fn value(&self) -> &Q {
        &self.0
    }

    pub fn into_inner(self) -> Q {
        self.0
    }
}

impl std::fmt::Display for MassValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_integers() {
        assert_eq!(parse_q("2/4").unwrap(), q(1, 2));
        assert_eq!(parse_q("3").unwrap(), q(3, 1));
        assert_eq!(parse_q("-1/3").unwrap(), q(-1, 3));
    }

    #[test]
    fn rejects_decimals_and_junk() {
        for bad in ["0.5", "1/0", "", "/2", "1/", "a/b", "1e3", "+1"] {
            assert!(parse_q(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn renders_lowest_terms() {
        assert_eq!(fmt_q(&q(10, 24)), "5/12");
        assert_eq!(fmt_q(&q(0, 7)), "0");
        assert_eq!(fmt_q(&q(4, 4)), "1");
    }

    #[test]
    fn mass_value_range() {
        assert!(MassValue::new(q(1, 1)).is_ok());
        assert!(MassValue::new(q(5, 4)).is_err());
        assert!(MassValue::new(q(-1, 4)).is_err());
    }
}
