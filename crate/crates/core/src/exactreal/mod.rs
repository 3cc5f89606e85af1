//! Exact symbolic scalar kernel: linear forms over a declared
//! Q-linearly-independent symbol basis, monomials with symbolic exponents,
//! structural zero certification, and certified dyadic enclosures.

pub mod dyadic;
pub mod enclosure;
pub mod form;
pub mod monomial;
pub mod symbol;

pub use dyadic::Dyadic;
pub use enclosure::{Enclosure, MIN_PRECISION};
pub use form::LinearForm;
pub use monomial::{Base, Comparison, Monomial, MonomialSum, ZeroCertificate};
pub use symbol::SymbolBasis;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("unknown symbol index {0}")]
    UnknownSymbol(usize),
    #[error("division by an enclosure containing zero")]
    DivisionByZero,
    #[error("logarithm of a non-positive enclosure")]
    LogOfNonPositive,
    #[error("square root of a negative enclosure")]
    SqrtOfNegative,
    #[error("operation requires a single-term sum")]
    NotSingleTerm,
}

/// Default certification/comparison budget in bits.
pub const DEFAULT_BUDGET: u32 = 1024;

/// Decimal rendering of a rational with `digits` fractional digits,
/// truncated toward zero. Deterministic, used for reports and CSV output.
pub fn decimal_string(q: &BigRational, digits: u32) -> String {
    let neg = q.is_negative();
    let mag = q.abs();
    let scale = BigInt::from(10u32).pow(digits);
    let scaled = (mag.numer() * &scale) / mag.denom();
    let int_part = &scaled / &scale;
    let frac_part = &scaled % &scale;
    let mut frac = frac_part.to_string();
    while (frac.len() as u32) < digits {
        frac.insert(0, '0');
    }
    while frac.ends_with('0') && frac.len() > 1 {
        frac.pop();
    }
    let sign = if neg && !(int_part.is_zero() && frac.chars().all(|c| c == '0')) {
        "-"
    } else {
        ""
    };
    if frac.is_empty() || frac == "0" {
        format!("{}{}", sign, int_part)
    } else {
        format!("{}{}.{}", sign, int_part, frac)
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::dyadic::Dyadic;
    use super::enclosure::Enclosure;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    /// Assert that [lo, hi] contains a value known to lie strictly between
    /// num/den and (num+1)/den (a truncated decimal reference).
    pub(crate) fn assert_brackets_dyadic(lo: &Dyadic, hi: &Dyadic, num: i128, den: i128) {
        let r_lo = BigRational::new(BigInt::from(num), BigInt::from(den));
        let r_hi = BigRational::new(BigInt::from(num + 1), BigInt::from(den));
        assert!(
            lo.to_rational() < r_hi,
            "lower bound {} not below reference window ({}, {})",
            lo,
            r_lo,
            r_hi
        );
        assert!(
            hi.to_rational() > r_lo,
            "upper bound {} not above reference window ({}, {})",
            hi,
            r_lo,
            r_hi
        );
    }

    pub(crate) fn assert_brackets(enc: &Enclosure, num: i128, den: i128) {
        assert_brackets_dyadic(enc.lo(), enc.hi(), num, den);
    }

    /// Assert the enclosure is no wider than 2^-bits.
    pub(crate) fn assert_width_below(enc: &Enclosure, bits: i64) {
        assert!(
            enc.width() <= Dyadic::power_of_two(-bits),
            "width {} above 2^-{}",
            enc.width(),
            bits
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_rendering() {
        let q = BigRational::new(BigInt::from(1), BigInt::from(3));
        assert_eq!(decimal_string(&q, 6), "0.333333");
        let q = BigRational::new(BigInt::from(-5), BigInt::from(4));
        assert_eq!(decimal_string(&q, 6), "-1.25");
        let q = BigRational::from_integer(BigInt::from(42));
        assert_eq!(decimal_string(&q, 4), "42");
    }
}
