//! Certified interval enclosures over dyadic endpoints.

use num_bigint::BigInt;
use num_rational::BigRational;
use std::cmp::Ordering;
use std::fmt;

use super::dyadic::{self, Dyadic};
use super::ExactError;

/// A closed interval `[lo, hi]` guaranteed to contain the exact value it
/// stands for. `prec` records the precision (in bits) the enclosure was
/// produced at; arithmetic keeps endpoints rounded outward at that width.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enclosure {
    lo: Dyadic,
    hi: Dyadic,
    prec: u32,
}

pub const MIN_PRECISION: u32 = 32;

fn working(prec: u32) -> u32 {
    prec.max(MIN_PRECISION) + 16
}

impl Enclosure {
    pub fn new(lo: Dyadic, hi: Dyadic, prec: u32) -> Self {
        debug_assert!(lo <= hi, "enclosure endpoints out of order");
        Enclosure { lo, hi, prec }
    }

    pub fn exact_dyadic(d: Dyadic, prec: u32) -> Self {
        Enclosure { lo: d.clone(), hi: d, prec }
    }

    pub fn zero(prec: u32) -> Self {
        Enclosure::exact_dyadic(Dyadic::zero(), prec)
    }

    pub fn one(prec: u32) -> Self {
        Enclosure::exact_dyadic(Dyadic::one(), prec)
    }

    pub fn from_rational(q: &BigRational, prec: u32) -> Self {
        let w = working(prec);
        Enclosure {
            lo: Dyadic::from_rational(q, w, false),
            hi: Dyadic::from_rational(q, w, true),
            prec,
        }
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn lo_rational(&self) -> BigRational {
        self.lo.to_rational()
    }

    pub fn hi_rational(&self) -> BigRational {
        self.hi.to_rational()
    }

    pub fn width(&self) -> Dyadic {
        self.hi.sub(&self.lo)
    }

    pub fn midpoint(&self) -> Dyadic {
        self.lo.add(&self.hi).mul_2exp(-1)
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn excludes_zero(&self) -> bool {
        self.lo.is_positive() || self.hi.is_negative()
    }

    pub fn contains_rational(&self, q: &BigRational) -> bool {
        &self.lo.to_rational() <= q && q <= &self.hi.to_rational()
    }

    pub fn contains(&self, other: &Enclosure) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersects(&self, other: &Enclosure) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn intersect(&self, other: &Enclosure) -> Option<Enclosure> {
        let lo = self.lo.clone().max(other.lo.clone());
        let hi = self.hi.clone().min(other.hi.clone());
        if lo <= hi {
            Some(Enclosure::new(lo, hi, self.prec.max(other.prec)))
        } else {
            None
        }
    }

    pub fn hull(&self, other: &Enclosure) -> Enclosure {
        Enclosure::new(
            self.lo.clone().min(other.lo.clone()),
            self.hi.clone().max(other.hi.clone()),
            self.prec.min(other.prec),
        )
    }

    /// Total-order comparison against another enclosure: `Some` only when the
    /// intervals are disjoint.
    pub fn disjoint_cmp(&self, other: &Enclosure) -> Option<Ordering> {
        if self.hi < other.lo {
            Some(Ordering::Less)
        } else if other.hi < self.lo {
            Some(Ordering::Greater)
        } else {
            None
        }
    }

    pub fn neg(&self) -> Enclosure {
        Enclosure::new(self.hi.neg(), self.lo.neg(), self.prec)
    }

    pub fn abs(&self) -> Enclosure {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            self.neg()
        } else {
            let hi = self.lo.abs().max(self.hi.abs());
            Enclosure::new(Dyadic::zero(), hi, self.prec)
        }
    }

    pub fn add(&self, other: &Enclosure) -> Enclosure {
        let prec = self.prec.min(other.prec);
        let w = working(prec);
        Enclosure::new(
            self.lo.add(&other.lo).round_floor(w),
            self.hi.add(&other.hi).round_ceil(w),
            prec,
        )
    }

    pub fn sub(&self, other: &Enclosure) -> Enclosure {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Enclosure) -> Enclosure {
        let prec = self.prec.min(other.prec);
        let w = working(prec);
        let products = [
            self.lo.mul(&other.lo),
            self.lo.mul(&other.hi),
            self.hi.mul(&other.lo),
            self.hi.mul(&other.hi),
        ];
        let mut lo = products[0].clone();
        let mut hi = products[0].clone();
        for p in &products[1..] {
            if *p < lo {
                lo = p.clone();
            }
            if *p > hi {
                hi = p.clone();
            }
        }
        Enclosure::new(lo.round_floor(w), hi.round_ceil(w), prec)
    }

    pub fn mul_rational(&self, q: &BigRational) -> Enclosure {
        self.mul(&Enclosure::from_rational(q, self.prec))
    }

    pub fn mul_2exp(&self, k: i64) -> Enclosure {
        Enclosure::new(self.lo.mul_2exp(k), self.hi.mul_2exp(k), self.prec)
    }

    /// Reciprocal; fails when the interval contains zero.
    pub fn recip(&self) -> Result<Enclosure, ExactError> {
        if self.contains_zero() {
            return Err(ExactError::DivisionByZero);
        }
        let w = working(self.prec);
        Ok(Enclosure::new(
            Dyadic::one().div(&self.hi, w, false),
            Dyadic::one().div(&self.lo, w, true),
            self.prec,
        ))
    }

    pub fn div(&self, other: &Enclosure) -> Result<Enclosure, ExactError> {
        Ok(self.mul(&other.recip()?))
    }

    pub fn pow_u32(&self, n: u32) -> Enclosure {
        let mut acc = Enclosure::one(self.prec);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// e^self (monotone endpoint map).
    pub fn exp(&self) -> Enclosure {
        let (lo, _) = dyadic::exp_bounds(&self.lo, self.prec);
        let (_, hi) = dyadic::exp_bounds(&self.hi, self.prec);
        Enclosure::new(lo, hi, self.prec)
    }

    /// ln(self); fails unless the interval is strictly positive.
    pub fn ln(&self) -> Result<Enclosure, ExactError> {
        if !self.lo.is_positive() {
            return Err(ExactError::LogOfNonPositive);
        }
        let (lo, _) = dyadic::ln_rational_bounds(&self.lo.to_rational(), self.prec);
        let (_, hi) = dyadic::ln_rational_bounds(&self.hi.to_rational(), self.prec);
        Ok(Enclosure::new(lo, hi, self.prec))
    }

    pub fn sqrt(&self) -> Result<Enclosure, ExactError> {
        if self.lo.is_negative() {
            return Err(ExactError::SqrtOfNegative);
        }
        Ok(Enclosure::new(
            self.lo.sqrt_floor(working(self.prec)),
            self.hi.sqrt_ceil(working(self.prec)),
            self.prec,
        ))
    }

    pub fn min_with(&self, other: &Enclosure) -> Enclosure {
        Enclosure::new(
            self.lo.clone().min(other.lo.clone()),
            self.hi.clone().min(other.hi.clone()),
            self.prec.min(other.prec),
        )
    }

    pub fn max_with(&self, other: &Enclosure) -> Enclosure {
        Enclosure::new(
            self.lo.clone().max(other.lo.clone()),
            self.hi.clone().max(other.hi.clone()),
            self.prec.min(other.prec),
        )
    }

    /// Widen the upper endpoint by 2^k (tail bounds).
    pub fn widen_upper_2exp(&self, k: i64) -> Enclosure {
        Enclosure::new(self.lo.clone(), self.hi.add(&Dyadic::power_of_two(k)), self.prec)
    }

    /// x / (1 + x) for x >= 0, the bounded metric transform.
    pub fn metric_transform(&self) -> Result<Enclosure, ExactError> {
        debug_assert!(!self.lo.is_negative());
        let w = working(self.prec);
        let one = Dyadic::one();
        let lo = self.lo.div(&one.add(&self.lo), w, false);
        let hi = self.hi.div(&one.add(&self.hi), w, true);
        Ok(Enclosure::new(lo, hi, self.prec))
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact() {
            write!(f, "[{}]", self.lo)
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}

/// Convenience: enclosure of n as an integer.
impl From<i64> for Enclosure {
    fn from(n: i64) -> Self {
        Enclosure::exact_dyadic(Dyadic::from_i64(n), MIN_PRECISION)
    }
}

/// Enclosure of sqrt(n) at the requested precision, used by the default basis.
pub fn sqrt_integer_enclosure(n: u64, prec: u32) -> Enclosure {
    let q = BigRational::from_integer(BigInt::from(n));
    let (lo, hi) = dyadic::sqrt_rational_bounds(&q, prec);
    Enclosure::new(lo, hi, prec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn interval_product_covers_all_sign_cases() {
        let a = Enclosure::new(Dyadic::from_i64(-2), Dyadic::from_i64(3), 64);
        let b = Enclosure::new(Dyadic::from_i64(-1), Dyadic::from_i64(4), 64);
        let p = a.mul(&b);
        assert!(p.contains_rational(&rat(-8, 1)));
        assert!(p.contains_rational(&rat(12, 1)));
        assert!(p.lo_rational() <= rat(-8, 1));
        assert!(p.hi_rational() >= rat(12, 1));
    }

    #[test]
    fn recip_rejects_zero_straddle() {
        let a = Enclosure::new(Dyadic::from_i64(-1), Dyadic::from_i64(1), 64);
        assert!(a.recip().is_err());
        let b = Enclosure::new(Dyadic::from_i64(2), Dyadic::from_i64(4), 64);
        let r = b.recip().unwrap();
        assert!(r.contains_rational(&rat(1, 3)));
    }

    #[test]
    fn metric_transform_is_monotone_and_bounded() {
        let a = Enclosure::from_rational(&rat(1, 2), 64);
        let t = a.metric_transform().unwrap();
        assert!(t.contains_rational(&rat(1, 3)));
        assert!(t.hi_rational() < rat(1, 1));
    }

    #[test]
    fn exp_and_ln_roundtrip_contains_value() {
        let x = Enclosure::from_rational(&rat(7, 2), 96);
        let y = x.exp().ln().unwrap();
        assert!(y.contains_rational(&rat(7, 2)));
    }
}
