//! Arbitrary-precision dyadic numbers `mant * 2^exp` with directed rounding.
//!
//! Every bound produced here is a true lower or upper bound: rounding a
//! lower endpoint always goes down, an upper endpoint always goes up.
//! Addition and multiplication are exact; precision is only lost at the
//! explicit rounding points (`round_floor` / `round_ceil`, division and
//! the transcendental series).

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

/// Canonical form: `mant` is odd or zero; zero carries exponent 0.
#[derive(Clone, PartialEq, Eq)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn new(mant: BigInt, exp: i64) -> Self {
        let mut d = Dyadic { mant, exp };
        d.canonicalize();
        d
    }

    fn canonicalize(&mut self) {
        if self.mant.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mant >>= tz;
            self.exp += tz as i64;
        }
    }

    pub fn zero() -> Self {
        Dyadic { mant: BigInt::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Dyadic { mant: BigInt::one(), exp: 0 }
    }

    pub fn from_integer(n: BigInt) -> Self {
        Dyadic::new(n, 0)
    }

    pub fn from_i64(n: i64) -> Self {
        Dyadic::new(BigInt::from(n), 0)
    }

    /// 2^k.
    pub fn power_of_two(k: i64) -> Self {
        Dyadic { mant: BigInt::one(), exp: k }
    }

    pub fn mant(&self) -> &BigInt {
        &self.mant
    }

    pub fn exp(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.mant.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn neg(&self) -> Self {
        Dyadic { mant: -&self.mant, exp: self.exp }
    }

    pub fn abs(&self) -> Self {
        Dyadic { mant: self.mant.abs(), exp: self.exp }
    }

    /// Exact sum.
    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let exp = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - exp) as u64;
        let b = &other.mant << (other.exp - exp) as u64;
        Dyadic::new(a + b, exp)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Exact product.
    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Dyadic::zero();
        }
        Dyadic {
            mant: &self.mant * &other.mant,
            exp: self.exp + other.exp,
        }
    }

    pub fn mul_2exp(&self, k: i64) -> Self {
        if self.is_zero() {
            return Dyadic::zero();
        }
        Dyadic { mant: self.mant.clone(), exp: self.exp + k }
    }

    /// Bits in the mantissa magnitude.
    pub fn mant_bits(&self) -> u64 {
        self.mant.bits()
    }

    /// Keep at most `prec` mantissa bits, rounding toward -inf.
    pub fn round_floor(&self, prec: u32) -> Self {
        self.round(prec, false)
    }

    /// Keep at most `prec` mantissa bits, rounding toward +inf.
    pub fn round_ceil(&self, prec: u32) -> Self {
        self.round(prec, true)
    }

    fn round(&self, prec: u32, up: bool) -> Self {
        let bits = self.mant.bits();
        if bits <= prec as u64 {
            return self.clone();
        }
        let drop = bits - prec as u64;
        let shifted = &self.mant >> drop;
        let exact = (&shifted << drop) == self.mant;
        let mut m = shifted;
        if !exact && up {
            m += 1;
        }
        // >> on BigInt is arithmetic (floors), which is what the downward
        // direction needs for negative mantissas.
        Dyadic::new(m, self.exp + drop as i64)
    }

    /// floor(self) as an integer.
    pub fn floor_int(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << self.exp as u64
        } else {
            &self.mant >> (-self.exp) as u64
        }
    }

    /// Directed conversion from a rational: result <= q (floor) or >= q (ceil),
    /// within 2^-prec relative accuracy.
    pub fn from_rational(q: &BigRational, prec: u32, up: bool) -> Self {
        if q.is_zero() {
            return Dyadic::zero();
        }
        let num = q.numer().clone();
        let den = q.denom().clone();
        // Scale so the quotient carries at least prec+1 significant bits.
        let shift = (den.bits() as i64 + prec as i64 + 2) - num.bits() as i64;
        let shift = shift.max(0);
        let scaled = num << shift as u64;
        let (quot, rem) = num_integer::Integer::div_rem(&scaled, &den);
        let exact = rem.is_zero();
        let mut m = quot;
        if !exact {
            // div_rem truncates toward zero; fix the direction.
            let num_neg = q.numer().is_negative();
            if up && !num_neg {
                m += 1;
            }
            if !up && num_neg {
                m -= 1;
            }
        }
        Dyadic::new(m, -shift)
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mant << self.exp as u64)
        } else {
            BigRational::new(self.mant.clone(), BigInt::one() << (-self.exp) as u64)
        }
    }

    /// Directed quotient at `prec` bits.
    pub fn div(&self, other: &Self, prec: u32, up: bool) -> Self {
        assert!(!other.is_zero(), "dyadic division by zero");
        let q = self.to_rational() / other.to_rational();
        Dyadic::from_rational(&q, prec, up)
    }

    /// Floor of sqrt at `prec` significant bits; requires self >= 0.
    pub fn sqrt_floor(&self, prec: u32) -> Self {
        assert!(!self.is_negative(), "sqrt of negative dyadic");
        if self.is_zero() {
            return Dyadic::zero();
        }
        let (scaled, exp) = self.even_exponent_scale(prec);
        let root = scaled.sqrt();
        Dyadic::new(root, exp)
    }

    /// Upper bound of sqrt at `prec` significant bits; requires self >= 0.
    pub fn sqrt_ceil(&self, prec: u32) -> Self {
        assert!(!self.is_negative(), "sqrt of negative dyadic");
        if self.is_zero() {
            return Dyadic::zero();
        }
        let (scaled, exp) = self.even_exponent_scale(prec);
        let root = scaled.sqrt();
        if &root * &root == scaled {
            Dyadic::new(root, exp)
        } else {
            Dyadic::new(root + 1, exp)
        }
    }

    /// Rewrite as `m * 4^exp` with enough bits in m for a prec-bit root.
    fn even_exponent_scale(&self, prec: u32) -> (BigInt, i64) {
        let mut extra = 2 * (prec as i64 + 4) - self.mant.bits() as i64;
        if extra < 0 {
            extra = 0;
        }
        let mut total_exp = self.exp - extra;
        if total_exp % 2 != 0 {
            extra += 1;
            total_exp -= 1;
        }
        (&self.mant << extra as u64, total_exp / 2)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let sa = self.mant.sign();
        let sb = other.mant.sign();
        let sign_rank = |s: Sign| match s {
            Sign::Minus => 0,
            Sign::NoSign => 1,
            Sign::Plus => 2,
        };
        if sign_rank(sa) != sign_rank(sb) {
            return sign_rank(sa).cmp(&sign_rank(sb));
        }
        if self.mant.is_zero() {
            return Ordering::Equal;
        }
        // Same nonzero sign: compare magnitudes via bit length first.
        let la = self.mant.bits() as i64 + self.exp;
        let lb = other.mant.bits() as i64 + other.exp;
        let mag = if la != lb {
            la.cmp(&lb)
        } else {
            let exp = self.exp.min(other.exp);
            let a = &self.mant << (self.exp - exp) as u64;
            let b = &other.mant << (other.exp - exp) as u64;
            return a.cmp(&b);
        };
        if sa == Sign::Plus {
            mag
        } else {
            mag.reverse()
        }
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.mant, self.exp)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::exactreal::decimal_string(&self.to_rational(), 24))
    }
}

// ---------------------------------------------------------------------------
// Transcendental kernels. Each returns (lower, upper) true bounds.
// ---------------------------------------------------------------------------

fn guard(prec: u32) -> u32 {
    prec + 16
}

/// Enclosure of Euler's number e from the factorial series.
pub fn e_bounds(prec: u32) -> (Dyadic, Dyadic) {
    static CACHE: Mutex<Option<HashMap<u32, (Dyadic, Dyadic)>>> = Mutex::new(None);
    let mut cache = CACHE.lock().unwrap();
    let map = cache.get_or_insert_with(HashMap::new);
    if let Some(hit) = map.get(&prec) {
        return hit.clone();
    }
    let w = guard(prec);
    let eps = Dyadic::power_of_two(-(w as i64));
    let mut lo = Dyadic::from_i64(2); // 1/0! + 1/1!
    let mut hi = lo.clone();
    let mut term_lo = Dyadic::one();
    let mut term_hi = Dyadic::one();
    let mut k: i64 = 2;
    loop {
        term_lo = term_lo.div(&Dyadic::from_i64(k), w, false);
        term_hi = term_hi.div(&Dyadic::from_i64(k), w, true);
        lo = lo.add(&term_lo).round_floor(w);
        hi = hi.add(&term_hi).round_ceil(w);
        if term_hi < eps {
            break;
        }
        k += 1;
    }
    // Remaining tail after 1/k!: bounded by 2/(k+1)!.
    let tail = term_hi.div(&Dyadic::from_i64(k + 1), w, true).mul_2exp(1);
    hi = hi.add(&tail).round_ceil(w);
    let result = (lo, hi);
    map.insert(prec, result.clone());
    result
}

/// Enclosure of ln 2 = 2 atanh(1/3).
pub fn ln2_bounds(prec: u32) -> (Dyadic, Dyadic) {
    static CACHE: Mutex<Option<HashMap<u32, (Dyadic, Dyadic)>>> = Mutex::new(None);
    let mut cache = CACHE.lock().unwrap();
    let map = cache.get_or_insert_with(HashMap::new);
    if let Some(hit) = map.get(&prec) {
        return hit.clone();
    }
    let third = BigRational::new(BigInt::one(), BigInt::from(3));
    let result = atanh_bounds(&third, prec);
    let result = (result.0.mul_2exp(1).round_floor(guard(prec)), result.1.mul_2exp(1).round_ceil(guard(prec)));
    map.insert(prec, result.clone());
    result
}

/// atanh(z) for rational 0 <= z <= 1/3, by the odd power series.
fn atanh_bounds(z: &BigRational, prec: u32) -> (Dyadic, Dyadic) {
    let w = guard(prec);
    if z.is_zero() {
        return (Dyadic::zero(), Dyadic::zero());
    }
    let z_lo = Dyadic::from_rational(z, w, false);
    let z_hi = Dyadic::from_rational(z, w, true);
    let z2_lo = z_lo.mul(&z_lo).round_floor(w);
    let z2_hi = z_hi.mul(&z_hi).round_ceil(w);
    let eps = Dyadic::power_of_two(-(w as i64));
    let mut pow_lo = z_lo.clone();
    let mut pow_hi = z_hi.clone();
    let mut lo = z_lo.clone();
    let mut hi = z_hi.clone();
    let mut k: i64 = 1;
    loop {
        pow_lo = pow_lo.mul(&z2_lo).round_floor(w);
        pow_hi = pow_hi.mul(&z2_hi).round_ceil(w);
        let t_lo = pow_lo.div(&Dyadic::from_i64(2 * k + 1), w, false);
        let t_hi = pow_hi.div(&Dyadic::from_i64(2 * k + 1), w, true);
        lo = lo.add(&t_lo).round_floor(w);
        hi = hi.add(&t_hi).round_ceil(w);
        if t_hi < eps {
            break;
        }
        k += 1;
    }
    // Tail after z^(2k+1)/(2k+1): geometric with ratio z^2 <= 1/9.
    let tail = pow_hi.mul(&z2_hi).mul_2exp(1).round_ceil(w);
    hi = hi.add(&tail).round_ceil(w);
    (lo, hi)
}

/// Enclosure of ln q for a positive rational q.
pub fn ln_rational_bounds(q: &BigRational, prec: u32) -> (Dyadic, Dyadic) {
    assert!(q.is_positive(), "ln of a non-positive rational");
    let w = guard(prec);
    // q = m * 2^j with m in [1, 2).
    let j = q.numer().bits() as i64 - q.denom().bits() as i64;
    let mut j = j;
    let two = BigRational::from_integer(BigInt::from(2));
    let mut m = if j >= 0 {
        q / BigRational::from_integer(BigInt::one() << j as u64)
    } else {
        q * BigRational::from_integer(BigInt::one() << (-j) as u64)
    };
    while m >= two {
        m /= &two;
        j += 1;
    }
    while m < BigRational::one() {
        m *= &two;
        j -= 1;
    }
    // ln m = 2 atanh((m-1)/(m+1)), argument in [0, 1/3).
    let z = (&m - BigRational::one()) / (&m + BigRational::one());
    let (a_lo, a_hi) = atanh_bounds(&z, prec);
    let (l2_lo, l2_hi) = ln2_bounds(prec);
    let jd = Dyadic::from_i64(j);
    let (j_lo, j_hi) = if j >= 0 {
        (jd.mul(&l2_lo), jd.mul(&l2_hi))
    } else {
        (jd.mul(&l2_hi), jd.mul(&l2_lo))
    };
    (
        j_lo.add(&a_lo.mul_2exp(1)).round_floor(w),
        j_hi.add(&a_hi.mul_2exp(1)).round_ceil(w),
    )
}

/// Enclosure of e^x for a dyadic x.
pub fn exp_bounds(x: &Dyadic, prec: u32) -> (Dyadic, Dyadic) {
    let w = guard(prec);
    // Split x = n + f with n integer, f in [0, 1).
    let n = x.floor_int();
    let f = x.sub(&Dyadic::from_integer(n.clone()));
    debug_assert!(!f.is_negative() && f < Dyadic::one());

    let (frac_lo, frac_hi) = exp_fraction_bounds(&f, w);
    if n.is_zero() {
        return (frac_lo, frac_hi);
    }

    // e^n via integer powers of e, with enough extra bits to absorb the
    // relative-error amplification of the powering.
    let n_abs: u64 = n.abs().try_into().unwrap_or(u64::MAX);
    let extra = 64 - (n_abs | 1).leading_zeros() + 8;
    let (e_lo, e_hi) = e_bounds(w + extra);
    let p = w + extra;
    let (pow_lo, pow_hi) = pow_bounds_positive(&e_lo, &e_hi, n_abs, p);
    let (int_lo, int_hi) = if n.is_negative() {
        (
            Dyadic::one().div(&pow_hi, p, false),
            Dyadic::one().div(&pow_lo, p, true),
        )
    } else {
        (pow_lo, pow_hi)
    };
    (
        int_lo.mul(&frac_lo).round_floor(w),
        int_hi.mul(&frac_hi).round_ceil(w),
    )
}

/// e^f for dyadic f in [0,1), by the Taylor series with a tail bound.
fn exp_fraction_bounds(f: &Dyadic, w: u32) -> (Dyadic, Dyadic) {
    if f.is_zero() {
        return (Dyadic::one(), Dyadic::one());
    }
    let eps = Dyadic::power_of_two(-(w as i64));
    let mut lo = Dyadic::one().add(f);
    let mut hi = lo.clone();
    let mut term_lo = f.clone();
    let mut term_hi = f.clone();
    let mut k: i64 = 2;
    loop {
        term_lo = term_lo.mul(f).div(&Dyadic::from_i64(k), w, false);
        term_hi = term_hi.mul(f).div(&Dyadic::from_i64(k), w, true);
        lo = lo.add(&term_lo).round_floor(w);
        hi = hi.add(&term_hi).round_ceil(w);
        if term_hi < eps {
            break;
        }
        k += 1;
    }
    // Tail after f^k/k!: next terms shrink at least geometrically by 1/2.
    let tail = term_hi.mul(f).div(&Dyadic::from_i64(k + 1), w, true).mul_2exp(1);
    hi = hi.add(&tail).round_ceil(w);
    (lo, hi)
}

/// [lo, hi]^n for 0 < lo <= hi, directed at p bits.
fn pow_bounds_positive(lo: &Dyadic, hi: &Dyadic, n: u64, p: u32) -> (Dyadic, Dyadic) {
    debug_assert!(lo.is_positive());
    let mut acc_lo = Dyadic::one();
    let mut acc_hi = Dyadic::one();
    let mut base_lo = lo.clone();
    let mut base_hi = hi.clone();
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            acc_lo = acc_lo.mul(&base_lo).round_floor(p);
            acc_hi = acc_hi.mul(&base_hi).round_ceil(p);
        }
        e >>= 1;
        if e > 0 {
            base_lo = base_lo.mul(&base_lo).round_floor(p);
            base_hi = base_hi.mul(&base_hi).round_ceil(p);
        }
    }
    (acc_lo, acc_hi)
}

/// Enclosure of sqrt(q) for a nonnegative rational q.
pub fn sqrt_rational_bounds(q: &BigRational, prec: u32) -> (Dyadic, Dyadic) {
    assert!(!q.is_negative(), "sqrt of a negative rational");
    let w = guard(prec);
    let lo = Dyadic::from_rational(q, w + 4, false);
    let hi = Dyadic::from_rational(q, w + 4, true);
    (lo.sqrt_floor(w), hi.sqrt_ceil(w))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn add_and_mul_are_exact() {
        let a = Dyadic::new(BigInt::from(3), -2); // 3/4
        let b = Dyadic::new(BigInt::from(5), -3); // 5/8
        assert_eq!(a.add(&b).to_rational(), rat(11, 8));
        assert_eq!(a.mul(&b).to_rational(), rat(15, 32));
    }

    #[test]
    fn rounding_brackets_rationals() {
        let third = rat(1, 3);
        let lo = Dyadic::from_rational(&third, 64, false);
        let hi = Dyadic::from_rational(&third, 64, true);
        assert!(lo.to_rational() <= third && third <= hi.to_rational());
        let width = hi.sub(&lo);
        assert!(width <= Dyadic::power_of_two(-64));
    }

    #[test]
    fn ordering_handles_mixed_exponents() {
        let a = Dyadic::new(BigInt::from(1), 10); // 1024
        let b = Dyadic::new(BigInt::from(1023), 0);
        assert!(b < a);
        assert!(a.neg() < b);
        assert_eq!(Dyadic::zero().cmp(&Dyadic::zero()), Ordering::Equal);
    }

    #[test]
    fn e_bounds_contain_reference() {
        // e = 2.71828182845904523536028747135266249775724709369995957496697
        let (lo, hi) = e_bounds(128);
        crate::exactreal::testutil::assert_brackets_dyadic(&lo, &hi, 2718281828459045235, 1000000000000000000);
        assert!(hi.sub(&lo) < Dyadic::power_of_two(-120));
    }

    #[test]
    fn ln_rational_brackets_ln2_and_ln10() {
        use crate::exactreal::testutil::assert_brackets_dyadic;
        // ln 2 = 0.69314718055994530941...
        let (lo, hi) = ln_rational_bounds(&rat(2, 1), 96);
        assert_brackets_dyadic(&lo, &hi, 693147180559945309, 1000000000000000000);
        // ln 10 = 2.30258509299404568401...
        let (lo, hi) = ln_rational_bounds(&rat(10, 1), 96);
        assert_brackets_dyadic(&lo, &hi, 2302585092994045684, 1000000000000000000);
        // ln(1/10) = -ln(10)
        let (lo, hi) = ln_rational_bounds(&rat(1, 10), 96);
        assert_brackets_dyadic(&lo, &hi, -2302585092994045685, 1000000000000000000);
    }

    #[test]
    fn exp_bounds_match_reference_values() {
        use crate::exactreal::testutil::assert_brackets_dyadic;
        // e^3 = 20.0855369231876677409285296545817178969879078385541501443789
        let (lo, hi) = exp_bounds(&Dyadic::from_i64(3), 128);
        assert_brackets_dyadic(&lo, &hi, 200855369231876677, 10000000000000000);
        assert!(hi.sub(&lo) < Dyadic::power_of_two(-100));
        // e^-1 = 0.36787944117144232159...
        let (lo, hi) = exp_bounds(&Dyadic::from_i64(-1), 128);
        assert_brackets_dyadic(&lo, &hi, 36787944117144232, 100000000000000000);
        // e^0 = 1 exactly
        let (lo, hi) = exp_bounds(&Dyadic::zero(), 64);
        assert_eq!(lo, Dyadic::one());
        assert_eq!(hi, Dyadic::one());
    }

    #[test]
    fn exp_bounds_handle_large_arguments() {
        let (lo, hi) = exp_bounds(&Dyadic::from_i64(64), 96);
        assert!(lo.is_positive());
        // e^64 ~ 6.235e27: check the magnitude window and the width.
        let lo_r = lo.to_rational();
        assert!(lo_r > BigRational::from_integer(BigInt::from(6u64) * BigInt::from(10u64).pow(27)));
        assert!(hi.to_rational() < BigRational::from_integer(BigInt::from(7u64) * BigInt::from(10u64).pow(27)));
        let rel = hi.sub(&lo).div(&lo, 32, true);
        assert!(rel < Dyadic::power_of_two(-60));
    }

    #[test]
    fn sqrt_bounds_bracket_sqrt2() {
        // sqrt 2 = 1.41421356237309504880...
        let (lo, hi) = sqrt_rational_bounds(&rat(2, 1), 128);
        crate::exactreal::testutil::assert_brackets_dyadic(&lo, &hi, 1414213562373095048, 1000000000000000000);
        let lo2 = lo.mul(&lo);
        let hi2 = hi.mul(&hi);
        assert!(lo2.to_rational() <= rat(2, 1));
        assert!(hi2.to_rational() >= rat(2, 1));
    }

    #[test]
    fn sqrt_of_exact_square_is_exact() {
        let (lo, hi) = sqrt_rational_bounds(&rat(9, 4), 64);
        assert_eq!(lo.to_rational(), rat(3, 2));
        assert_eq!(hi.to_rational(), rat(3, 2));
    }
}
