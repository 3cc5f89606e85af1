//! Monomials `q * prod base^form` and their finite sums.
//!
//! Bases are positive rationals or e; exponents are linear forms over the
//! symbol basis. A sum is kept canonical: terms with the same factor
//! signature are merged, zero terms dropped, and the term list sorted, so
//! the empty sum is exactly 0 and structural equality is meaningful.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use super::dyadic::ln_rational_bounds;
use super::enclosure::Enclosure;
use super::form::LinearForm;
use super::symbol::SymbolBasis;
use super::ExactError;

/// Base of a monomial factor: e, or a positive rational other than 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Base {
    E,
    Rat(BigRational),
}

impl Base {
    pub fn rational(q: BigRational) -> Option<Base> {
        if q.is_positive() && !q.is_one() {
            Some(Base::Rat(q))
        } else {
            None
        }
    }

    pub fn integer(n: u64) -> Option<Base> {
        Base::rational(BigRational::from_integer(BigInt::from(n)))
    }
}

impl PartialOrd for Base {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Base {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Base::E, Base::E) => Ordering::Equal,
            (Base::E, Base::Rat(_)) => Ordering::Less,
            (Base::Rat(_), Base::E) => Ordering::Greater,
            (Base::Rat(a), Base::Rat(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Base::E => write!(f, "e"),
            Base::Rat(q) => write!(f, "{}", q),
        }
    }
}

pub type FactorSignature = BTreeMap<Base, LinearForm>;

/// `coef * prod base^form`, coef != 0, no zero-form factors, no base 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    coef: BigRational,
    factors: FactorSignature,
}

impl Monomial {
    /// Plain rational; returns None for zero (zero is the empty sum).
    pub fn rational(q: BigRational) -> Option<Monomial> {
        if q.is_zero() {
            None
        } else {
            Some(Monomial { coef: q, factors: BTreeMap::new() })
        }
    }

    pub fn one() -> Monomial {
        Monomial { coef: BigRational::one(), factors: BTreeMap::new() }
    }

    /// e^form.
    pub fn exp_form(form: LinearForm) -> Monomial {
        Monomial::one().with_factor(Base::E, form)
    }

    /// base^form for a positive rational base.
    pub fn rational_power(base: BigRational, form: LinearForm) -> Monomial {
        match Base::rational(base) {
            Some(b) => Monomial::one().with_factor(b, form),
            // 1^x = 1: the factor vanishes.
            None => Monomial::one(),
        }
    }

    pub fn with_coef(mut self, q: BigRational) -> Monomial {
        assert!(!q.is_zero(), "monomial coefficient must be nonzero");
        self.coef = q;
        self
    }

    fn with_factor(mut self, base: Base, form: LinearForm) -> Monomial {
        if !form.is_zero() {
            let entry = self.factors.entry(base).or_insert_with(LinearForm::zero);
            let merged = entry.add(&form);
            *entry = merged;
        }
        self.prune();
        self
    }

    fn prune(&mut self) {
        self.factors.retain(|_, form| !form.is_zero());
    }

    pub fn coef(&self) -> &BigRational {
        &self.coef
    }

    pub fn factors(&self) -> &FactorSignature {
        &self.factors
    }

    pub fn signature(&self) -> &FactorSignature {
        &self.factors
    }

    pub fn is_rational(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn exponent_of(&self, base: &Base) -> LinearForm {
        self.factors.get(base).cloned().unwrap_or_else(LinearForm::zero)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut factors = self.factors.clone();
        for (base, form) in &other.factors {
            match factors.get_mut(base) {
                Some(existing) => *existing = existing.add(form),
                None => {
                    factors.insert(base.clone(), form.clone());
                }
            }
        }
        factors.retain(|_, form| !form.is_zero());
        Monomial { coef: &self.coef * &other.coef, factors }
    }

    pub fn scale(&self, q: &BigRational) -> Option<Monomial> {
        let coef = &self.coef * q;
        if coef.is_zero() {
            None
        } else {
            Some(Monomial { coef, factors: self.factors.clone() })
        }
    }

    pub fn neg(&self) -> Monomial {
        Monomial { coef: -&self.coef, factors: self.factors.clone() }
    }

    pub fn pow(&self, n: u32) -> Monomial {
        let mut acc = Monomial::one();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Exact reciprocal: invert the coefficient, negate the exponents.
    pub fn recip(&self) -> Monomial {
        Monomial {
            coef: self.coef.recip(),
            factors: self.factors.iter().map(|(b, f)| (b.clone(), f.neg())).collect(),
        }
    }

    pub fn abs(&self) -> Monomial {
        Monomial { coef: self.coef.abs(), factors: self.factors.clone() }
    }

    pub fn is_positive(&self) -> bool {
        // The factor product is always positive.
        self.coef.is_positive()
    }

    pub fn eval(&self, basis: &SymbolBasis, prec: u32) -> Result<Enclosure, ExactError> {
        let mut acc = Enclosure::from_rational(&self.coef, prec);
        for (base, form) in &self.factors {
            acc = acc.mul(&factor_eval(base, form, basis, prec)?);
        }
        Ok(acc)
    }

    /// Enclosure of ln|self|; the factor product is positive and the
    /// coefficient enters through ln|coef|.
    pub fn log_abs(&self, basis: &SymbolBasis, prec: u32) -> Result<Enclosure, ExactError> {
        let mag = self.coef.abs();
        let (lo, hi) = ln_rational_bounds(&mag, prec);
        let mut acc = Enclosure::new(lo, hi, prec);
        for (base, form) in &self.factors {
            let exponent = form.eval(basis, prec)?;
            let scaled = match base {
                Base::E => exponent,
                Base::Rat(q) => {
                    let (lo, hi) = ln_rational_bounds(q, prec);
                    exponent.mul(&Enclosure::new(lo, hi, prec))
                }
            };
            acc = acc.add(&scaled);
        }
        Ok(acc)
    }
}

fn factor_eval(
    base: &Base,
    form: &LinearForm,
    basis: &SymbolBasis,
    prec: u32,
) -> Result<Enclosure, ExactError> {
    // Rational base to an integer power is exact.
    if let (Base::Rat(q), Some(c)) = (base, form.as_constant()) {
        if c.is_integer() {
            let n = c.numer();
            if let Ok(small) = u32::try_from(n.abs().clone()) {
                let powered = BigRational::new(q.numer().pow(small), q.denom().pow(small));
                let powered = if n.is_negative() { powered.recip() } else { powered };
                return Ok(Enclosure::from_rational(&powered, prec));
            }
        }
    }
    let exponent = form.eval(basis, prec)?;
    match base {
        Base::E => Ok(exponent.exp()),
        Base::Rat(q) => {
            let (lo, hi) = ln_rational_bounds(q, prec);
            Ok(exponent.mul(&Enclosure::new(lo, hi, prec)).exp())
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coef)?;
        for (base, form) in &self.factors {
            write!(f, "*{}^({})", base, form)?;
        }
        Ok(())
    }
}

/// Canonical finite sum of monomials; the empty sum is exactly 0.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct MonomialSum {
    terms: Vec<Monomial>,
}

/// Outcome of the structural zero test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ZeroCertificate {
    CertifiedZero,
    CertifiedNonzero { reason: String },
    Indeterminate,
}

/// Outcome of a budgeted comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Comparison {
    Less,
    Greater,
    Equal,
    Indeterminate,
}

impl MonomialSum {
    pub fn zero() -> MonomialSum {
        MonomialSum::default()
    }

    pub fn one() -> MonomialSum {
        MonomialSum::from_monomial(Monomial::one())
    }

    pub fn from_rational(q: BigRational) -> MonomialSum {
        match Monomial::rational(q) {
            Some(m) => MonomialSum::from_monomial(m),
            None => MonomialSum::zero(),
        }
    }

    pub fn from_integer(n: i64) -> MonomialSum {
        MonomialSum::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_monomial(m: Monomial) -> MonomialSum {
        MonomialSum { terms: vec![m] }
    }

    pub fn from_terms(terms: Vec<Monomial>) -> MonomialSum {
        MonomialSum { terms }.normalize()
    }

    /// e^form as a sum with one term.
    pub fn exp_form(form: LinearForm) -> MonomialSum {
        MonomialSum::from_monomial(Monomial::exp_form(form))
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.normalize_ref().terms.is_empty()
    }

    /// Canonical form: merge identical signatures, drop zero coefficients,
    /// sort by signature. Idempotent and value-preserving.
    pub fn normalize(&self) -> MonomialSum {
        self.normalize_ref()
    }

    fn normalize_ref(&self) -> MonomialSum {
        let mut grouped: BTreeMap<FactorSignature, BigRational> = BTreeMap::new();
        for t in &self.terms {
            let entry = grouped
                .entry(t.factors.clone())
                .or_insert_with(BigRational::zero);
            *entry += &t.coef;
        }
        let terms = grouped
            .into_iter()
            .filter(|(_, coef)| !coef.is_zero())
            .map(|(factors, coef)| Monomial { coef, factors })
            .collect();
        MonomialSum { terms }
    }

    pub fn add(&self, other: &MonomialSum) -> MonomialSum {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        MonomialSum { terms }.normalize()
    }

    pub fn neg(&self) -> MonomialSum {
        MonomialSum {
            terms: self.terms.iter().map(Monomial::neg).collect(),
        }
    }

    pub fn sub(&self, other: &MonomialSum) -> MonomialSum {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &MonomialSum) -> MonomialSum {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(a.mul(b));
            }
        }
        MonomialSum { terms }.normalize()
    }

    pub fn scale(&self, q: &BigRational) -> MonomialSum {
        if q.is_zero() {
            return MonomialSum::zero();
        }
        MonomialSum {
            terms: self.terms.iter().filter_map(|t| t.scale(q)).collect(),
        }
        .normalize()
    }

    pub fn pow(&self, n: u32) -> MonomialSum {
        let mut acc = MonomialSum::one();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Some(q) when the normalized sum is a plain rational (including 0).
    pub fn as_rational(&self) -> Option<BigRational> {
        let n = self.normalize_ref();
        match n.terms.len() {
            0 => Some(BigRational::zero()),
            1 if n.terms[0].is_rational() => Some(n.terms[0].coef.clone()),
            _ => None,
        }
    }

    /// Some(monomial) when the normalized sum has exactly one term.
    pub fn as_single_monomial(&self) -> Option<Monomial> {
        let n = self.normalize_ref();
        if n.terms.len() == 1 {
            Some(n.terms[0].clone())
        } else {
            None
        }
    }

    pub fn abs_if_sign_definite(&self) -> Option<MonomialSum> {
        let n = self.normalize_ref();
        if n.terms.is_empty() {
            return Some(n);
        }
        if n.terms.len() == 1 {
            return Some(MonomialSum::from_monomial(n.terms[0].abs()));
        }
        None
    }

    /// Certified enclosure of the value. Refining the precision never
    /// widens the result beyond the coarser run's bounds in the callers
    /// that ladder it, because every endpoint error scales with 2^-prec.
    pub fn eval(&self, basis: &SymbolBasis, prec: u32) -> Result<Enclosure, ExactError> {
        let prec = prec.max(super::enclosure::MIN_PRECISION);
        let n = self.normalize_ref();
        let mut acc = Enclosure::zero(prec);
        for t in &n.terms {
            acc = acc.add(&t.eval(basis, prec)?);
        }
        Ok(acc)
    }

    /// Structural zero certification under the Q-independence convention,
    /// with a numeric cross-check on a doubling precision ladder. Numeric
    /// evidence alone never declares zero.
    pub fn certify_nonzero(&self, basis: &SymbolBasis, budget: u32) -> Result<ZeroCertificate, ExactError> {
        let n = self.normalize_ref();
        if n.terms.is_empty() {
            return Ok(ZeroCertificate::CertifiedZero);
        }
        for t in &n.terms {
            for form in t.factors.values() {
                if let Some(i) = form.max_symbol() {
                    if !basis.contains(i) {
                        return Err(ExactError::UnknownSymbol(i));
                    }
                }
            }
        }
        let structural = if n.terms.len() == 1 {
            "single monomial with nonzero rational coefficient".to_string()
        } else {
            format!(
                "{} terms with pairwise-distinct factor signatures over the Q-independent basis",
                n.terms.len()
            )
        };
        let mut prec = 64u32.min(budget.max(super::enclosure::MIN_PRECISION));
        loop {
            let enc = n.eval(basis, prec)?;
            if enc.excludes_zero() {
                return Ok(ZeroCertificate::CertifiedNonzero {
                    reason: format!("{}; {}-bit enclosure excludes 0", structural, prec),
                });
            }
            if prec >= budget {
                return Ok(ZeroCertificate::CertifiedNonzero {
                    reason: format!(
                        "{}; numeric cross-check inconclusive within {} bits",
                        structural, budget
                    ),
                });
            }
            prec = (prec * 2).min(budget);
        }
    }

    /// Compare two sums. Equal only via structural identity of the
    /// normalized difference; otherwise decided by disjoint enclosures on a
    /// doubling ladder up to `budget` bits.
    pub fn compare(&self, other: &MonomialSum, basis: &SymbolBasis, budget: u32) -> Result<Comparison, ExactError> {
        let diff = self.sub(other);
        if diff.terms.is_empty() {
            return Ok(Comparison::Equal);
        }
        let mut prec = 64u32.min(budget.max(super::enclosure::MIN_PRECISION));
        loop {
            let enc = diff.eval(basis, prec)?;
            if enc.lo().is_positive() {
                return Ok(Comparison::Greater);
            }
            if enc.hi().is_negative() {
                return Ok(Comparison::Less);
            }
            if prec >= budget {
                return Ok(Comparison::Indeterminate);
            }
            prec = (prec * 2).min(budget);
        }
    }

    /// Enclosure of ln|value| for a single-signed (single-term) sum.
    pub fn log_abs_single(&self, basis: &SymbolBasis, prec: u32) -> Result<Enclosure, ExactError> {
        match self.as_single_monomial() {
            Some(m) => m.log_abs(basis, prec),
            None => Err(ExactError::NotSingleTerm),
        }
    }
}

impl fmt::Display for MonomialSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}", t)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn basis() -> SymbolBasis {
        SymbolBasis::sqrt_primes(4)
    }

    fn exp_sym(i: usize) -> MonomialSum {
        MonomialSum::exp_form(LinearForm::symbol(i))
    }

    #[test]
    fn normalize_merges_like_terms() {
        // 2 e^{c1} + 3 e^{c1} = 5 e^{c1}
        let a = exp_sym(1).scale(&rat(2, 1));
        let b = exp_sym(1).scale(&rat(3, 1));
        let sum = a.add(&b);
        assert_eq!(sum.terms().len(), 1);
        assert_eq!(sum.terms()[0].coef(), &rat(5, 1));
        assert_eq!(sum.normalize(), sum);
    }

    #[test]
    fn normalize_cancels_to_empty_zero() {
        let a = exp_sym(1);
        let sum = a.sub(&exp_sym(1));
        assert!(sum.is_zero());
        assert!(sum.terms().is_empty());
    }

    #[test]
    fn distinct_signatures_stay_separate() {
        let sum = exp_sym(1).add(&exp_sym(2));
        assert_eq!(sum.terms().len(), 2);
    }

    #[test]
    fn certify_zero_and_nonzero() {
        let b = basis();
        assert_eq!(
            MonomialSum::zero().certify_nonzero(&b, 1024).unwrap(),
            ZeroCertificate::CertifiedZero
        );
        // n^{-c1} - n^{-c2} with n = 2: distinct exponent forms.
        let two = BigRational::from_integer(BigInt::from(2));
        let a = Monomial::rational_power(two.clone(), LinearForm::symbol(1).neg());
        let c = Monomial::rational_power(two, LinearForm::symbol(2).neg());
        let diff = MonomialSum::from_monomial(a).sub(&MonomialSum::from_monomial(c));
        match diff.certify_nonzero(&b, 1024).unwrap() {
            ZeroCertificate::CertifiedNonzero { reason } => {
                assert!(reason.contains("distinct"), "reason: {}", reason);
                assert!(reason.contains("excludes 0"), "reason: {}", reason);
            }
            other => panic!("expected nonzero, got {:?}", other),
        }
    }

    #[test]
    fn certify_nonzero_spec_combination() {
        // J = {(1,0),(0,1),(1,1)}, alpha = (1,-2,3), c = (sqrt2, sqrt3):
        // e^{-sqrt2} - 2 e^{-sqrt3} + 3 e^{-(sqrt2+sqrt3)}
        //   = 0.01831183959509590636259531845188060339... (reference value)
        let b = basis();
        let t1 = MonomialSum::exp_form(LinearForm::symbol(1).neg());
        let t2 = MonomialSum::exp_form(LinearForm::symbol(2).neg()).scale(&rat(-2, 1));
        let t3 = MonomialSum::exp_form(LinearForm::symbol(1).add(&LinearForm::symbol(2)).neg())
            .scale(&rat(3, 1));
        let sum = t1.add(&t2).add(&t3);
        match sum.certify_nonzero(&b, 256).unwrap() {
            ZeroCertificate::CertifiedNonzero { reason } => {
                assert!(reason.contains("excludes 0"), "reason: {}", reason);
            }
            other => panic!("expected nonzero, got {:?}", other),
        }
        let enc = sum.eval(&b, 256).unwrap();
        crate::exactreal::testutil::assert_brackets(&enc, 18311839595095906, 1000000000000000000);
        assert!(enc.lo_rational() > rat(183118, 10000000));
        assert!(enc.hi_rational() < rat(183119, 10000000));
    }

    #[test]
    fn eval_rational_is_tight() {
        let b = basis();
        let third = MonomialSum::from_rational(rat(1, 3));
        let enc = third.eval(&b, 64).unwrap();
        assert!(enc.contains_rational(&rat(1, 3)));
        assert!(enc.width() <= super::super::dyadic::Dyadic::power_of_two(-60));
    }

    #[test]
    fn eval_exp_matches_reference() {
        use crate::exactreal::testutil::assert_brackets;
        let b = basis();
        // e^3 = 20.08553692318766774092...
        let e3 = MonomialSum::exp_form(LinearForm::constant_i64(3));
        let enc = e3.eval(&b, 128).unwrap();
        assert_brackets(&enc, 200855369231876677, 10000000000000000);
        // e^{-sqrt2} = 0.24311673443421421080...
        let ems2 = MonomialSum::exp_form(LinearForm::symbol(1).neg());
        let enc = ems2.eval(&b, 128).unwrap();
        assert_brackets(&enc, 24311673443421421, 100000000000000000);
    }

    #[test]
    fn eval_refinement_narrows() {
        let b = basis();
        let ems2 = MonomialSum::exp_form(LinearForm::symbol(1).neg());
        let coarse = ems2.eval(&b, 64).unwrap();
        let fine = ems2.eval(&b, 128).unwrap();
        assert!(fine.width() <= coarse.width());
        assert!(coarse.intersects(&fine));
    }

    #[test]
    fn compare_rationals_and_merged_forms() {
        let b = basis();
        let half = MonomialSum::from_rational(rat(1, 2));
        let third = MonomialSum::from_rational(rat(1, 3));
        assert_eq!(half.compare(&third, &b, 256).unwrap(), Comparison::Greater);

        // e^{c1} * e^{c2} == e^{c1+c2} after normalization.
        let lhs = exp_sym(1).mul(&exp_sym(2));
        let rhs = MonomialSum::exp_form(LinearForm::symbol(1).add(&LinearForm::symbol(2)));
        assert_eq!(lhs.compare(&rhs, &b, 256).unwrap(), Comparison::Equal);

        // e^3 > 20.
        let e3 = MonomialSum::exp_form(LinearForm::constant_i64(3));
        let twenty = MonomialSum::from_integer(20);
        assert_eq!(e3.compare(&twenty, &b, 256).unwrap(), Comparison::Greater);
    }

    #[test]
    fn monomial_recip_is_exact_inverse() {
        let two = BigRational::from_integer(BigInt::from(2));
        let m = Monomial::rational_power(two, LinearForm::symbol(1))
            .with_coef(rat(3, 4))
            .mul(&Monomial::exp_form(LinearForm::constant_i64(2)));
        let product = MonomialSum::from_monomial(m.mul(&m.recip()));
        assert_eq!(product, MonomialSum::one());
    }

    #[test]
    fn log_abs_matches_reference() {
        let b = basis();
        // ln(e^10 * 10^{-sqrt2}) = 10 - sqrt2 ln 10 = 6.74365293296970631077...
        let m = Monomial::exp_form(LinearForm::constant_i64(10)).mul(&Monomial::rational_power(
            BigRational::from_integer(BigInt::from(10)),
            LinearForm::symbol(1).neg(),
        ));
        let enc = m.log_abs(&b, 128).unwrap();
        crate::exactreal::testutil::assert_brackets(&enc, 674365293296970631, 100000000000000000);
    }
}
