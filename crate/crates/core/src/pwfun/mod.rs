//! Exact piecewise-exponential functions on [0,1] or [0,+inf).
//!
//! A function is a finite list of pieces with pairwise-disjoint interiors,
//! each piece carrying an exponential-sum expression
//! `x |-> sum_i coef_i * e^(rate_i * x)`; the function is 0 off all pieces.
//! Values are classes modulo equality a.e., so behavior at piece
//! boundaries and on degenerate intervals is immaterial.

mod algebra;
mod integral;
mod measure;

pub use integral::{l1_norm, l1_norm_exact, rho, rho_exact};
pub use measure::{
    ess_sup, ess_sup_domain, ess_sup_exact, full_region, superlevel_measure,
    superlevel_measure_exact,
};

use num_rational::BigRational;
use num_traits::Zero;
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

use crate::exactreal::{
    Comparison, Enclosure, ExactError, LinearForm, Monomial, MonomialSum, SymbolBasis,
    DEFAULT_BUDGET,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    UnitInterval,
    HalfLine,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum PwError {
    #[error("operands live on different domains")]
    DomainMismatch,
    #[error("point lies outside the domain")]
    OutOfDomain,
    #[error("region of integration or supremum is empty")]
    EmptyRegion,
    #[error("piece on an unbounded interval does not decay")]
    NonIntegrable,
    #[error("set has infinite measure")]
    InfiniteMeasure,
    #[error("epsilon must be strictly positive")]
    NonpositiveEpsilon,
    #[error("invalid interval: {0}")]
    InvalidInterval(String),
    #[error("comparison of endpoint values exhausted its budget")]
    UndecidedComparison,
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// Interval endpoint values are restricted to shapes the constructions
/// need: rationals, or rational multiples of e^k with integer k.
fn endpoint_admissible(v: &MonomialSum) -> bool {
    let n = v.normalize();
    match n.terms().len() {
        0 => true,
        1 => {
            let m = &n.terms()[0];
            m.factors().iter().all(|(base, form)| {
                matches!(base, crate::exactreal::Base::E)
                    && form.as_constant().map(|c| c.is_integer()).unwrap_or(false)
            })
        }
        _ => false,
    }
}

/// Total-order comparison of two admissible endpoint values.
pub(crate) fn cmp_values(
    a: &MonomialSum,
    b: &MonomialSum,
    basis: &SymbolBasis,
) -> Result<Ordering, PwError> {
    match a.compare(b, basis, DEFAULT_BUDGET)? {
        Comparison::Less => Ok(Ordering::Less),
        Comparison::Greater => Ok(Ordering::Greater),
        Comparison::Equal => Ok(Ordering::Equal),
        Comparison::Indeterminate => Err(PwError::UndecidedComparison),
    }
}

/// A closed-by-default interval with exactly representable endpoints.
/// `hi = None` stands for +infinity (half-line pieces only).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    lo: MonomialSum,
    hi: Option<MonomialSum>,
    lo_closed: bool,
    hi_closed: bool,
}

impl Interval {
    pub fn new(lo: MonomialSum, hi: MonomialSum, basis: &SymbolBasis) -> Result<Interval, PwError> {
        let lo = lo.normalize();
        let hi = hi.normalize();
        if !endpoint_admissible(&lo) || !endpoint_admissible(&hi) {
            return Err(PwError::InvalidInterval(format!(
                "endpoint not representable: [{}, {}]",
                lo, hi
            )));
        }
        if cmp_values(&lo, &hi, basis)? == Ordering::Greater {
            return Err(PwError::InvalidInterval(format!("{} > {}", lo, hi)));
        }
        Ok(Interval { lo, hi: Some(hi), lo_closed: true, hi_closed: true })
    }

    pub fn rational(lo: BigRational, hi: BigRational) -> Result<Interval, PwError> {
        if lo > hi {
            return Err(PwError::InvalidInterval(format!("{} > {}", lo, hi)));
        }
        Ok(Interval {
            lo: MonomialSum::from_rational(lo),
            hi: Some(MonomialSum::from_rational(hi)),
            lo_closed: true,
            hi_closed: true,
        })
    }

    pub fn unbounded(lo: MonomialSum) -> Result<Interval, PwError> {
        let lo = lo.normalize();
        if !endpoint_admissible(&lo) {
            return Err(PwError::InvalidInterval(format!(
                "endpoint not representable: {}",
                lo
            )));
        }
        Ok(Interval { lo, hi: None, lo_closed: true, hi_closed: false })
    }

    pub fn lo(&self) -> &MonomialSum {
        &self.lo
    }

    pub fn hi(&self) -> Option<&MonomialSum> {
        self.hi.as_ref()
    }

    pub fn is_bounded(&self) -> bool {
        self.hi.is_some()
    }

    pub fn lo_closed(&self) -> bool {
        self.lo_closed
    }

    pub fn hi_closed(&self) -> bool {
        self.hi_closed
    }

    /// Exact length; None for unbounded intervals.
    pub fn length(&self) -> Option<MonomialSum> {
        self.hi.as_ref().map(|hi| hi.sub(&self.lo))
    }

    pub fn rational_endpoints(&self) -> Option<(BigRational, BigRational)> {
        let lo = self.lo.as_rational()?;
        let hi = self.hi.as_ref()?.as_rational()?;
        Some((lo, hi))
    }

    pub fn is_degenerate(&self, basis: &SymbolBasis) -> Result<bool, PwError> {
        match &self.hi {
            None => Ok(false),
            Some(hi) => Ok(cmp_values(&self.lo, hi, basis)? == Ordering::Equal),
        }
    }

    pub fn contains_rational(&self, x: &BigRational, basis: &SymbolBasis) -> Result<bool, PwError> {
        let xs = MonomialSum::from_rational(x.clone());
        let lo_cmp = cmp_values(&self.lo, &xs, basis)?;
        let below = lo_cmp == Ordering::Less || (lo_cmp == Ordering::Equal && self.lo_closed);
        if !below {
            return Ok(false);
        }
        match &self.hi {
            None => Ok(true),
            Some(hi) => {
                let hi_cmp = cmp_values(&xs, hi, basis)?;
                Ok(hi_cmp == Ordering::Less || (hi_cmp == Ordering::Equal && self.hi_closed))
            }
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.hi {
            Some(hi) => write!(f, "[{}, {}]", self.lo, hi),
            None => write!(f, "[{}, +inf)", self.lo),
        }
    }
}

/// One summand of an exponential-sum expression: `coef * e^(rate * x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpTerm {
    pub coef: MonomialSum,
    pub rate: LinearForm,
}

impl ExpTerm {
    pub fn constant(coef: MonomialSum) -> ExpTerm {
        ExpTerm { coef, rate: LinearForm::zero() }
    }

    /// Exact value at a rational point: coef * e^(rate * x) as a monomial sum.
    pub fn value_at(&self, x: &BigRational) -> MonomialSum {
        let exponent = self.rate.scale(x);
        self.coef
            .mul(&MonomialSum::from_monomial(Monomial::exp_form(exponent)))
    }
}

/// Canonical expression: rates pairwise distinct, sorted; empty = zero.
pub(crate) fn normalize_terms(terms: Vec<ExpTerm>) -> Vec<ExpTerm> {
    let mut grouped: BTreeMap<LinearForm, MonomialSum> = BTreeMap::new();
    for t in terms {
        let entry = grouped.entry(t.rate).or_insert_with(MonomialSum::zero);
        *entry = entry.add(&t.coef);
    }
    grouped
        .into_iter()
        .filter(|(_, coef)| !coef.is_zero())
        .map(|(rate, coef)| ExpTerm { coef, rate })
        .collect()
}

pub(crate) fn terms_value_at(terms: &[ExpTerm], x: &BigRational) -> MonomialSum {
    let mut acc = MonomialSum::zero();
    for t in terms {
        acc = acc.add(&t.value_at(x));
    }
    acc
}

/// A maximal interval carrying one expression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpPiece {
    pub interval: Interval,
    pub terms: Vec<ExpTerm>,
}

impl ExpPiece {
    pub fn new(interval: Interval, terms: Vec<ExpTerm>) -> ExpPiece {
        ExpPiece { interval, terms: normalize_terms(terms) }
    }

    pub fn indicator(interval: Interval) -> ExpPiece {
        ExpPiece::new(interval, vec![ExpTerm::constant(MonomialSum::one())])
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Some(coef) when the piece is constant.
    pub fn constant_value(&self) -> Option<&MonomialSum> {
        if self.terms.len() == 1 && self.terms[0].rate.is_zero() {
            Some(&self.terms[0].coef)
        } else {
            None
        }
    }
}

impl fmt::Display for ExpPiece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(c) = self.constant_value() {
            write!(f, "{} on {}", c, self.interval)
        } else {
            let parts: Vec<String> = self
                .terms
                .iter()
                .map(|t| format!("({})*e^(({})x)", t.coef, t.rate))
                .collect();
            write!(f, "{} on {}", parts.join(" + "), self.interval)
        }
    }
}

/// Piecewise-exponential function, identified with its a.e. class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PwExpFun {
    domain: Domain,
    pieces: Vec<ExpPiece>,
}

impl PwExpFun {
    pub fn zero(domain: Domain) -> PwExpFun {
        PwExpFun { domain, pieces: Vec::new() }
    }

    /// Canonicalize: drop zero and degenerate pieces, sort by left endpoint,
    /// verify disjoint interiors and domain membership.
    pub fn new(
        domain: Domain,
        pieces: Vec<ExpPiece>,
        basis: &SymbolBasis,
    ) -> Result<PwExpFun, PwError> {
        let mut kept: Vec<ExpPiece> = Vec::new();
        for p in pieces {
            if p.is_zero() || p.interval.is_degenerate(basis)? {
                continue;
            }
            if !p.interval.is_bounded() && domain == Domain::UnitInterval {
                return Err(PwError::InvalidInterval("unbounded piece on [0,1]".into()));
            }
            let zero = MonomialSum::zero();
            if cmp_values(&p.interval.lo, &zero, basis)? == Ordering::Less {
                return Err(PwError::InvalidInterval("piece extends below 0".into()));
            }
            if domain == Domain::UnitInterval {
                let one = MonomialSum::one();
                if let Some(hi) = &p.interval.hi {
                    if cmp_values(hi, &one, basis)? == Ordering::Greater {
                        return Err(PwError::InvalidInterval("piece extends above 1".into()));
                    }
                }
            }
            kept.push(p);
        }
        // Insertion sort with the certified comparator.
        let mut sorted: Vec<ExpPiece> = Vec::with_capacity(kept.len());
        for p in kept {
            let mut idx = sorted.len();
            for (i, q) in sorted.iter().enumerate() {
                if cmp_values(&p.interval.lo, &q.interval.lo, basis)? == Ordering::Less {
                    idx = i;
                    break;
                }
            }
            sorted.insert(idx, p);
        }
        for w in sorted.windows(2) {
            let hi = w[0].interval.hi.as_ref().ok_or_else(|| {
                PwError::InvalidInterval("unbounded piece is not last".into())
            })?;
            if cmp_values(hi, &w[1].interval.lo, basis)? == Ordering::Greater {
                return Err(PwError::InvalidInterval(format!(
                    "piece interiors overlap: {} and {}",
                    w[0].interval, w[1].interval
                )));
            }
        }
        Ok(PwExpFun { domain, pieces: sorted })
    }

    pub fn indicator(
        domain: Domain,
        interval: Interval,
        basis: &SymbolBasis,
    ) -> Result<PwExpFun, PwError> {
        PwExpFun::new(domain, vec![ExpPiece::indicator(interval)], basis)
    }

    pub fn scaled_indicator(
        domain: Domain,
        interval: Interval,
        coef: MonomialSum,
        basis: &SymbolBasis,
    ) -> Result<PwExpFun, PwError> {
        PwExpFun::new(
            domain,
            vec![ExpPiece::new(interval, vec![ExpTerm::constant(coef)])],
            basis,
        )
    }

    pub fn single_piece(
        domain: Domain,
        interval: Interval,
        terms: Vec<ExpTerm>,
        basis: &SymbolBasis,
    ) -> Result<PwExpFun, PwError> {
        PwExpFun::new(domain, vec![ExpPiece::new(interval, terms)], basis)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn pieces(&self) -> &[ExpPiece] {
        &self.pieces
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    /// True when every piece is an indicator (constant 1).
    pub fn is_indicator(&self) -> bool {
        self.pieces.iter().all(|p| {
            p.constant_value()
                .map(|c| c == &MonomialSum::one())
                .unwrap_or(false)
        })
    }

    fn check_in_domain(&self, x: &BigRational) -> Result<(), PwError> {
        if x < &BigRational::zero() {
            return Err(PwError::OutOfDomain);
        }
        if self.domain == Domain::UnitInterval && x > &BigRational::from_integer(1.into()) {
            return Err(PwError::OutOfDomain);
        }
        Ok(())
    }

    /// Exact symbolic value at a rational point. Values at shared piece
    /// boundaries follow the first matching piece (a.e. classes).
    pub fn evaluate_exact(
        &self,
        x: &BigRational,
        basis: &SymbolBasis,
    ) -> Result<MonomialSum, PwError> {
        self.check_in_domain(x)?;
        for p in &self.pieces {
            if p.interval.contains_rational(x, basis)? {
                return Ok(terms_value_at(&p.terms, x));
            }
        }
        Ok(MonomialSum::zero())
    }

    /// Certified enclosure of f(x).
    pub fn evaluate(
        &self,
        x: &MonomialSum,
        prec: u32,
        basis: &SymbolBasis,
    ) -> Result<Enclosure, PwError> {
        if let Some(q) = x.as_rational() {
            let v = self.evaluate_exact(&q, basis)?;
            return Ok(v.eval(basis, prec)?);
        }
        let zero = MonomialSum::zero();
        if cmp_values(x, &zero, basis)? == Ordering::Less {
            return Err(PwError::OutOfDomain);
        }
        if self.domain == Domain::UnitInterval
            && cmp_values(x, &MonomialSum::one(), basis)? == Ordering::Greater
        {
            return Err(PwError::OutOfDomain);
        }
        for p in &self.pieces {
            let below = cmp_values(&p.interval.lo, x, basis)? != Ordering::Greater;
            let above = match &p.interval.hi {
                None => true,
                Some(hi) => cmp_values(x, hi, basis)? != Ordering::Greater,
            };
            if below && above {
                let xe = x.eval(basis, prec)?;
                let mut acc = Enclosure::zero(prec);
                for t in &p.terms {
                    let rate = t.rate.eval(basis, prec)?;
                    let coef = t.coef.eval(basis, prec)?;
                    acc = acc.add(&coef.mul(&rate.mul(&xe).exp()));
                }
                return Ok(acc);
            }
        }
        Ok(Enclosure::zero(prec))
    }

    /// Exact measure of the support (union of piece intervals).
    pub fn support_measure_exact(&self) -> Result<MonomialSum, PwError> {
        let mut acc = MonomialSum::zero();
        for p in &self.pieces {
            match p.interval.length() {
                Some(len) => acc = acc.add(&len),
                None => return Err(PwError::InfiniteMeasure),
            }
        }
        Ok(acc)
    }

    /// Equality almost everywhere (class equality in L0).
    pub fn ae_eq(&self, other: &PwExpFun, basis: &SymbolBasis) -> Result<bool, PwError> {
        let diff = algebra::linear_combine(
            &MonomialSum::one(),
            self,
            &MonomialSum::from_integer(-1),
            other,
            basis,
        )?;
        Ok(diff.is_zero())
    }
}

impl fmt::Display for PwExpFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pieces.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.pieces.iter().map(|p| format!("{}", p)).collect();
        write!(f, "{}", parts.join(" ; "))
    }
}

pub use algebra::{linear_combine, multiply, power, scale};

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use num_bigint::BigInt;

    pub(crate) fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    pub(crate) fn chi(lo: (i64, i64), hi: (i64, i64), b: &SymbolBasis) -> PwExpFun {
        PwExpFun::indicator(
            Domain::UnitInterval,
            Interval::rational(rat(lo.0, lo.1), rat(hi.0, hi.1)).unwrap(),
            b,
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::{chi, rat};
    use super::*;

    fn basis() -> SymbolBasis {
        SymbolBasis::sqrt_primes(4)
    }

    #[test]
    fn indicator_evaluates_to_one_on_support() {
        let b = basis();
        let f = chi((0, 1), (1, 2), &b);
        assert_eq!(f.evaluate_exact(&rat(1, 4), &b).unwrap(), MonomialSum::one());
        assert_eq!(f.evaluate_exact(&rat(3, 4), &b).unwrap(), MonomialSum::zero());
        let enc = f
            .evaluate(&MonomialSum::from_rational(rat(1, 4)), 64, &b)
            .unwrap();
        assert!(enc.is_exact());
        assert!(enc.contains_rational(&rat(1, 1)));
    }

    #[test]
    fn exp_piece_evaluates_at_endpoint_exactly() {
        let b = basis();
        // e^{-x} on [0,1] at x = 0 -> 1 exactly.
        let f = PwExpFun::single_piece(
            Domain::UnitInterval,
            Interval::rational(rat(0, 1), rat(1, 1)).unwrap(),
            vec![ExpTerm { coef: MonomialSum::one(), rate: LinearForm::constant_i64(-1) }],
            &b,
        )
        .unwrap();
        assert_eq!(f.evaluate_exact(&rat(0, 1), &b).unwrap(), MonomialSum::one());
        // e^{-sqrt2 x} at x = 1 -> e^{-sqrt2} = 0.24311673443421421080...
        let g = PwExpFun::single_piece(
            Domain::UnitInterval,
            Interval::rational(rat(0, 1), rat(1, 1)).unwrap(),
            vec![ExpTerm { coef: MonomialSum::one(), rate: LinearForm::symbol(1).neg() }],
            &b,
        )
        .unwrap();
        let enc = g.evaluate(&MonomialSum::one(), 128, &b).unwrap();
        crate::exactreal::testutil::assert_brackets(&enc, 24311673443421421, 100000000000000000);
    }

    #[test]
    fn out_of_domain_is_rejected() {
        let b = basis();
        let f = chi((0, 1), (1, 2), &b);
        assert_eq!(f.evaluate_exact(&rat(3, 2), &b), Err(PwError::OutOfDomain));
        assert_eq!(f.evaluate_exact(&rat(-1, 2), &b), Err(PwError::OutOfDomain));
    }

    #[test]
    fn canonicalization_rejects_overlap_and_drops_degenerate() {
        let b = basis();
        let p1 = ExpPiece::indicator(Interval::rational(rat(0, 1), rat(1, 2)).unwrap());
        let p2 = ExpPiece::indicator(Interval::rational(rat(1, 4), rat(3, 4)).unwrap());
        assert!(matches!(
            PwExpFun::new(Domain::UnitInterval, vec![p1.clone(), p2], &b),
            Err(PwError::InvalidInterval(_))
        ));
        let degenerate = ExpPiece::indicator(Interval::rational(rat(1, 3), rat(1, 3)).unwrap());
        let f = PwExpFun::new(Domain::UnitInterval, vec![p1, degenerate], &b).unwrap();
        assert_eq!(f.pieces().len(), 1);
    }

    #[test]
    fn endpoint_shapes_are_validated() {
        let b = basis();
        let e2 = MonomialSum::exp_form(LinearForm::constant_i64(2));
        assert!(Interval::new(MonomialSum::zero(), e2, &b).is_ok());
        let es2 = MonomialSum::exp_form(LinearForm::symbol(1));
        assert!(matches!(
            Interval::new(MonomialSum::zero(), es2, &b),
            Err(PwError::InvalidInterval(_))
        ));
    }

    #[test]
    fn support_measure_sums_piece_lengths() {
        let b = basis();
        let f = PwExpFun::new(
            Domain::UnitInterval,
            vec![
                ExpPiece::indicator(Interval::rational(rat(0, 1), rat(1, 4)).unwrap()),
                ExpPiece::indicator(Interval::rational(rat(1, 2), rat(1, 1)).unwrap()),
            ],
            &b,
        )
        .unwrap();
        assert_eq!(
            f.support_measure_exact().unwrap().as_rational().unwrap(),
            rat(3, 4)
        );
    }
}
