//! Function sequences, the product metric D, and convergence-mode
//! checkers.
//!
//! Convergence over an infinite index set is undecidable from finitely
//! many evaluations, so verdicts separate two kinds of answer: certified
//! ones, derived from audited closed-form metadata attached to the
//! sequence, and finite-horizon evidence. A `Certified*` status is only
//! ever produced from metadata that was checked against direct
//! computation at construction time.

mod checks;
mod metric;

pub use checks::{
    check_almost_uniform, check_in_measure, check_indicator_dichotomy, check_l1, check_pointwise,
    check_pointwise_at, check_uniform, detect_alpha_trend, AlphaTrend, DichotomyMode,
};
pub use metric::{d_metric, truncate};

use num_rational::BigRational;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

use crate::exactreal::{Comparison, MonomialSum, SymbolBasis, DEFAULT_BUDGET};
use crate::pwfun::{self, Domain, Interval, PwError, PwExpFun};

/// Default evaluation horizon (2^12) for finite-horizon evidence.
pub const DEFAULT_HORIZON: u32 = 4096;

/// Default audit horizon for metadata at construction.
pub const AUDIT_HORIZON: u32 = 32;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SeqError {
    #[error("sequences live on different domains")]
    DomainMismatch,
    #[error("metadata audit failed: {0}")]
    AuditFailed(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error(transparent)]
    Pw(#[from] PwError),
}

impl From<crate::exactreal::ExactError> for SeqError {
    fn from(e: crate::exactreal::ExactError) -> Self {
        SeqError::Pw(PwError::Exact(e))
    }
}

pub type GenFn = Arc<dyn Fn(u32) -> PwExpFun + Send + Sync>;
pub type FormulaFn = Arc<dyn Fn(u32) -> MonomialSum + Send + Sync>;
pub type ProfileFn = Arc<dyn Fn(&BigRational) -> MonomialSum + Send + Sync>;

/// Declared asymptotic behavior of a closed-form quantity.
#[derive(Clone)]
pub enum Trend {
    ToZero,
    ToInfinity,
    /// Equal to this value for every n.
    Constant(MonomialSum),
    /// At least this positive rational for every n.
    BoundedBelow(BigRational),
}

impl fmt::Debug for Trend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Trend::ToZero => write!(f, "ToZero"),
            Trend::ToInfinity => write!(f, "ToInfinity"),
            Trend::Constant(c) => write!(f, "Constant({})", c),
            Trend::BoundedBelow(q) => write!(f, "BoundedBelow({})", q),
        }
    }
}

/// A closed form for a per-index quantity (support measure, sup norm, L1
/// norm), with its declared trend and a printable description.
#[derive(Clone)]
pub struct NormMeta {
    pub formula: Option<FormulaFn>,
    pub trend: Trend,
    pub description: String,
}

impl NormMeta {
    pub fn new(formula: FormulaFn, trend: Trend, description: &str) -> Self {
        NormMeta { formula: Some(formula), trend, description: description.to_string() }
    }

    pub fn trend_only(trend: Trend, description: &str) -> Self {
        NormMeta { formula: None, trend, description: description.to_string() }
    }
}

/// Certified pointwise behavior of the sequence.
#[derive(Clone)]
pub enum PointwiseMeta {
    /// Indicator-shaped terms whose supports sweep the whole domain: at
    /// every point x the sequence attains profile(x) infinitely often and
    /// 0 infinitely often.
    Sweeping { profile: ProfileFn, description: String },
    /// Supports eventually avoid every point: f_n(x) = 0 for all large n.
    EventuallyZero { description: String },
}

/// Template for the almost-uniform exceptional-set search, taken from the
/// corresponding existence proof.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AuTemplate {
    /// Supports shrink toward 0: E = [0, eps/2] works once the support
    /// right endpoints drop below eps/2.
    LeftShrink,
    /// Sweeping supports: every candidate E of measure < eps misses a
    /// window of each late generation, so the sup off E stays put.
    SweepingObstruction,
}

/// Membership of a point in limsup E_n.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    InLimsup,
    NotInLimsup,
    Unknown,
}

/// Tail behavior descriptor for a structured set sequence.
#[derive(Clone)]
pub enum TailDescriptor {
    /// Right endpoints tend to 0 and no point lies in infinitely many E_n;
    /// limsup E_n is empty.
    ShrinksToNull,
    /// Every point of the domain lies in infinitely many E_n.
    SweepsAll,
    /// Points of the listed intervals lie in only finitely many E_n;
    /// membership elsewhere is undetermined.
    EventuallyAvoids { avoided: Vec<Interval> },
    /// limsup E_n equals exactly this finite union of intervals and points.
    Custom { intervals: Vec<Interval>, points: Vec<BigRational> },
}

/// A sequence of finite unions of intervals with a declared tail.
#[derive(Clone)]
pub struct StructuredSetSeq {
    domain: Domain,
    gen: Arc<dyn Fn(u32) -> Vec<Interval> + Send + Sync>,
    tail: TailDescriptor,
}

impl StructuredSetSeq {
    /// Build and spot-check the descriptor against the generator on the
    /// audit horizon.
    pub fn new(
        domain: Domain,
        gen: Arc<dyn Fn(u32) -> Vec<Interval> + Send + Sync>,
        tail: TailDescriptor,
        basis: &SymbolBasis,
        audit_horizon: u32,
    ) -> Result<Self, SeqError> {
        let seq = StructuredSetSeq { domain, gen, tail };
        seq.audit(basis, audit_horizon)?;
        Ok(seq)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn sets(&self, n: u32) -> Vec<Interval> {
        assert!(n >= 1, "set sequences are indexed from 1");
        (self.gen)(n)
    }

    pub fn tail(&self) -> &TailDescriptor {
        &self.tail
    }

    pub fn member(&self, x: &BigRational, n: u32, basis: &SymbolBasis) -> Result<bool, SeqError> {
        for iv in self.sets(n) {
            if iv.contains_rational(x, basis)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Decide membership in limsup E_n from the tail descriptor.
    pub fn limsup_membership(
        &self,
        x: &BigRational,
        basis: &SymbolBasis,
    ) -> Result<Membership, SeqError> {
        match &self.tail {
            TailDescriptor::ShrinksToNull => Ok(Membership::NotInLimsup),
            TailDescriptor::SweepsAll => Ok(Membership::InLimsup),
            TailDescriptor::EventuallyAvoids { avoided } => {
                for iv in avoided {
                    if iv.contains_rational(x, basis)? {
                        return Ok(Membership::NotInLimsup);
                    }
                }
                Ok(Membership::Unknown)
            }
            TailDescriptor::Custom { intervals, points } => {
                for iv in intervals {
                    if iv.contains_rational(x, basis)? {
                        return Ok(Membership::InLimsup);
                    }
                }
                if points.contains(x) {
                    return Ok(Membership::InLimsup);
                }
                Ok(Membership::NotInLimsup)
            }
        }
    }

    /// Exact measure of limsup E_n, when the descriptor pins it down.
    pub fn limsup_measure(&self) -> Option<MonomialSum> {
        match &self.tail {
            TailDescriptor::ShrinksToNull => Some(MonomialSum::zero()),
            TailDescriptor::SweepsAll => match self.domain {
                Domain::UnitInterval => Some(MonomialSum::one()),
                Domain::HalfLine => None,
            },
            TailDescriptor::EventuallyAvoids { .. } => None,
            TailDescriptor::Custom { intervals, .. } => {
                let mut acc = MonomialSum::zero();
                for iv in intervals {
                    acc = acc.add(&iv.length()?);
                }
                Some(acc)
            }
        }
    }

    fn audit(&self, basis: &SymbolBasis, horizon: u32) -> Result<(), SeqError> {
        let horizon = horizon.max(4);
        match &self.tail {
            TailDescriptor::ShrinksToNull => {
                let right = |n: u32| -> Result<MonomialSum, SeqError> {
                    let sets = self.sets(n);
                    let mut best: Option<MonomialSum> = None;
                    for iv in sets {
                        let hi = iv.hi().cloned().ok_or_else(|| {
                            SeqError::AuditFailed("ShrinksToNull with unbounded set".into())
                        })?;
                        best = Some(match best {
                            None => hi,
                            Some(b) => {
                                if b.compare(&hi, basis, DEFAULT_BUDGET)? == Comparison::Less {
                                    hi
                                } else {
                                    b
                                }
                            }
                        });
                    }
                    best.ok_or_else(|| SeqError::AuditFailed("empty set in sequence".into()))
                };
                let mut n = 1u32;
                while 2 * n <= horizon {
                    let a = right(n)?;
                    let b = right(2 * n)?;
                    if a.compare(&b, basis, DEFAULT_BUDGET)? == Comparison::Less {
                        return Err(SeqError::AuditFailed(format!(
                            "right endpoints increase from n={} to n={}",
                            n,
                            2 * n
                        )));
                    }
                    n *= 2;
                }
                let zero = BigRational::from_integer(0.into());
                for n in 1..=horizon {
                    if self.member(&zero, n, basis)? {
                        return Err(SeqError::AuditFailed(format!("0 lies in E_{}", n)));
                    }
                }
                Ok(())
            }
            TailDescriptor::SweepsAll => {
                for k in 0..=8u32 {
                    let x = BigRational::new(k.into(), 8.into());
                    let mut front = 0u32;
                    let mut back = 0u32;
                    for n in 1..=horizon {
                        if self.member(&x, n, basis)? {
                            if n * 2 > horizon {
                                back += 1;
                            } else {
                                front += 1;
                            }
                        }
                    }
                    if front == 0 || back == 0 {
                        return Err(SeqError::AuditFailed(format!(
                            "x = {} not swept (front {}, back {})",
                            x, front, back
                        )));
                    }
                }
                Ok(())
            }
            TailDescriptor::EventuallyAvoids { avoided } => {
                for iv in avoided {
                    if let Some((lo, hi)) = iv.rational_endpoints() {
                        let mid = (lo + hi) / BigRational::from_integer(2.into());
                        let mut last_hit = 0u32;
                        for n in 1..=horizon {
                            if self.member(&mid, n, basis)? {
                                last_hit = n;
                            }
                        }
                        if last_hit * 2 > horizon {
                            return Err(SeqError::AuditFailed(format!(
                                "avoided point {} still hit at n={}",
                                mid, last_hit
                            )));
                        }
                    }
                }
                Ok(())
            }
            TailDescriptor::Custom { intervals, points } => {
                let recurs = |x: &BigRational| -> Result<bool, SeqError> {
                    for n in (horizon / 2).max(1)..=horizon {
                        if self.member(x, n, basis)? {
                            return Ok(true);
                        }
                    }
                    Ok(false)
                };
                for x in points {
                    if !recurs(x)? {
                        return Err(SeqError::AuditFailed(format!(
                            "declared limsup point {} never recurs",
                            x
                        )));
                    }
                }
                for iv in intervals {
                    if let Some((lo, hi)) = iv.rational_endpoints() {
                        let mid = (lo + hi) / BigRational::from_integer(2.into());
                        if !recurs(&mid)? {
                            return Err(SeqError::AuditFailed(format!(
                                "declared limsup interval around {} never recurs",
                                mid
                            )));
                        }
                    }
                }
                Ok(())
            }
        }
    }
}

/// Optional certified metadata for a sequence.
#[derive(Clone, Default)]
pub struct SeqMeta {
    pub support_measure: Option<NormMeta>,
    pub sup_norm: Option<NormMeta>,
    pub l1_norm: Option<NormMeta>,
    pub pointwise: Option<PointwiseMeta>,
    pub supports: Option<StructuredSetSeq>,
    pub almost_uniform: Option<AuTemplate>,
    pub eventually_null_after: Option<u32>,
}

/// An indexed sequence n -> PwExpFun (n >= 1) with audited metadata.
#[derive(Clone)]
pub struct FunSeq {
    domain: Domain,
    gen: GenFn,
    meta: SeqMeta,
}

impl FunSeq {
    /// Bare sequence without certificates.
    pub fn bare(domain: Domain, gen: GenFn) -> FunSeq {
        FunSeq { domain, gen, meta: SeqMeta::default() }
    }

    pub fn zero(domain: Domain) -> FunSeq {
        let meta = SeqMeta {
            eventually_null_after: Some(0),
            pointwise: Some(PointwiseMeta::EventuallyZero {
                description: "the zero sequence".to_string(),
            }),
            ..SeqMeta::default()
        };
        FunSeq { domain, gen: Arc::new(move |_| PwExpFun::zero(domain)), meta }
    }

    /// Attach metadata, auditing every closed form against direct
    /// computation for n <= audit_horizon.
    pub fn with_meta(
        domain: Domain,
        gen: GenFn,
        meta: SeqMeta,
        basis: &SymbolBasis,
        audit_horizon: u32,
    ) -> Result<FunSeq, SeqError> {
        let seq = FunSeq { domain, gen, meta };
        seq.audit(basis, audit_horizon)?;
        Ok(seq)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn generate(&self, n: u32) -> PwExpFun {
        assert!(n >= 1, "function sequences are indexed from 1");
        (self.gen)(n)
    }

    pub fn meta(&self) -> &SeqMeta {
        &self.meta
    }

    fn audit(&self, basis: &SymbolBasis, horizon: u32) -> Result<(), SeqError> {
        let horizon = horizon.max(2);
        let region = pwfun::full_region(self.domain);
        for n in 1..=horizon {
            let f = self.generate(n);
            if let Some(m) = &self.meta.support_measure {
                if let Some(formula) = &m.formula {
                    let declared = formula(n);
                    let computed = f.support_measure_exact()?;
                    if !declared.sub(&computed).is_zero() {
                        return Err(SeqError::AuditFailed(format!(
                            "support measure at n={}: declared {}, computed {}",
                            n, declared, computed
                        )));
                    }
                }
            }
            if let Some(m) = &self.meta.sup_norm {
                let declared = match (&m.formula, &m.trend) {
                    (Some(formula), _) => Some(formula(n)),
                    (None, Trend::Constant(c)) => Some(c.clone()),
                    _ => None,
                };
                if let Some(declared) = declared {
                    match pwfun::ess_sup_exact(&f, &region, basis)? {
                        Some(computed) => {
                            if !declared.sub(&computed).is_zero() {
                                return Err(SeqError::AuditFailed(format!(
                                    "sup norm at n={}: declared {}, computed {}",
                                    n, declared, computed
                                )));
                            }
                        }
                        None => {
                            let enc = pwfun::ess_sup(&f, &region, 96, basis)?;
                            let val = declared.eval(basis, 96)?;
                            if !enc.intersects(&val) {
                                return Err(SeqError::AuditFailed(format!(
                                    "sup norm at n={}: declared {} outside computed {}",
                                    n, declared, enc
                                )));
                            }
                        }
                    }
                }
                if let Trend::BoundedBelow(q) = &m.trend {
                    let enc = pwfun::ess_sup(&f, &region, 96, basis)?;
                    if enc.hi_rational() < *q {
                        return Err(SeqError::AuditFailed(format!(
                            "sup norm at n={} is below the declared bound {}",
                            n, q
                        )));
                    }
                }
            }
            if let Some(m) = &self.meta.l1_norm {
                if let Some(formula) = &m.formula {
                    let declared = formula(n);
                    match pwfun::l1_norm_exact(&f, basis)? {
                        Some(computed) => {
                            if !declared.sub(&computed).is_zero() {
                                return Err(SeqError::AuditFailed(format!(
                                    "L1 norm at n={}: declared {}, computed {}",
                                    n, declared, computed
                                )));
                            }
                        }
                        None => {
                            let enc = pwfun::l1_norm(&f, 96, basis)?;
                            let val = declared.eval(basis, 96)?;
                            if !enc.intersects(&val) {
                                return Err(SeqError::AuditFailed(format!(
                                    "L1 norm at n={}: declared {} outside computed {}",
                                    n, declared, enc
                                )));
                            }
                        }
                    }
                }
            }
            if let Some(PointwiseMeta::Sweeping { profile, .. }) = &self.meta.pointwise {
                let x = BigRational::new(1.into(), 3.into());
                let v = f.evaluate_exact(&x, basis)?;
                if !v.is_zero() {
                    let p = profile(&x);
                    if !v.sub(&p).is_zero() {
                        return Err(SeqError::AuditFailed(format!(
                            "sweeping profile mismatch at n={}: value {}, profile {}",
                            n, v, p
                        )));
                    }
                }
            }
            if let Some(after) = self.meta.eventually_null_after {
                if n > after && !f.is_zero() {
                    return Err(SeqError::AuditFailed(format!(
                        "sequence declared null after {} but f_{} != 0",
                        after, n
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Status of a convergence-mode check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerdictStatus {
    CertifiedConverges,
    CertifiedDiverges,
    NoCounterexampleUpTo(u32),
    CounterexampleAt { n: u32, witness: String },
}

/// Outcome of a mode check: a status plus its closed-form certificate or
/// numeric witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvergenceVerdict {
    pub status: VerdictStatus,
    pub certificate: String,
}

impl ConvergenceVerdict {
    pub fn converges(certificate: impl Into<String>) -> Self {
        ConvergenceVerdict {
            status: VerdictStatus::CertifiedConverges,
            certificate: certificate.into(),
        }
    }

    pub fn diverges(certificate: impl Into<String>) -> Self {
        ConvergenceVerdict {
            status: VerdictStatus::CertifiedDiverges,
            certificate: certificate.into(),
        }
    }

    pub fn no_counterexample(horizon: u32, note: impl Into<String>) -> Self {
        ConvergenceVerdict {
            status: VerdictStatus::NoCounterexampleUpTo(horizon),
            certificate: note.into(),
        }
    }

    pub fn counterexample(n: u32, witness: impl Into<String>) -> Self {
        let witness = witness.into();
        ConvergenceVerdict {
            status: VerdictStatus::CounterexampleAt { n, witness: witness.clone() },
            certificate: witness,
        }
    }

    pub fn is_certified(&self) -> bool {
        matches!(
            self.status,
            VerdictStatus::CertifiedConverges | VerdictStatus::CertifiedDiverges
        )
    }
}

impl fmt::Display for VerdictStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerdictStatus::CertifiedConverges => write!(f, "certified-converges"),
            VerdictStatus::CertifiedDiverges => write!(f, "certified-diverges"),
            VerdictStatus::NoCounterexampleUpTo(n) => write!(f, "no-counterexample-up-to-{}", n),
            VerdictStatus::CounterexampleAt { n, .. } => write!(f, "counterexample-at-{}", n),
        }
    }
}

/// The canonical sample grid: k/denom for k = 0..=denom.
pub fn dyadic_grid(denom: u32) -> Vec<BigRational> {
    (0..=denom)
        .map(|k| BigRational::new(k.into(), denom.into()))
        .collect()
}
