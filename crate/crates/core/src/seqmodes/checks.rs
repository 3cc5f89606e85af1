//! Mode checkers: in measure, pointwise, uniform, almost uniform, L1,
//! and the scalar-times-indicator dichotomy.
//!
//! Certified verdicts come from audited metadata; otherwise the checkers
//! fall back to finite-horizon evidence with an explicit horizon in the
//! verdict. Horizon evidence never upgrades itself to a certificate.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{
    ConvergenceVerdict, FunSeq, Membership, PointwiseMeta, SeqError, StructuredSetSeq,
    TailDescriptor, Trend, VerdictStatus,
};
use crate::exactreal::{Enclosure, MonomialSum, SymbolBasis, ZeroCertificate, DEFAULT_BUDGET};
use crate::pwfun::{self, Domain, Interval, PwExpFun};

/// Declared or detected behavior of the scalar sequence in the dichotomy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlphaTrend {
    ToZero,
    BoundedBelow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DichotomyMode {
    Pointwise,
    AlmostEverywhere,
    Uniform,
}

/// Does a finite-horizon magnitude sequence look like it decays to zero?
/// Compares the largest tail value against half the largest head value.
fn decays(values: &[Enclosure]) -> bool {
    let n = values.len();
    if n < 4 {
        return false;
    }
    let head_max = values[..n / 4]
        .iter()
        .map(|e| e.hi_rational())
        .fold(BigRational::zero(), |a, b| if b > a { b } else { a });
    let tail_max = values[(3 * n) / 4..]
        .iter()
        .map(|e| e.hi_rational())
        .fold(BigRational::zero(), |a, b| if b > a { b } else { a });
    tail_max <= head_max / BigRational::from_integer(2.into())
}

/// Is the magnitude sequence bounded away from zero over the whole tail?
fn stays_up(values: &[Enclosure]) -> bool {
    let n = values.len();
    if n < 4 {
        return false;
    }
    let head_max = values[..n / 4]
        .iter()
        .map(|e| e.lo_rational())
        .fold(BigRational::zero(), |a, b| if b > a { b } else { a });
    let tail_min = values[(3 * n) / 4..]
        .iter()
        .map(|e| e.lo_rational())
        .fold(None::<BigRational>, |a, b| match a {
            None => Some(b),
            Some(a) => Some(if b < a { b } else { a }),
        });
    match tail_min {
        Some(m) => m.is_positive() && m >= head_max / BigRational::from_integer(2.into()),
        None => false,
    }
}

/// Convergence to 0 in measure: m{|f_n| > eps} -> 0 for every eps > 0.
pub fn check_in_measure(
    f: &FunSeq,
    eps_grid: &[BigRational],
    horizon: u32,
    prec: u32,
    basis: &SymbolBasis,
) -> Result<ConvergenceVerdict, SeqError> {
    if f.meta().eventually_null_after.is_some() {
        return Ok(ConvergenceVerdict::converges(
            "eventually null: superlevel sets are empty for large n",
        ));
    }
    if let Some(m) = &f.meta().support_measure {
        if matches!(m.trend, Trend::ToZero) {
            return Ok(ConvergenceVerdict::converges(format!(
                "{{|f_n| > eps}} is contained in supp f_n and m(supp f_n) = {} -> 0",
                m.description
            )));
        }
    }
    if let Some(m) = &f.meta().sup_norm {
        if matches!(m.trend, Trend::ToZero) {
            return Ok(ConvergenceVerdict::converges(format!(
                "sup |f_n| = {} -> 0, so superlevel sets are eventually empty",
                m.description
            )));
        }
    }
    for eps in eps_grid {
        if !eps.is_positive() {
            return Err(SeqError::HypothesisViolated("eps grid must be positive".into()));
        }
        let eps_ms = MonomialSum::from_rational(eps.clone());
        let mut measures = Vec::with_capacity(horizon as usize);
        for n in 1..=horizon {
            let fof = f.generate(n);
            measures.push(pwfun::superlevel_measure(&fof, &eps_ms, prec, basis)?);
        }
        if stays_up(&measures) {
            let last = measures.last().expect("horizon >= 1");
            return Ok(ConvergenceVerdict::counterexample(
                horizon,
                format!(
                    "m{{|f_n| > {}}} stays above {} through the horizon (last value in {})",
                    eps,
                    last.lo_rational(),
                    last
                ),
            ));
        }
        if !decays(&measures) {
            return Ok(ConvergenceVerdict::no_counterexample(
                horizon,
                format!("superlevel measures at eps = {} show no clear decay or obstruction", eps),
            ));
        }
    }
    Ok(ConvergenceVerdict::no_counterexample(
        horizon,
        "superlevel measures decay across the whole eps grid",
    ))
}

/// Pointwise convergence to 0 at a single rational point.
pub fn check_pointwise_at(
    f: &FunSeq,
    x: &BigRational,
    horizon: u32,
    basis: &SymbolBasis,
) -> Result<ConvergenceVerdict, SeqError> {
    match &f.meta().pointwise {
        Some(PointwiseMeta::Sweeping { profile, description }) => {
            let v = profile(x);
            match v.certify_nonzero(basis, DEFAULT_BUDGET)? {
                ZeroCertificate::CertifiedZero => Ok(ConvergenceVerdict::converges(format!(
                    "profile vanishes at x = {}; f_n(x) = 0 for every n ({})",
                    x, description
                ))),
                ZeroCertificate::CertifiedNonzero { reason } => {
                    Ok(ConvergenceVerdict::diverges(format!(
                        "f_n({}) attains {} infinitely often and 0 infinitely often ({}; nonzero: {})",
                        x, v, description, reason
                    )))
                }
                ZeroCertificate::Indeterminate => horizon_pointwise(f, x, horizon, basis),
            }
        }
        Some(PointwiseMeta::EventuallyZero { description }) => {
            Ok(ConvergenceVerdict::converges(format!(
                "f_n({}) = 0 for all large n ({})",
                x, description
            )))
        }
        None => horizon_pointwise(f, x, horizon, basis),
    }
}

fn horizon_pointwise(
    f: &FunSeq,
    x: &BigRational,
    horizon: u32,
    basis: &SymbolBasis,
) -> Result<ConvergenceVerdict, SeqError> {
    let mut values: Vec<MonomialSum> = Vec::with_capacity(horizon as usize);
    for n in 1..=horizon {
        values.push(f.generate(n).evaluate_exact(x, basis)?);
    }
    // Recurring nonzero value in the back half is divergence evidence.
    let tail = &values[(horizon as usize) / 2..];
    let mut groups: Vec<(&MonomialSum, u32, u32)> = Vec::new();
    for (i, v) in tail.iter().enumerate() {
        let n = horizon / 2 + i as u32 + 1;
        match groups.iter_mut().find(|(g, _, _)| *g == v) {
            Some((_, count, last)) => {
                *count += 1;
                *last = n;
            }
            None => groups.push((v, 1, n)),
        }
    }
    for (v, count, last) in &groups {
        if *count >= 2 && !v.is_zero() {
            if let ZeroCertificate::CertifiedNonzero { .. } =
                v.certify_nonzero(basis, DEFAULT_BUDGET)?
            {
                if groups.len() > 1 {
                    return Ok(ConvergenceVerdict::counterexample(
                        *last,
                        format!(
                            "f_n({}) takes the nonzero value {} at {} tail indices without settling",
                            x, v, count
                        ),
                    ));
                }
                // A single constant nonzero value: converges, but not to 0.
                return Ok(ConvergenceVerdict::counterexample(
                    *last,
                    format!("f_n({}) is eventually the nonzero constant {}", x, v),
                ));
            }
        }
    }
    // Magnitude decay evidence.
    let encs: Result<Vec<Enclosure>, SeqError> = values
        .iter()
        .map(|v| Ok(v.eval(basis, 64)?.abs()))
        .collect();
    let encs = encs?;
    if decays(&encs) || encs.iter().all(|e| e.hi_rational().is_zero()) {
        Ok(ConvergenceVerdict::no_counterexample(
            horizon,
            format!("|f_n({})| decays over the horizon", x),
        ))
    } else {
        Ok(ConvergenceVerdict::no_counterexample(
            horizon,
            format!("no recurring nonzero value at x = {} within the horizon", x),
        ))
    }
}

/// Pointwise convergence to 0 across a sample grid; divergence at any
/// sampled point decides the aggregate.
pub fn check_pointwise(
    f: &FunSeq,
    xs: &[BigRational],
    horizon: u32,
    basis: &SymbolBasis,
) -> Result<ConvergenceVerdict, SeqError> {
    let mut all_certified = true;
    let mut first_counterexample: Option<ConvergenceVerdict> = None;
    for x in xs {
        let v = check_pointwise_at(f, x, horizon, basis)?;
        match v.status {
            VerdictStatus::CertifiedDiverges => {
                return Ok(ConvergenceVerdict::diverges(format!(
                    "diverges at sampled x = {}: {}",
                    x, v.certificate
                )));
            }
            VerdictStatus::CounterexampleAt { .. } => {
                if first_counterexample.is_none() {
                    first_counterexample = Some(v);
                }
                all_certified = false;
            }
            VerdictStatus::NoCounterexampleUpTo(_) => all_certified = false,
            VerdictStatus::CertifiedConverges => {}
        }
    }
    if let Some(v) = first_counterexample {
        return Ok(v);
    }
    if all_certified && !xs.is_empty() {
        return Ok(ConvergenceVerdict::converges(
            "certified pointwise convergence to 0 at every sampled point",
        ));
    }
    Ok(ConvergenceVerdict::no_counterexample(
        horizon,
        "no sampled point witnesses divergence",
    ))
}

/// Detect the alpha behavior on the horizon when no flag is supplied.
pub fn detect_alpha_trend(
    alpha: &dyn Fn(u32) -> MonomialSum,
    horizon: u32,
    basis: &SymbolBasis,
) -> Result<Option<AlphaTrend>, SeqError> {
    let mut samples: Vec<Enclosure> = Vec::new();
    let mut n = 1u32;
    while n <= horizon {
        samples.push(alpha(n).eval(basis, 96)?.abs());
        n = (n * 2).max(n + 1);
    }
    let last = alpha(horizon).eval(basis, 96)?.abs();
    samples.push(last);
    let first_hi = samples[0].hi_rational();
    let tail = &samples[samples.len() / 2..];
    let tail_hi = tail
        .iter()
        .map(|e| e.hi_rational())
        .fold(BigRational::zero(), |a, b| if b > a { b } else { a });
    let tail_lo = tail
        .iter()
        .map(|e| e.lo_rational())
        .fold(None::<BigRational>, |a, b| match a {
            None => Some(b),
            Some(a) => Some(if b < a { b } else { a }),
        })
        .expect("nonempty samples");
    if tail_hi <= first_hi / BigRational::from_integer(4.into()) {
        return Ok(Some(AlphaTrend::ToZero));
    }
    if tail_lo.is_positive() && tail_lo >= first_hi / BigRational::from_integer(4.into()) {
        return Ok(Some(AlphaTrend::BoundedBelow));
    }
    Ok(None)
}

/// The dichotomy for f_n = alpha_n * chi_{E_n}: closed-form verdicts per
/// mode from the tail descriptor and the alpha behavior.
pub fn check_indicator_dichotomy(
    alpha: &dyn Fn(u32) -> MonomialSum,
    sets: &StructuredSetSeq,
    mode: DichotomyMode,
    horizon: u32,
    declared: Option<AlphaTrend>,
    basis: &SymbolBasis,
) -> Result<ConvergenceVerdict, SeqError> {
    // Hypotheses: alpha_n != 0 (sampled) and E_n nonempty (sampled).
    let mut n = 1u32;
    while n <= horizon.min(64) {
        if matches!(
            alpha(n).certify_nonzero(basis, DEFAULT_BUDGET)?,
            ZeroCertificate::CertifiedZero
        ) {
            return Err(SeqError::HypothesisViolated(format!("alpha_{} = 0", n)));
        }
        if sets.sets(n).is_empty() {
            return Err(SeqError::HypothesisViolated(format!("E_{} is empty", n)));
        }
        n *= 2;
    }
    let trend = match declared {
        Some(t) => t,
        None => detect_alpha_trend(alpha, horizon, basis)?.ok_or_else(|| {
            SeqError::HypothesisViolated(
                "alpha behavior (to zero / bounded below) not established on the horizon".into(),
            )
        })?,
    };
    match mode {
        DichotomyMode::Uniform => match trend {
            AlphaTrend::ToZero => Ok(ConvergenceVerdict::converges(
                "sup |f_n| = |alpha_n| -> 0 (E_n nonempty)",
            )),
            AlphaTrend::BoundedBelow => Ok(ConvergenceVerdict::diverges(
                "sup |f_n| = |alpha_n| is bounded below on nonempty E_n",
            )),
        },
        DichotomyMode::Pointwise => {
            if trend == AlphaTrend::ToZero {
                return Ok(ConvergenceVerdict::converges("|f_n(x)| <= |alpha_n| -> 0"));
            }
            match sets.tail() {
                TailDescriptor::ShrinksToNull => Ok(ConvergenceVerdict::converges(
                    "limsup E_n is empty: every point is eventually outside E_n",
                )),
                TailDescriptor::SweepsAll => Ok(ConvergenceVerdict::diverges(
                    "limsup E_n is everything and |alpha_n| is bounded below",
                )),
                TailDescriptor::Custom { intervals, points } => {
                    if intervals.is_empty() && points.is_empty() {
                        Ok(ConvergenceVerdict::converges(
                            "limsup E_n is empty: every point is eventually outside E_n",
                        ))
                    } else {
                        Ok(ConvergenceVerdict::diverges(
                            "limsup E_n is nonempty and |alpha_n| is bounded below",
                        ))
                    }
                }
                TailDescriptor::EventuallyAvoids { .. } => Ok(ConvergenceVerdict::no_counterexample(
                    horizon,
                    "descriptor does not decide limsup membership everywhere",
                )),
            }
        }
        DichotomyMode::AlmostEverywhere => {
            if trend == AlphaTrend::ToZero {
                return Ok(ConvergenceVerdict::converges("|f_n(x)| <= |alpha_n| -> 0"));
            }
            match sets.limsup_measure() {
                Some(mu) if mu.is_zero() => Ok(ConvergenceVerdict::converges(
                    "m(limsup E_n) = 0 and every x off limsup is eventually outside E_n",
                )),
                Some(mu) => Ok(ConvergenceVerdict::diverges(format!(
                    "m(limsup E_n) = {} > 0 and |alpha_n| is bounded below",
                    mu
                ))),
                None => Ok(ConvergenceVerdict::no_counterexample(
                    horizon,
                    "limsup measure not determined by the descriptor",
                )),
            }
        }
    }
}

/// Uniform convergence to 0 (essential-sup convergence).
pub fn check_uniform(
    f: &FunSeq,
    horizon: u32,
    prec: u32,
    basis: &SymbolBasis,
) -> Result<ConvergenceVerdict, SeqError> {
    if f.meta().eventually_null_after.is_some() {
        return Ok(ConvergenceVerdict::converges("eventually null: sup |f_n| = 0 for large n"));
    }
    if let Some(m) = &f.meta().sup_norm {
        match &m.trend {
            Trend::ToZero => {
                return Ok(ConvergenceVerdict::converges(format!(
                    "sup |f_n| = {} -> 0",
                    m.description
                )))
            }
            Trend::Constant(c) => {
                if let ZeroCertificate::CertifiedNonzero { reason } =
                    c.certify_nonzero(basis, DEFAULT_BUDGET)?
                {
                    return Ok(ConvergenceVerdict::diverges(format!(
                        "sup |f_n| = {} for every n, a nonzero constant ({})",
                        m.description, reason
                    )));
                }
            }
            Trend::BoundedBelow(q) => {
                return Ok(ConvergenceVerdict::diverges(format!(
                    "sup |f_n| >= {} > 0 for every n ({})",
                    q, m.description
                )))
            }
            Trend::ToInfinity => {
                return Ok(ConvergenceVerdict::diverges(format!(
                    "sup |f_n| = {} -> infinity",
                    m.description
                )))
            }
        }
    }
    // Horizon evidence on a geometric subsample.
    let mut sups = Vec::new();
    let mut witness_n = 1;
    let mut n = 1u32;
    while n <= horizon {
        let sup = pwfun::ess_sup_domain(&f.generate(n), prec, basis)?;
        sups.push(sup);
        witness_n = n;
        n = (n * 2).max(n + 1);
    }
    if stays_up(&sups) {
        let last = sups.last().expect("nonempty");
        return Ok(ConvergenceVerdict::counterexample(
            witness_n,
            format!("sup |f_n| stays near {} through the horizon", last.lo_rational()),
        ));
    }
    if decays(&sups) {
        Ok(ConvergenceVerdict::no_counterexample(
            horizon,
            "sup norms decay over the sampled horizon",
        ))
    } else {
        Ok(ConvergenceVerdict::no_counterexample(
            horizon,
            "sup norms show no decisive trend on the horizon",
        ))
    }
}

/// Almost uniform convergence to 0: for the given eps, exhibit an
/// exceptional set E with m(E) < eps and certified sup decay off E.
pub fn check_almost_uniform(
    f: &FunSeq,
    eps: &BigRational,
    horizon: u32,
    prec: u32,
    basis: &SymbolBasis,
) -> Result<ConvergenceVerdict, SeqError> {
    if !eps.is_positive() {
        return Err(SeqError::HypothesisViolated("eps must be positive".into()));
    }
    if f.domain() != Domain::UnitInterval {
        return Err(SeqError::HypothesisViolated(
            "almost-uniform checks run on the unit interval".into(),
        ));
    }
    if f.meta().eventually_null_after.is_some() {
        return Ok(ConvergenceVerdict::converges(
            "eventually null: E = empty set works, sup |f_n| = 0 for large n",
        ));
    }
    match &f.meta().almost_uniform {
        Some(super::AuTemplate::LeftShrink) => {
            let delta = eps / BigRational::from_integer(2.into());
            // Find the index past which supports fit inside [0, delta].
            let supports = f.meta().supports.as_ref().ok_or_else(|| {
                SeqError::HypothesisViolated("LeftShrink template requires a support descriptor".into())
            })?;
            let mut threshold = None;
            for n in 1..=horizon {
                let mut inside = true;
                for iv in supports.sets(n) {
                    match iv.hi().and_then(|h| h.as_rational()) {
                        Some(hi) if hi <= delta => {}
                        _ => {
                            inside = false;
                            break;
                        }
                    }
                }
                if inside {
                    threshold = Some(n);
                    break;
                }
            }
            let threshold = match threshold {
                Some(t) => t,
                None => {
                    return Ok(ConvergenceVerdict::no_counterexample(
                        horizon,
                        format!("supports did not enter [0, {}] within the horizon", delta),
                    ))
                }
            };
            // Verify structurally on a short window past the threshold:
            // the function vanishes on (delta, 1].
            let region = vec![Interval::rational(delta.clone(), BigRational::one())?];
            for n in threshold..threshold.saturating_add(4).min(horizon) {
                let sup = pwfun::ess_sup_exact(&f.generate(n), &region, basis)?;
                if sup != Some(MonomialSum::zero()) {
                    return Err(SeqError::AuditFailed(format!(
                        "declared LeftShrink but f_{} is nonzero off [0, {}]",
                        n, delta
                    )));
                }
            }
            Ok(ConvergenceVerdict::converges(format!(
                "E = [0, {}] with m(E) = {} < {}; supports lie in E for n >= {} (right endpoints shrink), so ess sup off E is 0 eventually",
                delta, delta, eps, threshold
            )))
        }
        Some(super::AuTemplate::SweepingObstruction) => {
            // Every generation covers the domain; a set of measure < eps < 1
            // cannot absorb a full window of each late generation.
            let bound = f
                .meta()
                .sup_norm
                .as_ref()
                .map(|m| m.description.clone())
                .unwrap_or_else(|| "the sweeping profile".to_string());
            Ok(ConvergenceVerdict::counterexample(
                horizon,
                format!(
                    "for every E with m(E) < {} some support window escapes E in positive measure infinitely often; ess sup off E stays at {}",
                    eps, bound
                ),
            ))
        }
        None => Ok(ConvergenceVerdict::no_counterexample(
            horizon,
            "no exceptional-set template attached",
        )),
    }
}

/// Convergence to 0 in L1 norm.
pub fn check_l1(
    f: &FunSeq,
    horizon: u32,
    prec: u32,
    basis: &SymbolBasis,
) -> Result<ConvergenceVerdict, SeqError> {
    if f.meta().eventually_null_after.is_some() {
        return Ok(ConvergenceVerdict::converges("eventually null: ||f_n||_1 = 0 for large n"));
    }
    if let Some(m) = &f.meta().l1_norm {
        match &m.trend {
            Trend::ToZero => {
                return Ok(ConvergenceVerdict::converges(format!(
                    "||f_n||_1 = {} -> 0",
                    m.description
                )))
            }
            Trend::ToInfinity => {
                return Ok(ConvergenceVerdict::diverges(format!(
                    "||f_n||_1 = {} -> infinity",
                    m.description
                )))
            }
            Trend::Constant(c) => {
                if let ZeroCertificate::CertifiedNonzero { reason } =
                    c.certify_nonzero(basis, DEFAULT_BUDGET)?
                {
                    return Ok(ConvergenceVerdict::diverges(format!(
                        "||f_n||_1 = {} for every n, a nonzero constant ({})",
                        m.description, reason
                    )));
                }
            }
            Trend::BoundedBelow(q) => {
                return Ok(ConvergenceVerdict::diverges(format!(
                    "||f_n||_1 >= {} > 0 for every n ({})",
                    q, m.description
                )))
            }
        }
    }
    let mut norms = Vec::new();
    let mut witness_n = 1;
    let mut n = 1u32;
    while n <= horizon {
        norms.push(pwfun::l1_norm(&f.generate(n), prec, basis)?);
        witness_n = n;
        n = (n * 2).max(n + 1);
    }
    if stays_up(&norms) {
        let last = norms.last().expect("nonempty");
        return Ok(ConvergenceVerdict::counterexample(
            witness_n,
            format!("||f_n||_1 stays near {} through the horizon", last.lo_rational()),
        ));
    }
    if decays(&norms) {
        Ok(ConvergenceVerdict::no_counterexample(horizon, "L1 norms decay over the horizon"))
    } else {
        Ok(ConvergenceVerdict::no_counterexample(
            horizon,
            "L1 norms show no decisive trend on the horizon",
        ))
    }
}
