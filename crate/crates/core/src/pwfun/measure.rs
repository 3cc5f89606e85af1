//! Superlevel-set measure and essential supremum.
//!
//! Exact symbolic paths cover constant pieces and monotone single-term
//! pieces whose crossing solves in the monomial fragment; everything else
//! falls back to certified enclosures via range bisection or branch and
//! bound. Soundness rule throughout: an undecided cell contributes its
//! worst case to the enclosure, never a guess.

use num_rational::BigRational;
use num_traits::{One, Zero};
use std::cmp::Ordering;

use super::{cmp_values, Domain, ExpPiece, ExpTerm, Interval, PwError, PwExpFun};
use crate::exactreal::{
    Base, Comparison, Dyadic, Enclosure, LinearForm, Monomial, MonomialSum, SymbolBasis,
    DEFAULT_BUDGET,
};

/// A term with numeric coefficient and rate, ready for range arithmetic.
pub(crate) struct NumTerm {
    pub coef: Enclosure,
    pub rate: Enclosure,
}

pub(crate) fn num_terms(
    terms: &[ExpTerm],
    basis: &SymbolBasis,
    prec: u32,
) -> Result<Vec<NumTerm>, PwError> {
    terms
        .iter()
        .map(|t| {
            Ok(NumTerm {
                coef: t.coef.eval(basis, prec)?,
                rate: t.rate.eval(basis, prec)?,
            })
        })
        .collect()
}

/// Differentiate numerically: coefficient picks up one factor of the rate.
pub(crate) fn differentiate(terms: &[NumTerm]) -> Vec<NumTerm> {
    terms
        .iter()
        .map(|t| NumTerm { coef: t.coef.mul(&t.rate), rate: t.rate.clone() })
        .collect()
}

/// Range enclosure of `sum coef_i e^(rate_i x)` for x in the given interval.
pub(crate) fn range_over(terms: &[NumTerm], x: &Enclosure, prec: u32) -> Enclosure {
    let mut acc = Enclosure::zero(prec);
    for t in terms {
        acc = acc.add(&t.coef.mul(&t.rate.mul(x).exp()));
    }
    acc
}

pub(crate) fn rational_enclosure(q: &BigRational, prec: u32) -> Enclosure {
    Enclosure::from_rational(q, prec)
}

/// Sign of the rate value, decided on a ladder.
fn rate_sign(rate: &LinearForm, basis: &SymbolBasis) -> Result<Option<Ordering>, PwError> {
    Ok(rate.sign(basis, DEFAULT_BUDGET)?)
}

/// |ms| as an exact monomial sum when the sign is certifiable.
pub(crate) fn abs_exact(ms: &MonomialSum, basis: &SymbolBasis) -> Option<MonomialSum> {
    if ms.is_zero() {
        return Some(MonomialSum::zero());
    }
    match ms.compare(&MonomialSum::zero(), basis, DEFAULT_BUDGET).ok()? {
        Comparison::Greater => Some(ms.clone()),
        Comparison::Less => Some(ms.neg()),
        _ => None,
    }
}

fn clamp_dyadic(x: &Dyadic, lo: &Dyadic, hi: &Dyadic) -> Dyadic {
    x.clone().max(lo.clone()).min(hi.clone())
}

/// m{ |f| > eps } as a certified enclosure.
pub fn superlevel_measure(
    f: &PwExpFun,
    eps: &MonomialSum,
    prec: u32,
    basis: &SymbolBasis,
) -> Result<Enclosure, PwError> {
    if f
        .pieces()
        .is_empty()
    {
        return Ok(Enclosure::zero(prec));
    }
    if eps.compare(&MonomialSum::zero(), basis, DEFAULT_BUDGET)? != Comparison::Greater {
        return Err(PwError::NonpositiveEpsilon);
    }
    let eps_enc = eps.eval(basis, prec)?;
    let mut acc = Enclosure::zero(prec);
    for piece in f.pieces() {
        acc = acc.add(&piece_superlevel(piece, eps, &eps_enc, prec, basis)?);
    }
    Ok(acc)
}

/// Exact rational superlevel measure when every piece resolves exactly.
pub fn superlevel_measure_exact(
    f: &PwExpFun,
    eps: &MonomialSum,
    basis: &SymbolBasis,
) -> Result<Option<MonomialSum>, PwError> {
    if f.pieces().is_empty() {
        return Ok(Some(MonomialSum::zero()));
    }
    if eps.compare(&MonomialSum::zero(), basis, DEFAULT_BUDGET)? != Comparison::Greater {
        return Err(PwError::NonpositiveEpsilon);
    }
    let mut acc = MonomialSum::zero();
    for piece in f.pieces() {
        match piece_superlevel_exact(piece, eps, basis)? {
            Some(m) => acc = acc.add(&m),
            None => return Ok(None),
        }
    }
    Ok(Some(acc))
}

fn piece_superlevel_exact(
    piece: &ExpPiece,
    eps: &MonomialSum,
    basis: &SymbolBasis,
) -> Result<Option<MonomialSum>, PwError> {
    if let Some(v) = piece.constant_value() {
        let mag = match abs_exact(v, basis) {
            Some(m) => m,
            None => return Ok(None),
        };
        return match mag.compare(eps, basis, DEFAULT_BUDGET)? {
            Comparison::Greater => match piece.interval.length() {
                Some(len) => Ok(Some(len)),
                None => Err(PwError::InfiniteMeasure),
            },
            Comparison::Less | Comparison::Equal => Ok(Some(MonomialSum::zero())),
            Comparison::Indeterminate => Ok(None),
        };
    }
    if piece.terms.len() == 1 {
        if let Some(x_star) = exact_crossing(&piece.terms[0], eps)? {
            let sign = rate_sign(&piece.terms[0].rate, basis)?;
            return exact_monotone_measure(piece, &x_star, sign, basis).map(Some);
        }
    }
    Ok(None)
}

/// Crossing point of |coef| e^{r x} = eps when it solves in the fragment:
/// eps/|coef| must be a pure power of e with exponent proportional to r.
fn exact_crossing(term: &ExpTerm, eps: &MonomialSum) -> Result<Option<BigRational>, PwError> {
    let coef = match term.coef.as_single_monomial() {
        Some(m) => m,
        None => return Ok(None),
    };
    let eps_m = match eps.as_single_monomial() {
        Some(m) => m,
        None => return Ok(None),
    };
    let ratio = eps_m.mul(&coef.abs().recip());
    if !ratio.coef().is_one() {
        return Ok(None);
    }
    let mut exponent = LinearForm::zero();
    for (base, form) in ratio.factors() {
        match base {
            Base::E => exponent = exponent.add(form),
            Base::Rat(_) => return Ok(None),
        }
    }
    Ok(exponent.proportion_to(&term.rate))
}

/// Measure of {|f| > eps} on a monotone piece with exact crossing x*.
fn exact_monotone_measure(
    piece: &ExpPiece,
    x_star: &BigRational,
    sign: Option<Ordering>,
    basis: &SymbolBasis,
) -> Result<MonomialSum, PwError> {
    let xs = MonomialSum::from_rational(x_star.clone());
    let lo = piece.interval.lo();
    match sign {
        Some(Ordering::Less) => {
            // Decreasing: the superlevel set is [lo, min(hi, x*)).
            let cut = match piece.interval.hi() {
                Some(hi) => {
                    if cmp_values(&xs, hi, basis)? == Ordering::Less {
                        xs
                    } else {
                        hi.clone()
                    }
                }
                None => xs,
            };
            if cmp_values(&cut, lo, basis)? == Ordering::Greater {
                Ok(cut.sub(lo))
            } else {
                Ok(MonomialSum::zero())
            }
        }
        Some(Ordering::Greater) => {
            // Increasing: the superlevel set is (max(lo, x*), hi].
            let hi = match piece.interval.hi() {
                Some(hi) => hi.clone(),
                None => return Err(PwError::InfiniteMeasure),
            };
            let cut = if cmp_values(&xs, lo, basis)? == Ordering::Greater { xs } else { lo.clone() };
            if cmp_values(&hi, &cut, basis)? == Ordering::Greater {
                Ok(hi.sub(&cut))
            } else {
                Ok(MonomialSum::zero())
            }
        }
        _ => Err(PwError::UndecidedComparison),
    }
}

fn piece_superlevel(
    piece: &ExpPiece,
    eps: &MonomialSum,
    eps_enc: &Enclosure,
    prec: u32,
    basis: &SymbolBasis,
) -> Result<Enclosure, PwError> {
    if let Some(exact) = piece_superlevel_exact(piece, eps, basis)? {
        return Ok(exact.eval(basis, prec)?);
    }
    let len_enc = match piece.interval.length() {
        Some(len) => Some(len.eval(basis, prec)?),
        None => None,
    };
    // Monotone single-term piece: numeric crossing.
    if piece.terms.len() == 1 {
        let term = &piece.terms[0];
        if let Some(sign) = rate_sign(&term.rate, basis)? {
            if sign != Ordering::Equal {
                return numeric_monotone_measure(piece, term, sign, eps_enc, len_enc, prec, basis);
            }
        }
    }
    // General case: range bisection over rational endpoints.
    if let Some((u, v)) = piece.interval.rational_endpoints() {
        let terms = num_terms(&piece.terms, basis, prec)?;
        let mut out = Enclosure::zero(prec);
        let mut budget = 4096usize;
        superlevel_bisect(&terms, eps_enc, &u, &v, prec, 0, &mut budget, &mut out);
        return Ok(out);
    }
    // Unbounded or symbolic-endpoint fallback: one range test.
    coarse_superlevel(piece, eps_enc, len_enc, prec, basis)
}

fn numeric_monotone_measure(
    piece: &ExpPiece,
    term: &ExpTerm,
    sign: Ordering,
    eps_enc: &Enclosure,
    len_enc: Option<Enclosure>,
    prec: u32,
    basis: &SymbolBasis,
) -> Result<Enclosure, PwError> {
    let coef_mag = term.coef.eval(basis, prec)?.abs();
    let rate = term.rate.eval(basis, prec)?;
    let ln_eps = eps_enc.ln()?;
    let ln_coef = match coef_mag.ln() {
        Ok(v) => v,
        Err(_) => return coarse_superlevel(piece, eps_enc, len_enc, prec, basis),
    };
    let x_star = match ln_eps.sub(&ln_coef).div(&rate) {
        Ok(v) => v,
        Err(_) => return coarse_superlevel(piece, eps_enc, len_enc, prec, basis),
    };
    let lo_enc = piece.interval.lo().eval(basis, prec)?;
    match sign {
        Ordering::Less => {
            // Superlevel set is [lo, min(hi, x*)).
            let cand = x_star.sub(&lo_enc);
            let (len_lo, len_hi) = match &len_enc {
                Some(l) => (l.lo().clone(), l.hi().clone()),
                None => (cand.hi().clone().max(Dyadic::zero()), cand.hi().clone().max(Dyadic::zero())),
            };
            let zero = Dyadic::zero();
            let lo = clamp_dyadic(cand.lo(), &zero, &len_lo);
            let hi = clamp_dyadic(cand.hi(), &zero, &len_hi);
            Ok(Enclosure::new(lo, hi.max(Dyadic::zero()), prec))
        }
        Ordering::Greater => {
            let len = match len_enc {
                Some(l) => l,
                None => return Err(PwError::InfiniteMeasure),
            };
            let hi_enc = piece
                .interval
                .hi()
                .expect("bounded by len_enc")
                .eval(basis, prec)?;
            let cand = hi_enc.sub(&x_star);
            let zero = Dyadic::zero();
            let lo = clamp_dyadic(cand.lo(), &zero, len.lo());
            let hi = clamp_dyadic(cand.hi(), &zero, len.hi());
            Ok(Enclosure::new(lo, hi, prec))
        }
        Ordering::Equal => unreachable!("constant pieces are handled earlier"),
    }
}

fn coarse_superlevel(
    piece: &ExpPiece,
    eps_enc: &Enclosure,
    len_enc: Option<Enclosure>,
    prec: u32,
    basis: &SymbolBasis,
) -> Result<Enclosure, PwError> {
    let terms = num_terms(&piece.terms, basis, prec)?;
    // Hull of the piece in x.
    let lo = piece.interval.lo().eval(basis, prec)?;
    let x_hull = match piece.interval.hi() {
        Some(hi) => lo.hull(&hi.eval(basis, prec)?),
        None => {
            // Decay requirement on unbounded pieces.
            for t in &piece.terms {
                if rate_sign(&t.rate, basis)? != Some(Ordering::Less) {
                    return Err(PwError::InfiniteMeasure);
                }
            }
            // Find a cutoff beyond which |f| <= eps surely.
            let mut cutoff = lo.hi().clone().max(Dyadic::one());
            let mut found = false;
            for _ in 0..64 {
                let tail_bound = tail_abs_bound(&terms, &cutoff, prec);
                if tail_bound.hi() < eps_enc.lo() {
                    found = true;
                    break;
                }
                cutoff = cutoff.mul_2exp(1);
            }
            if !found {
                return Err(PwError::InfiniteMeasure);
            }
            lo.hull(&Enclosure::exact_dyadic(cutoff, prec))
        }
    };
    let range = range_over(&terms, &x_hull, prec).abs();
    let len = match len_enc {
        Some(l) => l,
        None => x_hull.sub(&piece.interval.lo().eval(basis, prec)?).abs(),
    };
    if range.lo() > eps_enc.hi() {
        Ok(len)
    } else if range.hi() <= eps_enc.lo() {
        Ok(Enclosure::zero(prec))
    } else {
        Ok(Enclosure::new(Dyadic::zero(), len.hi().clone(), prec))
    }
}

/// Upper bound of sum |coef_i| e^(rate_i x) for x >= cutoff, all rates < 0.
fn tail_abs_bound(terms: &[NumTerm], cutoff: &Dyadic, prec: u32) -> Enclosure {
    let x = Enclosure::exact_dyadic(cutoff.clone(), prec);
    let mut acc = Enclosure::zero(prec);
    for t in terms {
        acc = acc.add(&t.coef.abs().mul(&t.rate.mul(&x).exp()));
    }
    acc
}

fn superlevel_bisect(
    terms: &[NumTerm],
    eps: &Enclosure,
    u: &BigRational,
    v: &BigRational,
    prec: u32,
    depth: u32,
    budget: &mut usize,
    acc: &mut Enclosure,
) {
    let len = v - u;
    if len <= BigRational::zero() {
        return;
    }
    let x = rational_enclosure(u, prec).hull(&rational_enclosure(v, prec));
    let range = range_over(terms, &x, prec).abs();
    let len_enc = rational_enclosure(&len, prec);
    if range.lo() > eps.hi() {
        *acc = acc.add(&len_enc);
        return;
    }
    if range.hi() <= eps.lo() {
        return;
    }
    if depth >= 60 || *budget == 0 {
        // Unresolved: worst case [0, len].
        *acc = acc.add(&Enclosure::new(Dyadic::zero(), len_enc.hi().clone(), prec));
        return;
    }
    *budget -= 1;
    let mid = (u + v) / BigRational::from_integer(2.into());
    superlevel_bisect(terms, eps, u, &mid, prec, depth + 1, budget, acc);
    superlevel_bisect(terms, eps, &mid, v, prec, depth + 1, budget, acc);
}

// ---------------------------------------------------------------------------
// Essential supremum
// ---------------------------------------------------------------------------

/// ess sup of |f| over a finite union of intervals.
pub fn ess_sup(
    f: &PwExpFun,
    region: &[Interval],
    prec: u32,
    basis: &SymbolBasis,
) -> Result<Enclosure, PwError> {
    if let Some(exact) = ess_sup_exact(f, region, basis)? {
        return Ok(exact.eval(basis, prec)?);
    }
    let cells = region_cells(f, region, basis)?;
    if cells.is_empty() && !region_has_content(region, basis)? {
        return Err(PwError::EmptyRegion);
    }
    let mut best = Enclosure::zero(prec);
    let mut first = true;
    if uncovered_exists(f, region, basis)? {
        best = Enclosure::zero(prec);
        first = false;
    }
    for (piece, cell) in &cells {
        let sup = cell_sup(piece, cell, prec, basis)?;
        best = if first { sup } else { best.max_with(&sup) };
        first = false;
    }
    if first {
        return Err(PwError::EmptyRegion);
    }
    Ok(best)
}

/// ess sup over the whole domain.
pub fn ess_sup_domain(f: &PwExpFun, prec: u32, basis: &SymbolBasis) -> Result<Enclosure, PwError> {
    let region = full_region(f.domain());
    ess_sup(f, &region, prec, basis)
}

pub fn full_region(domain: Domain) -> Vec<Interval> {
    match domain {
        Domain::UnitInterval => vec![Interval::rational(
            BigRational::zero(),
            BigRational::from_integer(1.into()),
        )
        .expect("unit interval")],
        Domain::HalfLine => vec![Interval::unbounded(MonomialSum::zero()).expect("half line")],
    }
}

/// Exact ess sup when every cell yields a symbolic candidate.
pub fn ess_sup_exact(
    f: &PwExpFun,
    region: &[Interval],
    basis: &SymbolBasis,
) -> Result<Option<MonomialSum>, PwError> {
    if !region_has_content(region, basis)? {
        return Err(PwError::EmptyRegion);
    }
    let cells = region_cells(f, region, basis)?;
    let mut candidates: Vec<MonomialSum> = Vec::new();
    if uncovered_exists(f, region, basis)? {
        candidates.push(MonomialSum::zero());
    }
    for (piece, cell) in &cells {
        match cell_sup_exact(piece, cell, basis)? {
            Some(v) => candidates.push(v),
            None => return Ok(None),
        }
    }
    let mut best: Option<MonomialSum> = None;
    for c in candidates {
        best = Some(match best {
            None => c,
            Some(b) => match cmp_values(&c, &b, basis) {
                Ok(Ordering::Greater) => c,
                Ok(_) => b,
                Err(_) => return Ok(None),
            },
        });
    }
    Ok(best)
}

fn region_has_content(region: &[Interval], basis: &SymbolBasis) -> Result<bool, PwError> {
    for r in region {
        if !r.is_degenerate(basis)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Intersections (piece, piece-interval ∩ region-interval) with nonempty
/// interior.
fn region_cells<'a>(
    f: &'a PwExpFun,
    region: &[Interval],
    basis: &SymbolBasis,
) -> Result<Vec<(&'a ExpPiece, Interval)>, PwError> {
    let mut out = Vec::new();
    for r in region {
        for p in f.pieces() {
            let lo = if cmp_values(p.interval.lo(), r.lo(), basis)? == Ordering::Greater {
                p.interval.lo().clone()
            } else {
                r.lo().clone()
            };
            let hi = match (p.interval.hi(), r.hi()) {
                (Some(a), Some(b)) => {
                    Some(if cmp_values(a, b, basis)? == Ordering::Less { a.clone() } else { b.clone() })
                }
                (Some(a), None) => Some(a.clone()),
                (None, Some(b)) => Some(b.clone()),
                (None, None) => None,
            };
            let nonempty = match &hi {
                Some(h) => cmp_values(&lo, h, basis)? == Ordering::Less,
                None => true,
            };
            if nonempty {
                out.push((
                    p,
                    Interval { lo, hi, lo_closed: true, hi_closed: true },
                ));
            }
        }
    }
    Ok(out)
}

/// Does the region contain a positive-length part off the support of f?
/// Walks the sorted pieces left to right looking for a gap inside the region.
fn uncovered_exists(f: &PwExpFun, region: &[Interval], basis: &SymbolBasis) -> Result<bool, PwError> {
    for r in region {
        if r.is_degenerate(basis)? {
            continue;
        }
        let mut frontier = r.lo().clone();
        let mut reached_end = false;
        for p in f.pieces() {
            // Skip pieces that end at or before the frontier.
            if let Some(h) = p.interval.hi() {
                if cmp_values(h, &frontier, basis)? != Ordering::Greater {
                    continue;
                }
            }
            if cmp_values(p.interval.lo(), &frontier, basis)? == Ordering::Greater {
                // Gap (frontier, piece.lo); uncovered if it meets the region.
                match r.hi() {
                    None => return Ok(true),
                    Some(rh) => {
                        if cmp_values(&frontier, rh, basis)? == Ordering::Less {
                            return Ok(true);
                        }
                        reached_end = true;
                        break;
                    }
                }
            }
            match p.interval.hi() {
                Some(h) => frontier = h.clone(),
                None => {
                    reached_end = true;
                    break;
                }
            }
            if let Some(rh) = r.hi() {
                if cmp_values(&frontier, rh, basis)? != Ordering::Less {
                    reached_end = true;
                    break;
                }
            }
        }
        if !reached_end {
            match r.hi() {
                None => return Ok(true),
                Some(rh) => {
                    if cmp_values(&frontier, rh, basis)? == Ordering::Less {
                        return Ok(true);
                    }
                }
            }
        }
    }
    Ok(false)
}

fn cell_sup_exact(
    piece: &ExpPiece,
    cell: &Interval,
    basis: &SymbolBasis,
) -> Result<Option<MonomialSum>, PwError> {
    if let Some(v) = piece.constant_value() {
        return Ok(abs_exact(v, basis));
    }
    if piece.terms.len() == 1 {
        let term = &piece.terms[0];
        let coef_mag = match abs_exact(&term.coef, basis) {
            Some(m) => m,
            None => return Ok(None),
        };
        let sign = rate_sign(&term.rate, basis)?;
        let at = match sign {
            Some(Ordering::Less) => cell.lo().as_rational(),
            Some(Ordering::Greater) => match cell.hi() {
                Some(h) => h.as_rational(),
                None => return Err(PwError::InfiniteMeasure),
            },
            _ => None,
        };
        if let Some(x) = at {
            let value = coef_mag
                .mul(&MonomialSum::from_monomial(Monomial::exp_form(term.rate.scale(&x))));
            return Ok(Some(value));
        }
    }
    Ok(None)
}

fn cell_sup(
    piece: &ExpPiece,
    cell: &Interval,
    prec: u32,
    basis: &SymbolBasis,
) -> Result<Enclosure, PwError> {
    if let Some(v) = cell_sup_exact(piece, cell, basis)? {
        return Ok(v.eval(basis, prec)?);
    }
    let terms = num_terms(&piece.terms, basis, prec)?;
    match cell.rational_endpoints() {
        Some((u, v)) => Ok(branch_bound_sup(&terms, &u, &v, prec)),
        None => {
            let lo = cell.lo().eval(basis, prec)?;
            match cell.hi() {
                Some(hi) => {
                    let hull = lo.hull(&hi.eval(basis, prec)?);
                    Ok(range_over(&terms, &hull, prec).abs())
                }
                None => {
                    // [lo, inf): decay required; each |term| peaks at x = lo,
                    // so sum |coef| e^(rate*lo) bounds |f| on the whole tail.
                    for t in &piece.terms {
                        if rate_sign(&t.rate, basis)? != Some(Ordering::Less) {
                            return Err(PwError::InfiniteMeasure);
                        }
                    }
                    let mut upper = Enclosure::zero(prec);
                    for t in &terms {
                        upper = upper.add(&t.coef.abs().mul(&t.rate.mul(&lo).exp()));
                    }
                    let at_lo = range_over(&terms, &lo, prec).abs();
                    Ok(Enclosure::new(
                        at_lo.lo().clone().min(upper.hi().clone()),
                        upper.hi().clone(),
                        prec,
                    ))
                }
            }
        }
    }
}

/// Certified supremum of |expr| over [u, v] by branch and bound.
///
/// Cell upper bounds use the centered form |f(mid)| + |f'|_cell * w/2
/// intersected with the plain range bound; the centered form keeps the
/// bound second-order near smooth maxima, where plain interval bounds
/// would stall.
pub(crate) fn branch_bound_sup(
    terms: &[NumTerm],
    u: &BigRational,
    v: &BigRational,
    prec: u32,
) -> Enclosure {
    let tol_bits = (prec.min(88) / 2) as i64;
    let tol = Dyadic::power_of_two(-tol_bits);
    let deriv = differentiate(terms);
    let point = |x: &BigRational| -> Enclosure {
        range_over(terms, &rational_enclosure(x, prec), prec).abs()
    };
    let mut best_lower = point(u).lo().clone().max(point(v).lo().clone());
    // Returns (midpoint value, upper bound for sup |f| over [a, b]).
    let cell_bounds = |a: &BigRational, b: &BigRational| -> (Enclosure, Dyadic) {
        let x = rational_enclosure(a, prec).hull(&rational_enclosure(b, prec));
        let plain = range_over(terms, &x, prec).abs();
        let mid = (a + b) / BigRational::from_integer(2.into());
        let m_val = point(&mid);
        let slope = range_over(&deriv, &x, prec).abs();
        let half_w = rational_enclosure(&((b - a) / BigRational::from_integer(2.into())), prec);
        let centered = m_val.add(&slope.mul(&half_w));
        (m_val, plain.hi().clone().min(centered.hi().clone()))
    };
    let mut frontier: Vec<(BigRational, BigRational, Dyadic)> = Vec::new();
    {
        let (m_val, ub) = cell_bounds(u, v);
        if m_val.lo() > &best_lower {
            best_lower = m_val.lo().clone();
        }
        frontier.push((u.clone(), v.clone(), ub));
    }
    let mut iterations = 20_000usize;
    loop {
        let idx = match frontier
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .2.cmp(&b.1 .2))
            .map(|(i, _)| i)
        {
            Some(i) => i,
            None => break,
        };
        let worst = frontier[idx].2.clone();
        if worst <= best_lower.add(&tol) || iterations == 0 {
            break;
        }
        iterations -= 1;
        let (a, b, _) = frontier.swap_remove(idx);
        let mid = (&a + &b) / BigRational::from_integer(2.into());
        for (s, t) in [(a, mid.clone()), (mid, b)] {
            let (m_val, ub) = cell_bounds(&s, &t);
            if m_val.lo() > &best_lower {
                best_lower = m_val.lo().clone();
            }
            if ub > best_lower {
                frontier.push((s, t, ub));
            }
        }
    }
    let mut upper = best_lower.clone();
    for (_, _, ub) in &frontier {
        if ub > &upper {
            upper = ub.clone();
        }
    }
    Enclosure::new(best_lower, upper, prec)
}

#[cfg(test)]
mod tests {
    use super::super::test_support::{chi, rat};
    use super::*;
    use crate::exactreal::LinearForm;

    fn basis() -> SymbolBasis {
        SymbolBasis::sqrt_primes(4)
    }

    #[test]
    fn superlevel_of_indicator_is_support_length() {
        let b = basis();
        let f = chi((0, 1), (1, 2), &b);
        let eps = MonomialSum::from_rational(rat(1, 2));
        let exact = superlevel_measure_exact(&f, &eps, &b).unwrap().unwrap();
        assert_eq!(exact.as_rational().unwrap(), rat(1, 2));
        let enc = superlevel_measure(&f, &eps, 64, &b).unwrap();
        assert!(enc.is_exact());
        assert!(enc.contains_rational(&rat(1, 2)));
    }

    #[test]
    fn superlevel_zero_function() {
        let b = basis();
        let f = PwExpFun::zero(Domain::UnitInterval);
        let eps = MonomialSum::from_rational(rat(1, 7));
        let enc = superlevel_measure(&f, &eps, 64, &b).unwrap();
        assert!(enc.is_exact());
        assert!(enc.contains_rational(&rat(0, 1)));
    }

    #[test]
    fn superlevel_rejects_nonpositive_eps() {
        let b = basis();
        let f = chi((0, 1), (1, 2), &b);
        assert_eq!(
            superlevel_measure(&f, &MonomialSum::zero(), 64, &b),
            Err(PwError::NonpositiveEpsilon)
        );
    }

    #[test]
    fn superlevel_monotone_crossing_is_exact() {
        let b = basis();
        // f = e^{-x} chi_[0,1], eps = e^{-1/2}: crossing at exactly 1/2.
        let f = PwExpFun::single_piece(
            Domain::UnitInterval,
            Interval::rational(rat(0, 1), rat(1, 1)).unwrap(),
            vec![ExpTerm { coef: MonomialSum::one(), rate: LinearForm::constant_i64(-1) }],
            &b,
        )
        .unwrap();
        let eps = MonomialSum::exp_form(LinearForm::constant(rat(-1, 2)));
        let exact = superlevel_measure_exact(&f, &eps, &b).unwrap().unwrap();
        assert_eq!(exact.as_rational().unwrap(), rat(1, 2));
    }

    #[test]
    fn superlevel_bisection_brackets_crossing() {
        let b = basis();
        // Same function, eps = 1/2: crossing at ln 2 = 0.6931471805...
        let f = PwExpFun::single_piece(
            Domain::UnitInterval,
            Interval::rational(rat(0, 1), rat(1, 1)).unwrap(),
            vec![ExpTerm { coef: MonomialSum::one(), rate: LinearForm::constant_i64(-1) }],
            &b,
        )
        .unwrap();
        let eps = MonomialSum::from_rational(rat(1, 2));
        let enc = superlevel_measure(&f, &eps, 96, &b).unwrap();
        crate::exactreal::testutil::assert_brackets(&enc, 693147180559945309, 1000000000000000000);
    }

    #[test]
    fn ess_sup_indicator_over_unit() {
        let b = basis();
        let f = chi((0, 1), (1, 2), &b);
        let exact = ess_sup_exact(&f, &full_region(Domain::UnitInterval), &b)
            .unwrap()
            .unwrap();
        assert_eq!(exact, MonomialSum::one());
    }

    #[test]
    fn ess_sup_constant_halfline_piece() {
        let b = basis();
        // (1/7) chi_[0,7] over [0, inf): sup = 1/7 exactly.
        let f = PwExpFun::scaled_indicator(
            Domain::HalfLine,
            Interval::rational(rat(0, 1), rat(7, 1)).unwrap(),
            MonomialSum::from_rational(rat(1, 7)),
            &b,
        )
        .unwrap();
        let exact = ess_sup_exact(&f, &full_region(Domain::HalfLine), &b)
            .unwrap()
            .unwrap();
        assert_eq!(exact.as_rational().unwrap(), rat(1, 7));
    }

    #[test]
    fn ess_sup_monotone_exponential_attained_at_left() {
        let b = basis();
        // |e^{-sqrt2 w}| over [0,1]: attained at w = 0, value 1 exactly.
        let f = PwExpFun::single_piece(
            Domain::UnitInterval,
            Interval::rational(rat(0, 1), rat(1, 1)).unwrap(),
            vec![ExpTerm { coef: MonomialSum::one(), rate: LinearForm::symbol(1).neg() }],
            &b,
        )
        .unwrap();
        let exact = ess_sup_exact(&f, &full_region(Domain::UnitInterval), &b)
            .unwrap()
            .unwrap();
        assert_eq!(exact, MonomialSum::one());
    }

    #[test]
    fn ess_sup_empty_region_is_rejected() {
        let b = basis();
        let f = chi((0, 1), (1, 2), &b);
        assert_eq!(
            ess_sup_exact(&f, &[], &b),
            Err(PwError::EmptyRegion)
        );
    }

    #[test]
    fn branch_bound_finds_interior_maximum() {
        let b = basis();
        // f(x) = e^{-x} - e^{-2x} has max at x = ln 2, value 1/4.
        let terms = vec![
            ExpTerm { coef: MonomialSum::one(), rate: LinearForm::constant_i64(-1) },
            ExpTerm { coef: MonomialSum::from_integer(-1), rate: LinearForm::constant_i64(-2) },
        ];
        let nt = num_terms(&terms, &b, 128).unwrap();
        let sup = branch_bound_sup(&nt, &rat(0, 1), &rat(1, 1), 128);
        assert!(sup.contains_rational(&rat(1, 4)));
        assert!(sup.width() <= Dyadic::power_of_two(-40));
    }
}
