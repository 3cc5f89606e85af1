//! L1 norms and the convergence-in-measure metric
//! `rho(f,g) = int_[0,1] |f-g| / (1+|f-g|) dx`.
//!
//! Constant-piece integrands integrate exactly in rational arithmetic.
//! Exponential pieces use the symbolic antiderivative when the rate is a
//! rational constant, an enclosure of the same formula otherwise, and for
//! rho an adaptive midpoint rule with a certified second-derivative
//! remainder. Sign changes are isolated by bisection; undecided cells
//! contribute their worst case.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;

use super::measure::{abs_exact, differentiate, num_terms, range_over, rational_enclosure, NumTerm};
use super::{linear_combine, Domain, ExpPiece, PwError, PwExpFun};
use crate::exactreal::{
    Dyadic, Enclosure, LinearForm, Monomial, MonomialSum, SymbolBasis, DEFAULT_BUDGET,
};

fn rate_sign(rate: &LinearForm, basis: &SymbolBasis) -> Result<Option<Ordering>, PwError> {
    Ok(rate.sign(basis, DEFAULT_BUDGET)?)
}

/// Reject pieces on unbounded intervals whose expression does not decay.
fn check_integrable(piece: &ExpPiece, basis: &SymbolBasis) -> Result<(), PwError> {
    if piece.interval.is_bounded() {
        return Ok(());
    }
    for t in &piece.terms {
        if rate_sign(&t.rate, basis)? != Some(Ordering::Less) {
            return Err(PwError::NonIntegrable);
        }
    }
    Ok(())
}

/// Exact L1 norm in the monomial fragment, when available: pieces must be
/// constant or single-term with a rational-constant rate and rational
/// endpoints (an unbounded endpoint with a negative rate also integrates).
pub fn l1_norm_exact(f: &PwExpFun, basis: &SymbolBasis) -> Result<Option<MonomialSum>, PwError> {
    let mut acc = MonomialSum::zero();
    for piece in f.pieces() {
        check_integrable(piece, basis)?;
        match piece_l1_exact(piece, basis)? {
            Some(v) => acc = acc.add(&v),
            None => return Ok(None),
        }
    }
    Ok(Some(acc))
}

fn piece_l1_exact(piece: &ExpPiece, basis: &SymbolBasis) -> Result<Option<MonomialSum>, PwError> {
    if let Some(v) = piece.constant_value() {
        let mag = match abs_exact(v, basis) {
            Some(m) => m,
            None => return Ok(None),
        };
        return match piece.interval.length() {
            Some(len) => Ok(Some(mag.mul(&len))),
            None => Err(PwError::NonIntegrable),
        };
    }
    if piece.terms.len() != 1 {
        return Ok(None);
    }
    let term = &piece.terms[0];
    let r = match term.rate.as_constant() {
        Some(r) if !r.is_zero() => r,
        _ => return Ok(None),
    };
    let mag = match abs_exact(&term.coef, basis) {
        Some(m) => m,
        None => return Ok(None),
    };
    let a = match piece.interval.lo().as_rational() {
        Some(a) => a,
        None => return Ok(None),
    };
    // int_a^b e^{rx} dx = (e^{rb} - e^{ra}) / r, with e^{r*inf} = 0 for r < 0.
    let exp_at = |x: &BigRational| {
        MonomialSum::from_monomial(Monomial::exp_form(LinearForm::constant(r.clone() * x)))
    };
    let integral = match piece.interval.hi() {
        Some(hi) => match hi.as_rational() {
            Some(b) => exp_at(&b).sub(&exp_at(&a)).scale(&r.recip()),
            None => return Ok(None),
        },
        None => {
            if r.is_positive() {
                return Err(PwError::NonIntegrable);
            }
            exp_at(&a).scale(&(-r.recip()))
        }
    };
    Ok(Some(mag.mul(&integral)))
}

/// Certified L1 norm enclosure.
pub fn l1_norm(f: &PwExpFun, prec: u32, basis: &SymbolBasis) -> Result<Enclosure, PwError> {
    if let Some(exact) = l1_norm_exact(f, basis)? {
        return Ok(exact.eval(basis, prec)?);
    }
    let mut acc = Enclosure::zero(prec);
    for piece in f.pieces() {
        check_integrable(piece, basis)?;
        acc = acc.add(&piece_l1_enclosure(piece, prec, basis)?);
    }
    Ok(acc)
}

fn piece_l1_enclosure(
    piece: &ExpPiece,
    prec: u32,
    basis: &SymbolBasis,
) -> Result<Enclosure, PwError> {
    if let Some(v) = piece_l1_exact(piece, basis)? {
        return Ok(v.eval(basis, prec)?);
    }
    let terms = num_terms(&piece.terms, basis, prec)?;
    if piece.terms.len() == 1 {
        // |coef| * |(e^{rb} - e^{ra}) / r|; monotone, sign-constant.
        let t = &piece.terms[0];
        let coef_mag = terms[0].coef.abs();
        let r = &terms[0].rate;
        let a = piece.interval.lo().eval(basis, prec)?;
        let integral = match piece.interval.hi() {
            Some(hi) => {
                let b = hi.eval(basis, prec)?;
                if t.rate.is_zero() {
                    b.sub(&a)
                } else {
                    let num = r.mul(&b).exp().sub(&r.mul(&a).exp());
                    num.div(r)?
                }
            }
            None => {
                // Decay was checked by the caller; r < 0.
                r.mul(&a).exp().div(&r.neg())?
            }
        };
        return Ok(coef_mag.mul(&integral.abs()));
    }
    // Multi-term: sign isolation by bisection, exact-form term integrals on
    // sign-constant cells.
    match piece.interval.rational_endpoints() {
        Some((u, v)) => {
            let mut acc = Enclosure::zero(prec);
            let mut budget = 4096usize;
            l1_bisect(&terms, &u, &v, prec, 0, &mut budget, &mut acc);
            Ok(acc)
        }
        None => {
            // Unbounded multi-term pieces: integrate termwise by |.|,
            // a sound upper bound, with 0 as the lower bound.
            let a = piece.interval.lo().eval(basis, prec)?;
            let mut upper = Enclosure::zero(prec);
            for t in &terms {
                upper = upper.add(&t.coef.abs().mul(&t.rate.mul(&a).exp().div(&t.rate.neg())?));
            }
            Ok(Enclosure::new(Dyadic::zero(), upper.hi().clone(), prec))
        }
    }
}

/// Signed integral of the expression over [u, v] from the antiderivative.
fn signed_integral(terms: &[NumTerm], u: &BigRational, v: &BigRational, prec: u32) -> Enclosure {
    let ue = rational_enclosure(u, prec);
    let ve = rational_enclosure(v, prec);
    let mut acc = Enclosure::zero(prec);
    for t in terms {
        if t.rate.contains_zero() {
            // Rate is the zero form (exact constant term).
            acc = acc.add(&t.coef.mul(&ve.sub(&ue)));
        } else {
            let num = t.rate.mul(&ve).exp().sub(&t.rate.mul(&ue).exp());
            match num.div(&t.rate) {
                Ok(q) => acc = acc.add(&t.coef.mul(&q)),
                Err(_) => {
                    // Rate enclosure straddles zero: fall back to len * range.
                    let x = ue.hull(&ve);
                    let bound = range_over(terms, &x, prec).abs();
                    let len = ve.sub(&ue);
                    return Enclosure::new(Dyadic::zero(), bound.hi().clone(), prec)
                        .mul(&len);
                }
            }
        }
    }
    acc
}

fn l1_bisect(
    terms: &[NumTerm],
    u: &BigRational,
    v: &BigRational,
    prec: u32,
    depth: u32,
    budget: &mut usize,
    acc: &mut Enclosure,
) {
    if v <= u {
        return;
    }
    let x = rational_enclosure(u, prec).hull(&rational_enclosure(v, prec));
    let range = range_over(terms, &x, prec);
    if range.lo().is_positive() {
        *acc = acc.add(&signed_integral(terms, u, v, prec));
        return;
    }
    if range.hi().is_negative() {
        *acc = acc.add(&signed_integral(terms, u, v, prec).neg());
        return;
    }
    if depth >= 48 || *budget == 0 {
        let len = rational_enclosure(&(v - u), prec);
        let bound = range.abs();
        *acc = acc.add(&Enclosure::new(Dyadic::zero(), bound.hi().clone(), prec).mul(&len));
        return;
    }
    *budget -= 1;
    let mid = (u + v) / BigRational::from_integer(2.into());
    l1_bisect(terms, u, &mid, prec, depth + 1, budget, acc);
    l1_bisect(terms, &mid, v, prec, depth + 1, budget, acc);
}

// ---------------------------------------------------------------------------
// The metric rho
// ---------------------------------------------------------------------------

/// Exact rational value of rho(f, g) when f - g is a rational step function.
pub fn rho_exact(
    f: &PwExpFun,
    g: &PwExpFun,
    basis: &SymbolBasis,
) -> Result<Option<BigRational>, PwError> {
    if f.domain() != Domain::UnitInterval || g.domain() != Domain::UnitInterval {
        return Err(PwError::DomainMismatch);
    }
    let d = linear_combine(
        &MonomialSum::one(),
        f,
        &MonomialSum::from_integer(-1),
        g,
        basis,
    )?;
    let mut acc = BigRational::zero();
    for piece in d.pieces() {
        let c = match piece.constant_value().and_then(|v| v.as_rational()) {
            Some(c) => c,
            None => return Ok(None),
        };
        let (a, b) = match piece.interval.rational_endpoints() {
            Some(ab) => ab,
            None => return Ok(None),
        };
        let mag = c.abs();
        acc += (b - a) * &mag / (BigRational::one() + mag);
    }
    Ok(Some(acc))
}

/// Certified enclosure of rho(f, g). Exact for rational step differences;
/// otherwise an adaptive midpoint quadrature with a second-derivative
/// remainder, refined toward 2^-(prec/2) within an internal cell budget.
pub fn rho(
    f: &PwExpFun,
    g: &PwExpFun,
    prec: u32,
    basis: &SymbolBasis,
) -> Result<Enclosure, PwError> {
    if let Some(exact) = rho_exact(f, g, basis)? {
        return Ok(Enclosure::from_rational(&exact, prec));
    }
    let d = linear_combine(
        &MonomialSum::one(),
        f,
        &MonomialSum::from_integer(-1),
        g,
        basis,
    )?;
    let mut acc = Enclosure::zero(prec);
    for piece in d.pieces() {
        acc = acc.add(&piece_rho(piece, prec, basis)?);
    }
    Ok(acc)
}

struct RhoCell {
    u: BigRational,
    v: BigRational,
    value: Enclosure,
}

fn piece_rho(piece: &ExpPiece, prec: u32, basis: &SymbolBasis) -> Result<Enclosure, PwError> {
    // Constant pieces integrate exactly.
    if let (Some(c), Some((a, b))) = (
        piece.constant_value().and_then(|v| v.as_rational()),
        piece.interval.rational_endpoints(),
    ) {
        let mag = c.abs();
        let value = (b - a) * &mag / (BigRational::one() + mag);
        return Ok(Enclosure::from_rational(&value, prec));
    }
    let (u, v) = piece
        .interval
        .rational_endpoints()
        .expect("unit-interval pieces have rational endpoints");
    let d0 = num_terms(&piece.terms, basis, prec)?;
    let d1 = differentiate(&d0);
    let d2 = differentiate(&d1);
    let tol = Dyadic::power_of_two(-((prec / 2) as i64));
    let first = RhoCell { value: rho_cell_value(&d0, &d1, &d2, &u, &v, prec), u, v };
    let mut total_width = first.value.width();
    let mut cells: Vec<RhoCell> = vec![first];
    let mut budget = 20_000usize;
    let min_len = BigRational::new(1.into(), num_bigint::BigInt::from(2u8).pow(60));
    while total_width > tol && budget > 0 {
        // Split the widest cell.
        let idx = cells
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.value.width().cmp(&b.1.value.width()))
            .map(|(i, _)| i)
            .expect("at least one cell");
        if &cells[idx].v - &cells[idx].u <= min_len {
            break;
        }
        budget -= 1;
        let cell = cells.swap_remove(idx);
        total_width = total_width.sub(&cell.value.width());
        let mid = (&cell.u + &cell.v) / BigRational::from_integer(2.into());
        for (s, t) in [(cell.u, mid.clone()), (mid, cell.v)] {
            let c = RhoCell { value: rho_cell_value(&d0, &d1, &d2, &s, &t, prec), u: s, v: t };
            total_width = total_width.add(&c.value.width());
            cells.push(c);
        }
    }
    let mut acc = Enclosure::zero(prec);
    for c in &cells {
        acc = acc.add(&c.value);
    }
    Ok(acc)
}

/// Enclosure of int_u^v |d| / (1 + |d|) dx on one cell.
fn rho_cell_value(
    d0: &[NumTerm],
    d1: &[NumTerm],
    d2: &[NumTerm],
    u: &BigRational,
    v: &BigRational,
    prec: u32,
) -> Enclosure {
    let len_q = v - u;
    let len = rational_enclosure(&len_q, prec);
    let x = rational_enclosure(u, prec).hull(&rational_enclosure(v, prec));
    let range = range_over(d0, &x, prec);
    let integrand_cap = range
        .abs()
        .metric_transform()
        .unwrap_or_else(|_| Enclosure::one(prec));
    let worst = Enclosure::new(Dyadic::zero(), integrand_cap.hi().clone(), prec).mul(&len);
    if range.contains_zero() {
        // Sign not resolved; worst case is sound and shrinks with the cell.
        return worst;
    }
    // Sign-constant cell: midpoint value with a g'' L^3 / 24 remainder.
    let mid = (u + v) / BigRational::from_integer(2.into());
    let t_mid = range_over(d0, &rational_enclosure(&mid, prec), prec).abs();
    let g_mid = match t_mid.metric_transform() {
        Ok(gm) => gm,
        Err(_) => return worst,
    };
    let base = g_mid.mul(&len);
    let t0 = range.abs();
    let t1 = range_over(d1, &x, prec);
    let t2 = range_over(d2, &x, prec);
    let one_plus = Enclosure::one(prec).add(&t0);
    let inv2 = match one_plus.pow_u32(2).recip() {
        Ok(v) => v,
        Err(_) => return worst,
    };
    let inv3 = match one_plus.pow_u32(3).recip() {
        Ok(v) => v,
        Err(_) => return worst,
    };
    // |g''| <= |t2|/(1+t0)^2 + 2 t1^2/(1+t0)^3.
    let bound = t2
        .abs()
        .mul(&inv2)
        .add(&t1.mul(&t1).abs().mul(&inv3).mul_2exp(1));
    let len3 = len.pow_u32(3);
    let err = bound
        .mul(&len3)
        .mul_rational(&BigRational::new(1.into(), 24.into()))
        .hi()
        .clone();
    let est = Enclosure::new(
        base.lo().sub(&err).max(Dyadic::zero()),
        base.hi().add(&err),
        prec,
    );
    // The worst-case bound stays valid; intersect for sharpness.
    est.intersect(&worst).unwrap_or(worst)
}

#[cfg(test)]
mod tests {
    use super::super::test_support::{chi, rat};
    use super::super::ExpTerm;
    use super::*;
    use crate::exactreal::{LinearForm, SymbolBasis};
    use crate::pwfun::Interval;

    fn basis() -> SymbolBasis {
        SymbolBasis::sqrt_primes(4)
    }

    #[test]
    fn l1_of_scaled_indicator_is_one() {
        let b = basis();
        // (1/5) chi_[0,5] on the half line: exact 1.
        let f = PwExpFun::scaled_indicator(
            Domain::HalfLine,
            Interval::rational(rat(0, 1), rat(5, 1)).unwrap(),
            MonomialSum::from_rational(rat(1, 5)),
            &b,
        )
        .unwrap();
        let exact = l1_norm_exact(&f, &b).unwrap().unwrap();
        assert_eq!(exact.as_rational().unwrap(), rat(1, 1));
    }

    #[test]
    fn l1_of_decaying_exponential_on_halfline() {
        let b = basis();
        // e^{-x} on [0, inf): exactly 1.
        let f = PwExpFun::single_piece(
            Domain::HalfLine,
            Interval::unbounded(MonomialSum::zero()).unwrap(),
            vec![ExpTerm { coef: MonomialSum::one(), rate: LinearForm::constant_i64(-1) }],
            &b,
        )
        .unwrap();
        let exact = l1_norm_exact(&f, &b).unwrap().unwrap();
        assert_eq!(exact, MonomialSum::one());
        let enc = l1_norm(&f, 96, &b).unwrap();
        assert!(enc.contains_rational(&rat(1, 1)));
    }

    #[test]
    fn l1_rejects_growing_tail() {
        let b = basis();
        let f = PwExpFun::single_piece(
            Domain::HalfLine,
            Interval::unbounded(MonomialSum::zero()).unwrap(),
            vec![ExpTerm { coef: MonomialSum::one(), rate: LinearForm::constant_i64(1) }],
            &b,
        )
        .unwrap();
        assert_eq!(l1_norm(&f, 64, &b), Err(PwError::NonIntegrable));
    }

    #[test]
    fn l1_multi_term_sign_split() {
        let b = basis();
        // e^{-x} - e^{-2x} >= 0 on [0,1]:
        // integral = [-e^{-x} + e^{-2x}/2] from 0 to 1
        //          = 1/2 - e^{-1} + e^{-2}/2 = 0.19978820044686402...
        let f = PwExpFun::single_piece(
            Domain::UnitInterval,
            Interval::rational(rat(0, 1), rat(1, 1)).unwrap(),
            vec![
                ExpTerm { coef: MonomialSum::one(), rate: LinearForm::constant_i64(-1) },
                ExpTerm { coef: MonomialSum::from_integer(-1), rate: LinearForm::constant_i64(-2) },
            ],
            &b,
        )
        .unwrap();
        let enc = l1_norm(&f, 96, &b).unwrap();
        crate::exactreal::testutil::assert_brackets(&enc, 199788200446864024, 1000000000000000000);
    }

    #[test]
    fn rho_of_half_indicator_is_quarter() {
        let b = basis();
        let f = chi((0, 1), (1, 2), &b);
        let z = PwExpFun::zero(Domain::UnitInterval);
        let exact = rho_exact(&f, &z, &b).unwrap().unwrap();
        assert_eq!(exact, rat(1, 4));
    }

    #[test]
    fn rho_is_zero_on_equal_functions() {
        let b = basis();
        let f = chi((1, 8), (5, 8), &b);
        assert_eq!(rho_exact(&f, &f, &b).unwrap().unwrap(), rat(0, 1));
    }

    #[test]
    fn rho_of_disjoint_typewriter_windows() {
        let b = basis();
        // rho(chi_[0,1/2], chi_[1/2,1]) = 1/2: |difference| = 1 a.e.
        let f = chi((0, 1), (1, 2), &b);
        let g = chi((1, 2), (1, 1), &b);
        assert_eq!(rho_exact(&f, &g, &b).unwrap().unwrap(), rat(1, 2));
    }

    #[test]
    fn rho_quadrature_brackets_exponential_integrand() {
        let b = basis();
        // rho(e^{-x} chi_[0,1], 0) = int_0^1 e^{-x}/(1+e^{-x}) dx
        //   = ln(2) - ln(1 + e^{-1}) = 0.37988549304172247...
        let f = PwExpFun::single_piece(
            Domain::UnitInterval,
            Interval::rational(rat(0, 1), rat(1, 1)).unwrap(),
            vec![ExpTerm { coef: MonomialSum::one(), rate: LinearForm::constant_i64(-1) }],
            &b,
        )
        .unwrap();
        let z = PwExpFun::zero(Domain::UnitInterval);
        let enc = rho(&f, &z, 40, &b).unwrap();
        crate::exactreal::testutil::assert_brackets(&enc, 379885493041722475, 1000000000000000000);
        assert!(enc.width() <= Dyadic::power_of_two(-20));
    }

    #[test]
    fn rho_rejects_halfline_operands() {
        let b = basis();
        let f = PwExpFun::indicator(
            Domain::HalfLine,
            Interval::rational(rat(0, 1), rat(1, 1)).unwrap(),
            &b,
        )
        .unwrap();
        assert_eq!(rho_exact(&f, &f, &b), Err(PwError::DomainMismatch));
    }
}
