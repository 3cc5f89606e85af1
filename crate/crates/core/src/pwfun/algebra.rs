//! Pointwise algebra on piecewise-exponential functions: linear
//! combinations, products, and powers, all exact. Piece boundaries are
//! refined by overlaying the endpoint grids of both operands.

use std::cmp::Ordering;

use super::{cmp_values, ExpPiece, ExpTerm, Interval, PwError, PwExpFun};
use crate::exactreal::{MonomialSum, SymbolBasis};

/// Sentinel rank for +infinity.
const INF: usize = usize::MAX;

/// The merged endpoint grid of two functions, with each piece of each
/// operand mapped to a half-open rank range [lo_rank, hi_rank).
struct Overlay {
    points: Vec<MonomialSum>,
    any_unbounded: bool,
    left: Vec<(usize, usize, usize)>,  // (piece index, lo rank, hi rank)
    right: Vec<(usize, usize, usize)>,
}

fn insert_point(
    points: &mut Vec<MonomialSum>,
    v: &MonomialSum,
    basis: &SymbolBasis,
) -> Result<usize, PwError> {
    for (i, p) in points.iter().enumerate() {
        match cmp_values(v, p, basis)? {
            Ordering::Equal => return Ok(i),
            Ordering::Less => {
                points.insert(i, v.clone());
                return Ok(i);
            }
            Ordering::Greater => {}
        }
    }
    points.push(v.clone());
    Ok(points.len() - 1)
}

fn overlay(f: &PwExpFun, g: &PwExpFun, basis: &SymbolBasis) -> Result<Overlay, PwError> {
    let mut points: Vec<MonomialSum> = Vec::new();
    let mut any_unbounded = false;
    for fun in [f, g] {
        for p in fun.pieces() {
            insert_point(&mut points, p.interval.lo(), basis)?;
            match p.interval.hi() {
                Some(hi) => {
                    insert_point(&mut points, hi, basis)?;
                }
                None => any_unbounded = true,
            }
        }
    }
    let rank_of = |fun: &PwExpFun| -> Result<Vec<(usize, usize, usize)>, PwError> {
        let mut out = Vec::with_capacity(fun.pieces().len());
        for (idx, p) in fun.pieces().iter().enumerate() {
            let lo = points
                .iter()
                .position(|q| q == p.interval.lo())
                .expect("endpoint was inserted");
            let hi = match p.interval.hi() {
                Some(h) => points.iter().position(|q| q == h).expect("endpoint was inserted"),
                None => INF,
            };
            out.push((idx, lo, hi));
        }
        Ok(out)
    };
    let left = rank_of(f)?;
    let right = rank_of(g)?;
    Ok(Overlay { points, any_unbounded, left, right })
}

impl Overlay {
    /// Iterate the cells of the merged grid as (interval, f-piece, g-piece).
    fn cells<'a>(
        &'a self,
        f: &'a PwExpFun,
        g: &'a PwExpFun,
    ) -> impl Iterator<Item = (Interval, Option<&'a ExpPiece>, Option<&'a ExpPiece>)> + 'a {
        let n = self.points.len();
        let bounded = (0..n.saturating_sub(1)).map(move |i| {
            let cell = Interval {
                lo: self.points[i].clone(),
                hi: Some(self.points[i + 1].clone()),
                lo_closed: true,
                hi_closed: true,
            };
            let fp = covering_piece(&self.left, f, i, i + 1);
            let gp = covering_piece(&self.right, g, i, i + 1);
            (cell, fp, gp)
        });
        let tail = self
            .any_unbounded
            .then(|| {
                let i = n - 1;
                let cell = Interval {
                    lo: self.points[i].clone(),
                    hi: None,
                    lo_closed: true,
                    hi_closed: false,
                };
                let fp = covering_piece(&self.left, f, i, INF);
                let gp = covering_piece(&self.right, g, i, INF);
                (cell, fp, gp)
            })
            .into_iter();
        bounded.chain(tail)
    }
}

fn covering_piece<'a>(
    ranks: &[(usize, usize, usize)],
    fun: &'a PwExpFun,
    cell_lo: usize,
    cell_hi: usize,
) -> Option<&'a ExpPiece> {
    for (idx, lo, hi) in ranks {
        let hi_ok = if *hi == INF { true } else { cell_hi != INF && cell_hi <= *hi };
        if *lo <= cell_lo && hi_ok {
            return Some(&fun.pieces()[*idx]);
        }
    }
    None
}

fn scale_terms(terms: &[ExpTerm], factor: &MonomialSum) -> Vec<ExpTerm> {
    terms
        .iter()
        .map(|t| ExpTerm { coef: t.coef.mul(factor), rate: t.rate.clone() })
        .collect()
}

/// Exact a*f + b*g with scalar monomial-sum weights.
pub fn linear_combine(
    a: &MonomialSum,
    f: &PwExpFun,
    b: &MonomialSum,
    g: &PwExpFun,
    basis: &SymbolBasis,
) -> Result<PwExpFun, PwError> {
    if f.domain() != g.domain() {
        return Err(PwError::DomainMismatch);
    }
    let ov = overlay(f, g, basis)?;
    let mut pieces = Vec::new();
    for (cell, fp, gp) in ov.cells(f, g) {
        let mut terms = Vec::new();
        if let Some(p) = fp {
            if !a.is_zero() {
                terms.extend(scale_terms(&p.terms, a));
            }
        }
        if let Some(p) = gp {
            if !b.is_zero() {
                terms.extend(scale_terms(&p.terms, b));
            }
        }
        pieces.push(ExpPiece::new(cell, terms));
    }
    PwExpFun::new(f.domain(), pieces, basis)
}

/// Exact pointwise product: supports intersect, rates add, coefficients
/// multiply.
pub fn multiply(f: &PwExpFun, g: &PwExpFun, basis: &SymbolBasis) -> Result<PwExpFun, PwError> {
    if f.domain() != g.domain() {
        return Err(PwError::DomainMismatch);
    }
    let ov = overlay(f, g, basis)?;
    let mut pieces = Vec::new();
    for (cell, fp, gp) in ov.cells(f, g) {
        if let (Some(pf), Some(pg)) = (fp, gp) {
            let mut terms = Vec::new();
            for tf in &pf.terms {
                for tg in &pg.terms {
                    terms.push(ExpTerm {
                        coef: tf.coef.mul(&tg.coef),
                        rate: tf.rate.add(&tg.rate),
                    });
                }
            }
            pieces.push(ExpPiece::new(cell, terms));
        }
    }
    PwExpFun::new(f.domain(), pieces, basis)
}

/// Exact m-th pointwise power, m >= 1. For indicator-valued functions the
/// result is structurally identical to the input.
pub fn power(f: &PwExpFun, m: u32, basis: &SymbolBasis) -> Result<PwExpFun, PwError> {
    assert!(m >= 1, "power requires m >= 1");
    let mut acc = f.clone();
    for _ in 1..m {
        acc = multiply(&acc, f, basis)?;
    }
    Ok(acc)
}

/// Scalar multiple convenience.
pub fn scale(f: &PwExpFun, a: &MonomialSum, basis: &SymbolBasis) -> Result<PwExpFun, PwError> {
    linear_combine(a, f, &MonomialSum::zero(), &PwExpFun::zero(f.domain()), basis)
}

#[cfg(test)]
mod tests {
    use super::super::test_support::{chi, rat};
    use super::super::Domain;
    use super::*;
    use crate::exactreal::LinearForm;

    fn basis() -> SymbolBasis {
        SymbolBasis::sqrt_primes(4)
    }

    fn ms(n: i64) -> MonomialSum {
        MonomialSum::from_integer(n)
    }

    #[test]
    fn adjacent_indicators_stay_two_pieces() {
        let b = basis();
        let f = chi((0, 1), (1, 2), &b);
        let g = chi((1, 2), (1, 1), &b);
        let sum = linear_combine(&ms(1), &f, &ms(1), &g, &b).unwrap();
        assert_eq!(sum.pieces().len(), 2);
        assert_eq!(sum.evaluate_exact(&rat(1, 4), &b).unwrap(), ms(1));
        assert_eq!(sum.evaluate_exact(&rat(3, 4), &b).unwrap(), ms(1));
    }

    #[test]
    fn f_minus_f_is_zero() {
        let b = basis();
        let f = chi((0, 1), (2, 3), &b);
        let diff = linear_combine(&ms(1), &f, &ms(-1), &f, &b).unwrap();
        assert!(diff.is_zero());
    }

    #[test]
    fn overlay_splits_three_ways() {
        // 2*chi_[0,3/4] + 3*chi_[1/4,1] -> [0,1/4]:2, [1/4,3/4]:5, [3/4,1]:3
        let b = basis();
        let f = chi((0, 1), (3, 4), &b);
        let g = chi((1, 4), (1, 1), &b);
        let sum = linear_combine(&ms(2), &f, &ms(3), &g, &b).unwrap();
        assert_eq!(sum.pieces().len(), 3);
        assert_eq!(sum.evaluate_exact(&rat(1, 8), &b).unwrap(), ms(2));
        assert_eq!(sum.evaluate_exact(&rat(1, 2), &b).unwrap(), ms(5));
        assert_eq!(sum.evaluate_exact(&rat(7, 8), &b).unwrap(), ms(3));
        assert_eq!(
            sum.pieces()[1].interval.rational_endpoints().unwrap(),
            (rat(1, 4), rat(3, 4))
        );
    }

    #[test]
    fn product_intersects_supports() {
        let b = basis();
        let f = chi((0, 1), (1, 2), &b);
        let g = chi((1, 4), (1, 1), &b);
        let prod = multiply(&f, &g, &b).unwrap();
        assert_eq!(prod.pieces().len(), 1);
        assert_eq!(
            prod.pieces()[0].interval.rational_endpoints().unwrap(),
            (rat(1, 4), rat(1, 2))
        );
        assert!(prod.is_indicator());
    }

    #[test]
    fn product_of_exponentials_adds_rates() {
        let b = basis();
        let unit = Interval::rational(rat(0, 1), rat(1, 1)).unwrap();
        let f = PwExpFun::single_piece(
            Domain::UnitInterval,
            unit.clone(),
            vec![ExpTerm { coef: MonomialSum::one(), rate: LinearForm::symbol(1).neg() }],
            &b,
        )
        .unwrap();
        let g = PwExpFun::single_piece(
            Domain::UnitInterval,
            unit.clone(),
            vec![ExpTerm { coef: MonomialSum::one(), rate: LinearForm::symbol(2).neg() }],
            &b,
        )
        .unwrap();
        let prod = multiply(&f, &g, &b).unwrap();
        let expected = PwExpFun::single_piece(
            Domain::UnitInterval,
            unit,
            vec![ExpTerm {
                coef: MonomialSum::one(),
                rate: LinearForm::symbol(1).add(&LinearForm::symbol(2)).neg(),
            }],
            &b,
        )
        .unwrap();
        assert_eq!(prod, expected);
    }

    #[test]
    fn product_with_zero_is_zero() {
        let b = basis();
        let f = chi((0, 1), (1, 2), &b);
        let z = PwExpFun::zero(Domain::UnitInterval);
        assert!(multiply(&f, &z, &b).unwrap().is_zero());
    }

    #[test]
    fn indicator_powers_collapse_structurally() {
        let b = basis();
        let f = chi((1, 3), (2, 3), &b);
        let p5 = power(&f, 5, &b).unwrap();
        assert_eq!(p5, f);
        let p1 = power(&f, 1, &b).unwrap();
        assert_eq!(p1, f);
    }

    #[test]
    fn exponential_square_doubles_rate() {
        let b = basis();
        let unit = Interval::rational(rat(0, 1), rat(1, 1)).unwrap();
        let f = PwExpFun::single_piece(
            Domain::UnitInterval,
            unit.clone(),
            vec![ExpTerm { coef: MonomialSum::one(), rate: LinearForm::symbol(1).neg() }],
            &b,
        )
        .unwrap();
        let sq = power(&f, 2, &b).unwrap();
        let expected = PwExpFun::single_piece(
            Domain::UnitInterval,
            unit,
            vec![ExpTerm {
                coef: MonomialSum::one(),
                rate: LinearForm::scaled_symbol(1, rat(-2, 1)),
            }],
            &b,
        )
        .unwrap();
        assert_eq!(sq, expected);
    }

    #[test]
    fn domain_mismatch_is_rejected() {
        let b = basis();
        let f = chi((0, 1), (1, 2), &b);
        let g = PwExpFun::indicator(
            Domain::HalfLine,
            Interval::rational(rat(0, 1), rat(1, 1)).unwrap(),
            &b,
        )
        .unwrap();
        assert_eq!(
            linear_combine(&ms(1), &f, &ms(1), &g, &b),
            Err(PwError::DomainMismatch)
        );
    }

    #[test]
    fn halfline_unbounded_pieces_combine() {
        let b = basis();
        let f = PwExpFun::single_piece(
            Domain::HalfLine,
            Interval::unbounded(MonomialSum::zero()).unwrap(),
            vec![ExpTerm { coef: MonomialSum::one(), rate: LinearForm::constant_i64(-1) }],
            &b,
        )
        .unwrap();
        let g = PwExpFun::indicator(
            Domain::HalfLine,
            Interval::rational(rat(0, 1), rat(2, 1)).unwrap(),
            &b,
        )
        .unwrap();
        let sum = linear_combine(&ms(1), &f, &ms(1), &g, &b).unwrap();
        // Cells: [0,2] carrying e^-x + 1, and [2,inf) carrying e^-x.
        assert_eq!(sum.pieces().len(), 2);
        assert!(!sum.pieces()[1].interval.is_bounded());
        let v = sum.evaluate_exact(&rat(0, 1), &b).unwrap();
        assert_eq!(v.as_rational().unwrap(), rat(2, 1));
    }
}
