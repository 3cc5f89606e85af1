//! The product metric D and eventually-null truncation.
//!
//! D((f_n), (g_n)) = sum_n 2^-n d(f_n, g_n) / (1 + d(f_n, g_n)), where the
//! coordinate distance d is rho on [0,1] and the L1 distance on the half
//! line (the product topology each space carries). The tail past the
//! truncation index N is bounded rigorously by 2^-N and added to the
//! upper endpoint.

use std::sync::Arc;

use super::{FunSeq, PointwiseMeta, SeqError, SeqMeta};
use crate::exactreal::{Dyadic, Enclosure, MonomialSum, SymbolBasis};
use crate::pwfun::{self, Domain, PwExpFun};

/// Coordinate distance: rho on the unit interval, L1 on the half line.
fn coordinate_distance(
    f: &PwExpFun,
    g: &PwExpFun,
    prec: u32,
    basis: &SymbolBasis,
) -> Result<Enclosure, SeqError> {
    let d = match f.domain() {
        Domain::UnitInterval => pwfun::rho(f, g, prec, basis)?,
        Domain::HalfLine => {
            let diff = pwfun::linear_combine(
                &MonomialSum::one(),
                f,
                &MonomialSum::from_integer(-1),
                g,
                basis,
            )?;
            pwfun::l1_norm(&diff, prec, basis)?
        }
    };
    // Distances are nonnegative; clip rounding slack below zero.
    let lo = d.lo().clone().max(Dyadic::zero());
    let hi = d.hi().clone().max(Dyadic::zero());
    Ok(Enclosure::new(lo, hi, prec))
}

/// Enclosure of D(F, G) from the first N coordinates plus a 2^-N tail
/// bound on the upper endpoint.
pub fn d_metric(
    f: &FunSeq,
    g: &FunSeq,
    truncation: u32,
    prec: u32,
    basis: &SymbolBasis,
) -> Result<Enclosure, SeqError> {
    if f.domain() != g.domain() {
        return Err(SeqError::DomainMismatch);
    }
    assert!(truncation >= 1, "the truncation index must be at least 1");
    let mut acc = Enclosure::zero(prec);
    for n in 1..=truncation {
        let fv = f.generate(n);
        let gv = g.generate(n);
        let d = coordinate_distance(&fv, &gv, prec, basis)?;
        let bounded = d.metric_transform()?;
        acc = acc.add(&bounded.mul_2exp(-(n as i64)));
    }
    Ok(acc.widen_upper_2exp(-(truncation as i64)))
}

/// The sequence equal to F for n <= cutoff and 0 afterwards.
pub fn truncate(f: &FunSeq, cutoff: u32) -> FunSeq {
    let inner = f.clone();
    let domain = f.domain();
    let gen = Arc::new(move |n: u32| {
        if n <= cutoff {
            inner.generate(n)
        } else {
            PwExpFun::zero(domain)
        }
    });
    let meta = SeqMeta {
        eventually_null_after: Some(cutoff),
        pointwise: Some(PointwiseMeta::EventuallyZero {
            description: format!("truncated: coordinates vanish beyond n = {}", cutoff),
        }),
        ..SeqMeta::default()
    };
    FunSeq { domain, gen, meta }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pwfun::Interval;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn basis() -> SymbolBasis {
        SymbolBasis::sqrt_primes(3)
    }

    /// The first terms of the typewriter-style indicator family, enough
    /// for metric tests without depending on the witnesses module.
    fn window(n: u32, b: &SymbolBasis) -> PwExpFun {
        let k = 31 - n.leading_zeros();
        let j = n - (1 << k);
        let len = BigRational::new(1.into(), BigInt::from(2u32).pow(k));
        let lo = &len * BigRational::from_integer(j.into());
        let hi = &lo + &len;
        PwExpFun::indicator(
            Domain::UnitInterval,
            Interval::rational(lo, hi).unwrap(),
            b,
        )
        .unwrap()
    }

    fn window_seq(b: &SymbolBasis) -> FunSeq {
        let b = b.clone();
        FunSeq::bare(Domain::UnitInterval, Arc::new(move |n| window(n, &b)))
    }

    #[test]
    fn d_of_equal_sequences_is_tail_only() {
        let b = basis();
        let f = window_seq(&b);
        let d = d_metric(&f, &f, 8, 64, &b).unwrap();
        assert!(d.lo_rational() >= rat(0, 1));
        assert!(d.hi_rational() <= rat(1, 256));
    }

    #[test]
    fn d_of_window_sequence_to_zero_matches_hand_computation() {
        // rho(T_1, 0) = 1/2, rho(T_2, 0) = 1/4:
        // head = (1/2)(1/3) + (1/4)(1/5) = 13/60, tail in [0, 1/4].
        let b = basis();
        let f = window_seq(&b);
        let z = FunSeq::zero(Domain::UnitInterval);
        let d = d_metric(&f, &z, 2, 96, &b).unwrap();
        assert!(d.lo_rational() <= rat(13, 60));
        assert!(d.hi_rational() >= rat(13, 60) + rat(1, 4) - rat(1, 1000000));
        assert!(d.hi_rational() <= rat(13, 60) + rat(1, 4) + rat(1, 1000000));
    }

    #[test]
    fn d_is_symmetric_up_to_enclosure() {
        let b = basis();
        let f = window_seq(&b);
        let z = FunSeq::zero(Domain::UnitInterval);
        let d1 = d_metric(&f, &z, 6, 96, &b).unwrap();
        let d2 = d_metric(&z, &f, 6, 96, &b).unwrap();
        assert!(d1.intersects(&d2));
    }

    #[test]
    fn truncation_zeroes_the_tail_and_is_d_close() {
        let b = basis();
        let f = window_seq(&b);
        let t = truncate(&f, 3);
        assert!(t.generate(3).pieces().len() == 1);
        assert!(t.generate(4).is_zero());
        // D(F, truncate(F, 10)) <= 2^-10 with room to spare when computed
        // with a deeper head.
        let t10 = truncate(&f, 10);
        let d = d_metric(&f, &t10, 20, 64, &b).unwrap();
        assert!(d.hi_rational() < rat(1, 1024));
    }

    #[test]
    fn d_rejects_domain_mismatch() {
        let b = basis();
        let f = window_seq(&b);
        let z = FunSeq::zero(Domain::HalfLine);
        assert!(matches!(d_metric(&f, &z, 4, 64, &b), Err(SeqError::DomainMismatch)));
    }
}
