//! Linear forms over the symbol basis: finite rational combinations of
//! basis symbols. Symbol 0 is the constant 1, so a form with only an
//! index-0 entry is an ordinary rational.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

use super::enclosure::Enclosure;
use super::symbol::SymbolBasis;
use super::ExactError;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct LinearForm {
    coeffs: BTreeMap<usize, BigRational>,
}

impl LinearForm {
    pub fn zero() -> Self {
        LinearForm::default()
    }

    pub fn constant(q: BigRational) -> Self {
        let mut f = LinearForm::zero();
        f.insert(0, q);
        f
    }

    pub fn constant_i64(n: i64) -> Self {
        LinearForm::constant(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn symbol(index: usize) -> Self {
        let mut f = LinearForm::zero();
        f.insert(index, BigRational::one());
        f
    }

    pub fn scaled_symbol(index: usize, q: BigRational) -> Self {
        let mut f = LinearForm::zero();
        f.insert(index, q);
        f
    }

    fn insert(&mut self, index: usize, q: BigRational) {
        if !q.is_zero() {
            self.coeffs.insert(index, q);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, index: usize) -> BigRational {
        self.coeffs.get(&index).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (usize, &BigRational)> {
        self.coeffs.iter().map(|(i, q)| (*i, q))
    }

    pub fn max_symbol(&self) -> Option<usize> {
        self.coeffs.keys().next_back().copied()
    }

    /// Some(q) when the form is the constant q (only an index-0 entry).
    pub fn as_constant(&self) -> Option<BigRational> {
        if self.coeffs.is_empty() {
            return Some(BigRational::zero());
        }
        if self.coeffs.len() == 1 {
            if let Some(q) = self.coeffs.get(&0) {
                return Some(q.clone());
            }
        }
        None
    }

    pub fn add(&self, other: &LinearForm) -> LinearForm {
        let mut out = self.clone();
        for (i, q) in &other.coeffs {
            let sum = out.coeff(*i) + q;
            if sum.is_zero() {
                out.coeffs.remove(i);
            } else {
                out.coeffs.insert(*i, sum);
            }
        }
        out
    }

    pub fn neg(&self) -> LinearForm {
        LinearForm {
            coeffs: self.coeffs.iter().map(|(i, q)| (*i, -q)).collect(),
        }
    }

    pub fn sub(&self, other: &LinearForm) -> LinearForm {
        self.add(&other.neg())
    }

    pub fn scale(&self, q: &BigRational) -> LinearForm {
        if q.is_zero() {
            return LinearForm::zero();
        }
        LinearForm {
            coeffs: self.coeffs.iter().map(|(i, c)| (*i, c * q)).collect(),
        }
    }

    /// Some(lambda) when self = lambda * other with a single rational lambda.
    pub fn proportion_to(&self, other: &LinearForm) -> Option<BigRational> {
        if other.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(BigRational::zero());
        }
        if self.coeffs.len() != other.coeffs.len() {
            return None;
        }
        let (first_i, first_q) = other.coeffs.iter().next().unwrap();
        let mine = self.coeffs.get(first_i)?;
        let lambda = mine / first_q;
        for (i, q) in &other.coeffs {
            if self.coeffs.get(i)? != &(q * &lambda) {
                return None;
            }
        }
        Some(lambda)
    }

    /// Certified enclosure of the form's value under the basis.
    pub fn eval(&self, basis: &SymbolBasis, prec: u32) -> Result<Enclosure, ExactError> {
        let mut acc = Enclosure::zero(prec);
        for (i, q) in &self.coeffs {
            let sym = basis.value(*i, prec)?;
            acc = acc.add(&sym.mul_rational(q));
        }
        Ok(acc)
    }

    /// Sign of the form's value, decided by a precision ladder; `None` when
    /// the budget is exhausted on a straddling enclosure.
    pub fn sign(&self, basis: &SymbolBasis, budget: u32) -> Result<Option<std::cmp::Ordering>, ExactError> {
        if self.is_zero() {
            return Ok(Some(std::cmp::Ordering::Equal));
        }
        if let Some(q) = self.as_constant() {
            return Ok(Some(q.cmp(&BigRational::zero())));
        }
        let mut prec = 64u32;
        loop {
            let enc = self.eval(basis, prec)?;
            if enc.lo().is_positive() {
                return Ok(Some(std::cmp::Ordering::Greater));
            }
            if enc.hi().is_negative() {
                return Ok(Some(std::cmp::Ordering::Less));
            }
            if prec >= budget {
                return Ok(None);
            }
            prec = (prec * 2).min(budget);
        }
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, q) in &self.coeffs {
            if first {
                first = false;
                if q.is_negative() {
                    write!(f, "-")?;
                }
            } else if q.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mag = q.abs();
            if *i == 0 {
                write!(f, "{}", mag)?;
            } else if mag.is_one() {
                write!(f, "s{}", i)?;
            } else {
                write!(f, "{}*s{}", mag, i)?;
            }
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

    #[test]
    fn add_cancels_to_zero() {
        let f = LinearForm::scaled_symbol(1, rat(2, 3));
        let g = f.neg();
        assert!(f.add(&g).is_zero());
    }

    #[test]
    fn as_constant_only_for_index_zero() {
        assert_eq!(LinearForm::constant(rat(5, 2)).as_constant(), Some(rat(5, 2)));
        assert_eq!(LinearForm::zero().as_constant(), Some(rat(0, 1)));
        assert_eq!(LinearForm::symbol(1).as_constant(), None);
    }

    #[test]
    fn proportion_detects_rational_multiples() {
        let r = LinearForm::scaled_symbol(1, rat(-3, 1)).add(&LinearForm::constant(rat(1, 2)));
        let t = r.scale(&rat(5, 7));
        assert_eq!(t.proportion_to(&r), Some(rat(5, 7)));
        let other = LinearForm::symbol(2);
        assert_eq!(other.proportion_to(&r), None);
    }

    #[test]
    fn eval_default_basis_combination() {
        let basis = SymbolBasis::sqrt_primes(3);
        // 1 + sqrt2 - sqrt3 = 0.68216275480421775530...
        let f = LinearForm::constant_i64(1)
            .add(&LinearForm::symbol(1))
            .sub(&LinearForm::symbol(2));
        let enc = f.eval(&basis, 96).unwrap();
        crate::exactreal::testutil::assert_brackets(&enc, 682162754804217755, 1000000000000000000);
    }
}
