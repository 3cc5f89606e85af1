//! The declared Q-linearly-independent symbol basis.
//!
//! Symbol 0 is always the constant 1. The default instantiation appends
//! square roots of distinct primes, a classically Q-linearly-independent
//! family, so structural distinctness arguments about exponent forms have
//! a concrete, certified-evaluable model.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use super::enclosure::{sqrt_integer_enclosure, Enclosure};
use super::ExactError;

type Generator = Box<dyn Fn(u32) -> Enclosure + Send + Sync>;

struct Symbol {
    name: String,
    generator: Generator,
}

struct BasisInner {
    symbols: Vec<Symbol>,
    // Best enclosure seen per (symbol, precision); intersecting with the
    // running best keeps refinements nested.
    cache: Mutex<HashMap<(usize, u32), Enclosure>>,
    best: Mutex<HashMap<usize, Enclosure>>,
}

/// Shared, immutable symbol table. Cloning is cheap.
#[derive(Clone)]
pub struct SymbolBasis {
    inner: Arc<BasisInner>,
}

impl SymbolBasis {
    /// Basis {1, sqrt 2, sqrt 3, sqrt 5, ...} with `count` symbols in total
    /// (including the constant at index 0).
    pub fn sqrt_primes(count: usize) -> Self {
        assert!(count >= 1, "basis needs at least the unity symbol");
        let mut symbols = vec![Symbol {
            name: "1".to_string(),
            generator: Box::new(|prec| Enclosure::one(prec)),
        }];
        let mut primes = PrimeIter::new();
        while symbols.len() < count {
            let p = primes.next().unwrap();
            symbols.push(Symbol {
                name: format!("sqrt{}", p),
                generator: Box::new(move |prec| sqrt_integer_enclosure(p, prec)),
            });
        }
        SymbolBasis::from_symbols(symbols)
    }

    /// Custom basis; the caller asserts Q-linear independence of the values.
    /// Index 0 must still be the constant 1, so it is prepended here.
    pub fn with_generators(named: Vec<(String, Generator)>) -> Self {
        let mut symbols = vec![Symbol {
            name: "1".to_string(),
            generator: Box::new(|prec| Enclosure::one(prec)),
        }];
        for (name, generator) in named {
            symbols.push(Symbol { name, generator });
        }
        SymbolBasis::from_symbols(symbols)
    }

    fn from_symbols(symbols: Vec<Symbol>) -> Self {
        let mut seen = std::collections::BTreeSet::new();
        for s in &symbols {
            assert!(seen.insert(s.name.clone()), "duplicate symbol name {}", s.name);
        }
        SymbolBasis {
            inner: Arc::new(BasisInner {
                symbols,
                cache: Mutex::new(HashMap::new()),
                best: Mutex::new(HashMap::new()),
            }),
        }
    }

    pub fn len(&self) -> usize {
        self.inner.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn name(&self, index: usize) -> Result<&str, ExactError> {
        self.inner
            .symbols
            .get(index)
            .map(|s| s.name.as_str())
            .ok_or(ExactError::UnknownSymbol(index))
    }

    pub fn contains(&self, index: usize) -> bool {
        index < self.inner.symbols.len()
    }

    /// Certified enclosure of the symbol value; enclosures at increasing
    /// precision are nested.
    pub fn value(&self, index: usize, prec: u32) -> Result<Enclosure, ExactError> {
        let symbol = self
            .inner
            .symbols
            .get(index)
            .ok_or(ExactError::UnknownSymbol(index))?;
        {
            let cache = self.inner.cache.lock().unwrap();
            if let Some(hit) = cache.get(&(index, prec)) {
                return Ok(hit.clone());
            }
        }
        let fresh = (symbol.generator)(prec);
        let refined = {
            let mut best = self.inner.best.lock().unwrap();
            let refined = match best.get(&index) {
                Some(prev) => fresh
                    .intersect(prev)
                    .expect("symbol generator produced disjoint enclosures"),
                None => fresh,
            };
            best.insert(index, refined.clone());
            refined
        };
        self.inner
            .cache
            .lock()
            .unwrap()
            .insert((index, prec), refined.clone());
        Ok(refined)
    }
}

impl fmt::Debug for SymbolBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.inner.symbols.iter().map(|s| s.name.as_str()).collect();
        write!(f, "SymbolBasis{:?}", names)
    }
}

struct PrimeIter {
    found: Vec<u64>,
    next: u64,
}

impl PrimeIter {
    fn new() -> Self {
        PrimeIter { found: Vec::new(), next: 2 }
    }
}

impl Iterator for PrimeIter {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        loop {
            let n = self.next;
            self.next += 1;
            if self.found.iter().all(|p| n % p != 0) {
                self.found.push(n);
                return Some(n);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn default_basis_names_and_values() {
        let basis = SymbolBasis::sqrt_primes(4);
        assert_eq!(basis.name(0).unwrap(), "1");
        assert_eq!(basis.name(1).unwrap(), "sqrt2");
        assert_eq!(basis.name(2).unwrap(), "sqrt3");
        assert_eq!(basis.name(3).unwrap(), "sqrt5");
        assert!(basis.name(4).is_err());

        let one = basis.value(0, 64).unwrap();
        assert!(one.is_exact());
        assert!(one.contains_rational(&rat(1, 1)));

        // sqrt2 = 1.41421356237309504880...
        let s2 = basis.value(1, 128).unwrap();
        assert!(s2.contains_rational(&rat(1414213562373095048, 1000000000000000000)) || s2.lo_rational() > rat(1414213562373095048, 1000000000000000000));
    }

    #[test]
    fn refinement_is_nested() {
        let basis = SymbolBasis::sqrt_primes(2);
        let coarse = basis.value(1, 64).unwrap();
        let fine = basis.value(1, 256).unwrap();
        assert!(coarse.contains(&fine));
        assert!(fine.width() <= coarse.width());
    }
}
