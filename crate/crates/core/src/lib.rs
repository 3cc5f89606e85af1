//! Exact and certified verification kernel for sequences of measurable
//! functions and their modes of convergence.
//!
//! The crate is organized around five layers:
//!
//! - [`exactreal`]: symbolic scalars (monomial sums over a Q-independent
//!   symbol basis) with structural zero tests and dyadic enclosures;
//! - [`pwfun`]: piecewise-exponential functions on `[0,1]` or `[0,+inf)`
//!   with exact measure, norm, essential-sup and metric machinery;
//! - [`seqmodes`]: function sequences, the product metric, and checkers
//!   for the five convergence modes;
//! - [`witnesses`]: the named counterexample families, packaged with
//!   audited closed-form metadata;
//! - [`freealg`]: polynomial images of generator families, the indicator
//!   collapse, and finite-section linear independence.

pub mod exactreal;
pub mod freealg;
pub mod pwfun;
pub mod seqmodes;
pub mod witnesses;

pub use exactreal::{
    Base, Comparison, Dyadic, Enclosure, ExactError, LinearForm, Monomial, MonomialSum,
    SymbolBasis, ZeroCertificate,
};
