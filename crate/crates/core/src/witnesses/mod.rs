//! Exact constructors for the named witness families, each packaged as a
//! function sequence with audited closed-form metadata.
//!
//! Families on [0,1]: the typewriter windows, their split subsequences,
//! the shrinking intervals S_n, their split subsequences, and the
//! exponentially damped variants used by the algebra constructions.
//! Families on [0,+inf): flat bumps R_n, the norm-divergent l1 family,
//! and the traveling unit-mass bumps over the block partition.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use thiserror::Error;

use crate::exactreal::{LinearForm, Monomial, MonomialSum, SymbolBasis};
use crate::pwfun::{Domain, ExpPiece, ExpTerm, Interval, PwError, PwExpFun};
use crate::seqmodes::{
    AuTemplate, FunSeq, NormMeta, PointwiseMeta, SeqError, SeqMeta, StructuredSetSeq,
    TailDescriptor, Trend, AUDIT_HORIZON,
};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum WitnessError {
    #[error("invalid family parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown family: {0}")]
    UnknownFamily(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error(transparent)]
    Seq(#[from] SeqError),
}

impl From<PwError> for WitnessError {
    fn from(e: PwError) -> Self {
        WitnessError::Seq(SeqError::Pw(e))
    }
}

fn rat_u64(n: u64, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn pow2_recip(k: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << k as usize)
}

// ---------------------------------------------------------------------------
// Index arithmetic
// ---------------------------------------------------------------------------

/// n = 2^k + j with 0 <= j < 2^k.
pub fn dyadic_decompose(n: u64) -> (u32, u64) {
    assert!(n >= 1, "dyadic decomposition needs n >= 1");
    let k = 63 - n.leading_zeros();
    (k, n - (1u64 << k))
}

/// The interleaving i(k, n) = 2^(k-1) (2n - 1): strictly increasing in each
/// argument, with pairwise-disjoint ranges covering the positive integers.
pub fn interleave_index(k: u32, n: u32) -> u128 {
    assert!(k >= 1 && n >= 1, "interleave indices start at 1");
    (1u128 << (k - 1)) * (2 * n as u128 - 1)
}

/// Inverse of the interleaving: which (k, n) owns g >= 1.
pub fn interleave_owner(g: u128) -> (u32, u32) {
    assert!(g >= 1, "generations start at 1");
    let v = g.trailing_zeros();
    let odd = g >> v;
    (v + 1, ((odd + 1) / 2) as u32)
}

// ---------------------------------------------------------------------------
// Individual functions
// ---------------------------------------------------------------------------

/// Support window of T_n: [j 2^-k, (j+1) 2^-k] for n = 2^k + j.
pub fn typewriter_window(n: u64) -> Interval {
    let (k, j) = dyadic_decompose(n);
    let len = pow2_recip(k);
    let lo = &len * BigRational::from_integer(BigInt::from(j));
    let hi = &lo + &len;
    Interval::rational(lo, hi).expect("dyadic window is ordered")
}

/// T_n, the typewriter indicator.
pub fn typewriter(n: u64, basis: &SymbolBasis) -> Result<PwExpFun, WitnessError> {
    Ok(PwExpFun::indicator(Domain::UnitInterval, typewriter_window(n), basis)?)
}

/// Is generation g live for the k-th split subsequence?
pub fn split_live(k: u32, generation: u64) -> bool {
    generation >= 1 && interleave_owner(generation as u128).0 == k
}

/// T(k, n): the typewriter term when its generation belongs to the k-th
/// interleaving class, 0 otherwise.
pub fn typewriter_split(k: u32, n: u64, basis: &SymbolBasis) -> Result<PwExpFun, WitnessError> {
    let (g, _) = dyadic_decompose(n);
    if split_live(k, g as u64) {
        typewriter(n, basis)
    } else {
        Ok(PwExpFun::zero(Domain::UnitInterval))
    }
}

/// E_n = [1/(n+1), 1/n].
pub fn shrink_support(n: u128) -> Interval {
    assert!(n >= 1);
    let lo = BigRational::new(BigInt::one(), BigInt::from(n + 1));
    let hi = BigRational::new(BigInt::one(), BigInt::from(n));
    Interval::rational(lo, hi).expect("shrink interval is ordered")
}

/// S_n = chi_{E_n}.
pub fn shrink_interval(n: u64, basis: &SymbolBasis) -> Result<PwExpFun, WitnessError> {
    Ok(PwExpFun::indicator(Domain::UnitInterval, shrink_support(n as u128), basis)?)
}

/// S(k, n) = chi_{E_{i(k,n)}}.
pub fn shrink_split(k: u32, n: u32, basis: &SymbolBasis) -> Result<PwExpFun, WitnessError> {
    let idx = interleave_index(k, n);
    Ok(PwExpFun::indicator(Domain::UnitInterval, shrink_support(idx), basis)?)
}

/// F(c, n) = e^{-c x} T_n(x) on the typewriter window.
pub fn measure_gen(c: usize, n: u64, basis: &SymbolBasis) -> Result<PwExpFun, WitnessError> {
    validate_symbol(c, basis)?;
    Ok(PwExpFun::single_piece(
        Domain::UnitInterval,
        typewriter_window(n),
        vec![ExpTerm { coef: MonomialSum::one(), rate: LinearForm::symbol(c).neg() }],
        basis,
    )?)
}

/// F(c, n) = e^{-c n [(n+1) x - 1]} S_n(x): coefficient e^{c n}, rate
/// -c n (n+1), supported on E_n.
pub fn nup_gen(c: usize, n: u64, basis: &SymbolBasis) -> Result<PwExpFun, WitnessError> {
    validate_symbol(c, basis)?;
    let n_big = BigRational::from_integer(BigInt::from(n));
    let n_np1 = BigRational::from_integer(BigInt::from(n) * BigInt::from(n + 1));
    let coef = MonomialSum::from_monomial(Monomial::exp_form(LinearForm::scaled_symbol(c, n_big)));
    let rate = LinearForm::scaled_symbol(c, -n_np1);
    Ok(PwExpFun::single_piece(
        Domain::UnitInterval,
        shrink_support(n as u128),
        vec![ExpTerm { coef, rate }],
        basis,
    )?)
}

/// F(c, n) = n^{-c} chi_{[0, e^n]} on the half line.
pub fn l1_gen(c: usize, n: u64, basis: &SymbolBasis) -> Result<PwExpFun, WitnessError> {
    validate_symbol(c, basis)?;
    let coef = MonomialSum::from_monomial(Monomial::rational_power(
        BigRational::from_integer(BigInt::from(n)),
        LinearForm::symbol(c).neg(),
    ));
    let hi = MonomialSum::exp_form(LinearForm::constant(BigRational::from_integer(BigInt::from(n))));
    let interval = Interval::new(MonomialSum::zero(), hi, basis)?;
    Ok(PwExpFun::scaled_indicator(Domain::HalfLine, interval, coef, basis)?)
}

/// R_n = (1/n) chi_{[0, n]}.
pub fn flat_bump(n: u64, basis: &SymbolBasis) -> Result<PwExpFun, WitnessError> {
    Ok(PwExpFun::scaled_indicator(
        Domain::HalfLine,
        Interval::rational(BigRational::zero(), BigRational::from_integer(BigInt::from(n)))?,
        MonomialSum::from_rational(rat_u64(1, n)),
        basis,
    )?)
}

/// Base offset of the N-th block: sum_{j<N} j(N-j) = (N^3 - N)/6.
pub fn block_base(n: u64) -> BigInt {
    let n = BigInt::from(n);
    (&n * &n * &n - &n) / BigInt::from(6)
}

/// I_{N,M} = [base(N) + M(M-1)/2, base(N) + M(M+1)/2], length M.
pub fn block_interval(n: u64, m: u64) -> Result<Interval, WitnessError> {
    if m < 1 || m > n {
        return Err(WitnessError::IndexOutOfRange(format!(
            "block I_{{N,M}} needs 1 <= M <= N, got N={}, M={}",
            n, m
        )));
    }
    let base = block_base(n);
    let m_big = BigInt::from(m);
    let lo = &base + (&m_big * (&m_big - 1)) / BigInt::from(2);
    let hi = &base + (&m_big * (&m_big + 1)) / BigInt::from(2);
    Ok(Interval::rational(
        BigRational::from_integer(lo),
        BigRational::from_integer(hi),
    )?)
}

/// G(k, n) = (1/n) chi_{I_{k+n-1, n}}.
pub fn traveling_bump(k: u32, n: u64, basis: &SymbolBasis) -> Result<PwExpFun, WitnessError> {
    assert!(k >= 1 && n >= 1);
    let interval = block_interval(k as u64 + n - 1, n)?;
    Ok(PwExpFun::scaled_indicator(
        Domain::HalfLine,
        interval,
        MonomialSum::from_rational(rat_u64(1, n)),
        basis,
    )?)
}

fn validate_symbol(c: usize, basis: &SymbolBasis) -> Result<(), WitnessError> {
    if c == 0 {
        return Err(WitnessError::InvalidParameter(
            "c must reference an irrational basis symbol (index >= 1)".into(),
        ));
    }
    if !basis.contains(c) {
        return Err(WitnessError::InvalidParameter(format!(
            "symbol index {} outside the basis (size {})",
            c,
            basis.len()
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Families as FunSeq with audited metadata
// ---------------------------------------------------------------------------

fn generation_measure_formula() -> crate::seqmodes::FormulaFn {
    Arc::new(|n: u32| {
        let (k, _) = dyadic_decompose(n as u64);
        MonomialSum::from_rational(pow2_recip(k))
    })
}

/// The typewriter sequence with its certificates.
pub fn typewriter_seq(basis: &SymbolBasis) -> Result<FunSeq, WitnessError> {
    let b = basis.clone();
    let gen: crate::seqmodes::GenFn =
        Arc::new(move |n| typewriter(n as u64, &b).expect("typewriter construction"));
    let b2 = basis.clone();
    let supports = StructuredSetSeq::new(
        Domain::UnitInterval,
        Arc::new(move |n| vec![typewriter_window(n as u64)]),
        TailDescriptor::SweepsAll,
        &b2,
        AUDIT_HORIZON,
    )?;
    let meta = SeqMeta {
        support_measure: Some(NormMeta::new(
            generation_measure_formula(),
            Trend::ToZero,
            "2^-floor(log2 n)",
        )),
        sup_norm: Some(NormMeta::trend_only(
            Trend::Constant(MonomialSum::one()),
            "1 (indicator of a nonempty window)",
        )),
        pointwise: Some(PointwiseMeta::Sweeping {
            profile: Arc::new(|_x| MonomialSum::one()),
            description: "dyadic windows sweep [0,1] once per generation".to_string(),
        }),
        supports: Some(supports),
        almost_uniform: Some(AuTemplate::SweepingObstruction),
        ..SeqMeta::default()
    };
    Ok(FunSeq::with_meta(Domain::UnitInterval, gen, meta, basis, AUDIT_HORIZON)?)
}

/// The k-th typewriter split subsequence.
pub fn typewriter_split_seq(k: u32, basis: &SymbolBasis) -> Result<FunSeq, WitnessError> {
    if k < 1 {
        return Err(WitnessError::InvalidParameter("split index k >= 1".into()));
    }
    let b = basis.clone();
    let gen: crate::seqmodes::GenFn =
        Arc::new(move |n| typewriter_split(k, n as u64, &b).expect("split construction"));
    let meta = SeqMeta {
        support_measure: Some(NormMeta::new(
            Arc::new(move |n: u32| {
                let (g, _) = dyadic_decompose(n as u64);
                if split_live(k, g as u64) {
                    MonomialSum::from_rational(pow2_recip(g))
                } else {
                    MonomialSum::zero()
                }
            }),
            Trend::ToZero,
            "2^-floor(log2 n) on live generations, else 0",
        )),
        pointwise: Some(PointwiseMeta::Sweeping {
            profile: Arc::new(|_x| MonomialSum::one()),
            description: "windows of the live generations sweep [0,1] infinitely often".to_string(),
        }),
        ..SeqMeta::default()
    };
    Ok(FunSeq::with_meta(Domain::UnitInterval, gen, meta, basis, AUDIT_HORIZON)?)
}

/// The shrinking-interval sequence S_n.
pub fn shrink_seq(basis: &SymbolBasis) -> Result<FunSeq, WitnessError> {
    let b = basis.clone();
    let gen: crate::seqmodes::GenFn =
        Arc::new(move |n| shrink_interval(n as u64, &b).expect("shrink construction"));
    let supports = StructuredSetSeq::new(
        Domain::UnitInterval,
        Arc::new(move |n| vec![shrink_support(n as u128)]),
        TailDescriptor::ShrinksToNull,
        basis,
        AUDIT_HORIZON,
    )?;
    let meta = SeqMeta {
        support_measure: Some(NormMeta::new(
            Arc::new(|n: u32| {
                MonomialSum::from_rational(BigRational::new(
                    BigInt::one(),
                    BigInt::from(n) * BigInt::from(n + 1),
                ))
            }),
            Trend::ToZero,
            "1/(n(n+1))",
        )),
        sup_norm: Some(NormMeta::trend_only(
            Trend::Constant(MonomialSum::one()),
            "1 (indicator of a nonempty interval)",
        )),
        pointwise: Some(PointwiseMeta::EventuallyZero {
            description: "supports [1/(n+1), 1/n] eventually avoid every point".to_string(),
        }),
        supports: Some(supports),
        almost_uniform: Some(AuTemplate::LeftShrink),
        ..SeqMeta::default()
    };
    Ok(FunSeq::with_meta(Domain::UnitInterval, gen, meta, basis, AUDIT_HORIZON)?)
}

/// The k-th shrink split subsequence S(k).
pub fn shrink_split_seq(k: u32, basis: &SymbolBasis) -> Result<FunSeq, WitnessError> {
    if k < 1 {
        return Err(WitnessError::InvalidParameter("split index k >= 1".into()));
    }
    let b = basis.clone();
    let gen: crate::seqmodes::GenFn =
        Arc::new(move |n| shrink_split(k, n, &b).expect("shrink split construction"));
    let supports = StructuredSetSeq::new(
        Domain::UnitInterval,
        Arc::new(move |n| vec![shrink_support(interleave_index(k, n))]),
        TailDescriptor::ShrinksToNull,
        basis,
        AUDIT_HORIZON,
    )?;
    let meta = SeqMeta {
        support_measure: Some(NormMeta::new(
            Arc::new(move |n: u32| {
                let i = interleave_index(k, n);
                MonomialSum::from_rational(BigRational::new(
                    BigInt::one(),
                    BigInt::from(i) * BigInt::from(i + 1),
                ))
            }),
            Trend::ToZero,
            "1/(i(k,n) (i(k,n)+1))",
        )),
        sup_norm: Some(NormMeta::trend_only(
            Trend::Constant(MonomialSum::one()),
            "1 (indicator of a nonempty interval)",
        )),
        pointwise: Some(PointwiseMeta::EventuallyZero {
            description: "supports E_{i(k,n)} shrink toward 0".to_string(),
        }),
        supports: Some(supports),
        almost_uniform: Some(AuTemplate::LeftShrink),
        ..SeqMeta::default()
    };
    Ok(FunSeq::with_meta(Domain::UnitInterval, gen, meta, basis, AUDIT_HORIZON)?)
}

/// The damped typewriter generator F(c) of the measure-vs-a.e. algebra.
pub fn measure_gen_seq(c: usize, basis: &SymbolBasis) -> Result<FunSeq, WitnessError> {
    validate_symbol(c, basis)?;
    let b = basis.clone();
    let gen: crate::seqmodes::GenFn =
        Arc::new(move |n| measure_gen(c, n as u64, &b).expect("measure generator"));
    let supports = StructuredSetSeq::new(
        Domain::UnitInterval,
        Arc::new(move |n| vec![typewriter_window(n as u64)]),
        TailDescriptor::SweepsAll,
        basis,
        AUDIT_HORIZON,
    )?;
    let meta = SeqMeta {
        support_measure: Some(NormMeta::new(
            generation_measure_formula(),
            Trend::ToZero,
            "2^-floor(log2 n)",
        )),
        pointwise: Some(PointwiseMeta::Sweeping {
            profile: Arc::new(move |x: &BigRational| {
                MonomialSum::from_monomial(Monomial::exp_form(LinearForm::scaled_symbol(c, -x)))
            }),
            description: "value e^{-c x} on windows sweeping [0,1]".to_string(),
        }),
        supports: Some(supports),
        almost_uniform: Some(AuTemplate::SweepingObstruction),
        ..SeqMeta::default()
    };
    Ok(FunSeq::with_meta(Domain::UnitInterval, gen, meta, basis, AUDIT_HORIZON)?)
}

/// The NUP generator F(c): e^{-c n[(n+1)x - 1]} on E_n; its sup is 1 for
/// every n.
pub fn nup_gen_seq(c: usize, basis: &SymbolBasis) -> Result<FunSeq, WitnessError> {
    validate_symbol(c, basis)?;
    let b = basis.clone();
    let gen: crate::seqmodes::GenFn =
        Arc::new(move |n| nup_gen(c, n as u64, &b).expect("nup generator"));
    let supports = StructuredSetSeq::new(
        Domain::UnitInterval,
        Arc::new(move |n| vec![shrink_support(n as u128)]),
        TailDescriptor::ShrinksToNull,
        basis,
        AUDIT_HORIZON,
    )?;
    let meta = SeqMeta {
        support_measure: Some(NormMeta::new(
            Arc::new(|n: u32| {
                MonomialSum::from_rational(BigRational::new(
                    BigInt::one(),
                    BigInt::from(n) * BigInt::from(n + 1),
                ))
            }),
            Trend::ToZero,
            "1/(n(n+1))",
        )),
        sup_norm: Some(NormMeta::trend_only(
            Trend::Constant(MonomialSum::one()),
            "sup over w in [0,1] of e^{-c w} = 1, independent of n",
        )),
        pointwise: Some(PointwiseMeta::EventuallyZero {
            description: "supports [1/(n+1), 1/n] eventually avoid every point".to_string(),
        }),
        supports: Some(supports),
        almost_uniform: Some(AuTemplate::LeftShrink),
        ..SeqMeta::default()
    };
    Ok(FunSeq::with_meta(Domain::UnitInterval, gen, meta, basis, AUDIT_HORIZON)?)
}

/// The norm-divergent half-line generator F(c) = n^{-c} chi_{[0, e^n]}.
pub fn l1_gen_seq(c: usize, basis: &SymbolBasis) -> Result<FunSeq, WitnessError> {
    validate_symbol(c, basis)?;
    let b = basis.clone();
    let gen: crate::seqmodes::GenFn =
        Arc::new(move |n| l1_gen(c, n as u64, &b).expect("l1 generator"));
    let sup_formula: crate::seqmodes::FormulaFn = Arc::new(move |n: u32| {
        MonomialSum::from_monomial(Monomial::rational_power(
            BigRational::from_integer(BigInt::from(n)),
            LinearForm::symbol(c).neg(),
        ))
    });
    let l1_formula: crate::seqmodes::FormulaFn = Arc::new(move |n: u32| {
        MonomialSum::from_monomial(
            Monomial::rational_power(
                BigRational::from_integer(BigInt::from(n)),
                LinearForm::symbol(c).neg(),
            )
            .mul(&Monomial::exp_form(LinearForm::constant(BigRational::from_integer(
                BigInt::from(n),
            )))),
        )
    });
    let meta = SeqMeta {
        support_measure: Some(NormMeta::new(
            Arc::new(|n: u32| {
                MonomialSum::exp_form(LinearForm::constant(BigRational::from_integer(
                    BigInt::from(n),
                )))
            }),
            Trend::ToInfinity,
            "e^n",
        )),
        sup_norm: Some(NormMeta::new(sup_formula, Trend::ToZero, "n^-c")),
        l1_norm: Some(NormMeta::new(l1_formula, Trend::ToInfinity, "e^n / n^c")),
        ..SeqMeta::default()
    };
    Ok(FunSeq::with_meta(Domain::HalfLine, gen, meta, basis, AUDIT_HORIZON)?)
}

/// R_n = (1/n) chi_{[0,n]}: uniformly null, unit L1 mass forever.
pub fn flat_bump_seq(basis: &SymbolBasis) -> Result<FunSeq, WitnessError> {
    let b = basis.clone();
    let gen: crate::seqmodes::GenFn =
        Arc::new(move |n| flat_bump(n as u64, &b).expect("flat bump"));
    let meta = SeqMeta {
        support_measure: Some(NormMeta::new(
            Arc::new(|n: u32| MonomialSum::from_integer(n as i64)),
            Trend::ToInfinity,
            "n",
        )),
        sup_norm: Some(NormMeta::new(
            Arc::new(|n: u32| MonomialSum::from_rational(rat_u64(1, n as u64))),
            Trend::ToZero,
            "1/n",
        )),
        l1_norm: Some(NormMeta {
            formula: Some(Arc::new(|_n: u32| MonomialSum::one())),
            trend: Trend::Constant(MonomialSum::one()),
            description: "1 = (1/n) * n".to_string(),
        }),
        ..SeqMeta::default()
    };
    Ok(FunSeq::with_meta(Domain::HalfLine, gen, meta, basis, AUDIT_HORIZON)?)
}

/// G(k) = ((1/n) chi_{I_{k+n-1,n}})_n: traveling unit-mass bumps.
pub fn traveling_bump_seq(k: u32, basis: &SymbolBasis) -> Result<FunSeq, WitnessError> {
    if k < 1 {
        return Err(WitnessError::InvalidParameter("bump index k >= 1".into()));
    }
    let b = basis.clone();
    let gen: crate::seqmodes::GenFn =
        Arc::new(move |n| traveling_bump(k, n as u64, &b).expect("traveling bump"));
    let meta = SeqMeta {
        support_measure: Some(NormMeta::new(
            Arc::new(|n: u32| MonomialSum::from_integer(n as i64)),
            Trend::ToInfinity,
            "n (the block I_{k+n-1,n} has length n)",
        )),
        sup_norm: Some(NormMeta::new(
            Arc::new(|n: u32| MonomialSum::from_rational(rat_u64(1, n as u64))),
            Trend::ToZero,
            "1/n",
        )),
        l1_norm: Some(NormMeta {
            formula: Some(Arc::new(|_n: u32| MonomialSum::one())),
            trend: Trend::Constant(MonomialSum::one()),
            description: "1 = (1/n) * |I_{k+n-1,n}|".to_string(),
        }),
        ..SeqMeta::default()
    };
    Ok(FunSeq::with_meta(Domain::HalfLine, gen, meta, basis, AUDIT_HORIZON)?)
}

// ---------------------------------------------------------------------------
// Family specifications and the registry
// ---------------------------------------------------------------------------

/// Parameterized identifier of a witness family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilySpec {
    Typewriter,
    TypewriterSplit { k: u32 },
    Shrink,
    ShrinkSplit { k: u32 },
    MeasureGen { c: usize },
    NupGen { c: usize },
    L1Gen { c: usize },
    FlatBump,
    TravelingBump { k: u32 },
}

impl FamilySpec {
    /// All families at representative parameters, for catalog-wide suites.
    pub fn catalog() -> Vec<FamilySpec> {
        vec![
            FamilySpec::Typewriter,
            FamilySpec::TypewriterSplit { k: 1 },
            FamilySpec::TypewriterSplit { k: 2 },
            FamilySpec::Shrink,
            FamilySpec::ShrinkSplit { k: 1 },
            FamilySpec::ShrinkSplit { k: 3 },
            FamilySpec::MeasureGen { c: 1 },
            FamilySpec::NupGen { c: 1 },
            FamilySpec::L1Gen { c: 1 },
            FamilySpec::FlatBump,
            FamilySpec::TravelingBump { k: 1 },
            FamilySpec::TravelingBump { k: 3 },
        ]
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Typewriter => write!(f, "typewriter"),
            FamilySpec::TypewriterSplit { k } => write!(f, "typewriter-split:k={}", k),
            FamilySpec::Shrink => write!(f, "shrink"),
            FamilySpec::ShrinkSplit { k } => write!(f, "shrink-split:k={}", k),
            FamilySpec::MeasureGen { c } => write!(f, "measure-gen:c={}", c),
            FamilySpec::NupGen { c } => write!(f, "nup-gen:c={}", c),
            FamilySpec::L1Gen { c } => write!(f, "l1-gen:c={}", c),
            FamilySpec::FlatBump => write!(f, "flat-bump"),
            FamilySpec::TravelingBump { k } => write!(f, "traveling-bump:k={}", k),
        }
    }
}

impl FromStr for FamilySpec {
    type Err = WitnessError;

    fn from_str(s: &str) -> Result<Self, WitnessError> {
        let (name, params) = match s.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (s, None),
        };
        let param = |key: &str| -> Result<u64, WitnessError> {
            let p = params.ok_or_else(|| {
                WitnessError::InvalidParameter(format!("family {} needs {}=<value>", name, key))
            })?;
            for part in p.split(',') {
                if let Some((k, v)) = part.split_once('=') {
                    if k == key {
                        return v.parse::<u64>().map_err(|_| {
                            WitnessError::InvalidParameter(format!("bad value for {}: {}", key, v))
                        });
                    }
                }
            }
            Err(WitnessError::InvalidParameter(format!(
                "family {} needs {}=<value>",
                name, key
            )))
        };
        match name {
            "typewriter" => Ok(FamilySpec::Typewriter),
            "typewriter-split" => Ok(FamilySpec::TypewriterSplit { k: param("k")? as u32 }),
            "shrink" => Ok(FamilySpec::Shrink),
            "shrink-split" => Ok(FamilySpec::ShrinkSplit { k: param("k")? as u32 }),
            "measure-gen" => Ok(FamilySpec::MeasureGen { c: param("c")? as usize }),
            "nup-gen" => Ok(FamilySpec::NupGen { c: param("c")? as usize }),
            "l1-gen" => Ok(FamilySpec::L1Gen { c: param("c")? as usize }),
            "flat-bump" => Ok(FamilySpec::FlatBump),
            "traveling-bump" => Ok(FamilySpec::TravelingBump { k: param("k")? as u32 }),
            other => Err(WitnessError::UnknownFamily(other.to_string())),
        }
    }
}

/// Builds any family from its spec against a fixed basis.
pub struct Registry {
    basis: SymbolBasis,
}

impl Registry {
    pub fn new(basis: SymbolBasis) -> Self {
        Registry { basis }
    }

    pub fn basis(&self) -> &SymbolBasis {
        &self.basis
    }

    pub fn build(&self, spec: &FamilySpec) -> Result<FunSeq, WitnessError> {
        match spec {
            FamilySpec::Typewriter => typewriter_seq(&self.basis),
            FamilySpec::TypewriterSplit { k } => typewriter_split_seq(*k, &self.basis),
            FamilySpec::Shrink => shrink_seq(&self.basis),
            FamilySpec::ShrinkSplit { k } => shrink_split_seq(*k, &self.basis),
            FamilySpec::MeasureGen { c } => measure_gen_seq(*c, &self.basis),
            FamilySpec::NupGen { c } => nup_gen_seq(*c, &self.basis),
            FamilySpec::L1Gen { c } => l1_gen_seq(*c, &self.basis),
            FamilySpec::FlatBump => flat_bump_seq(&self.basis),
            FamilySpec::TravelingBump { k } => traveling_bump_seq(*k, &self.basis),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis() -> SymbolBasis {
        SymbolBasis::sqrt_primes(4)
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn dyadic_decomposition_reconstructs() {
        assert_eq!(dyadic_decompose(1), (0, 0));
        assert_eq!(dyadic_decompose(3), (1, 1));
        assert_eq!(dyadic_decompose(6), (2, 2));
        for n in 1u64..=1 << 16 {
            let (k, j) = dyadic_decompose(n);
            assert!(j < (1 << k));
            assert_eq!((1u64 << k) + j, n);
        }
    }

    #[test]
    fn typewriter_windows_match_reference() {
        let b = basis();
        // n=1 -> [0,1]; n=3 -> [1/2,1]; n=6 -> [1/2,3/4].
        let t1 = typewriter(1, &b).unwrap();
        assert_eq!(
            t1.pieces()[0].interval.rational_endpoints().unwrap(),
            (rat(0, 1), rat(1, 1))
        );
        let t3 = typewriter(3, &b).unwrap();
        assert_eq!(
            t3.pieces()[0].interval.rational_endpoints().unwrap(),
            (rat(1, 2), rat(1, 1))
        );
        let t6 = typewriter(6, &b).unwrap();
        assert_eq!(
            t6.pieces()[0].interval.rational_endpoints().unwrap(),
            (rat(1, 2), rat(3, 4))
        );
    }

    #[test]
    fn typewriter_generation_covers_unit_interval() {
        let b = basis();
        for k in 0..=6u32 {
            let mut total = BigRational::zero();
            let mut prev_hi = BigRational::zero();
            for j in 0..(1u64 << k) {
                let n = (1u64 << k) + j;
                let f = typewriter(n, &b).unwrap();
                let (lo, hi) = f.pieces()[0].interval.rational_endpoints().unwrap();
                assert_eq!(lo, prev_hi, "windows tile in order");
                total += hi.clone() - lo;
                prev_hi = hi;
            }
            assert_eq!(prev_hi, rat(1, 1));
            assert_eq!(total, rat(1, 1));
        }
    }

    #[test]
    fn interleave_matches_reference_values() {
        assert_eq!(interleave_index(1, 1), 1);
        assert_eq!(interleave_index(1, 2), 3);
        assert_eq!(interleave_index(2, 1), 2);
        assert_eq!(interleave_index(3, 2), 12);
    }

    #[test]
    fn interleave_is_a_bijection_with_monotone_rows() {
        let mut seen = std::collections::BTreeMap::new();
        for k in 1..=64u32 {
            for n in 1..=64u32 {
                let i = interleave_index(k, n);
                assert!(seen.insert(i, (k, n)).is_none(), "collision at {}", i);
                assert_eq!(interleave_owner(i), (k, n));
            }
        }
        // Every integer 1..=64 is hit by exactly one pair in range.
        for g in 1..=64u128 {
            assert!(seen.contains_key(&g), "{} not covered", g);
        }
        // Strict monotonicity in each argument.
        for k in 1..=16u32 {
            for n in 1..=16u32 {
                assert!(interleave_index(k, n + 1) > interleave_index(k, n));
                assert!(interleave_index(k + 1, n) > interleave_index(k, n));
            }
        }
    }

    #[test]
    fn typewriter_split_keeps_live_generations_only() {
        let b = basis();
        // k=1 owns generations 1, 3, 5, ...
        let t = typewriter_split(1, 2, &b).unwrap();
        assert_eq!(
            t.pieces()[0].interval.rational_endpoints().unwrap(),
            (rat(0, 1), rat(1, 2))
        );
        assert!(typewriter_split(1, 4, &b).unwrap().is_zero());
        let t = typewriter_split(2, 4, &b).unwrap();
        assert_eq!(
            t.pieces()[0].interval.rational_endpoints().unwrap(),
            (rat(0, 1), rat(1, 4))
        );
        // At most one k owns each generation.
        for n in 1u64..=256 {
            let mut live = 0;
            for k in 1..=9u32 {
                let f = typewriter_split(k, n, &b).unwrap();
                if !f.is_zero() {
                    live += 1;
                    assert_eq!(f, typewriter(n, &b).unwrap());
                }
            }
            assert!(live <= 1, "n = {} has {} live splits", n, live);
            let expect_live = n >= 2;
            assert_eq!(live == 1, expect_live, "n = {}", n);
        }
    }

    #[test]
    fn shrink_intervals_match_reference() {
        let b = basis();
        let s1 = shrink_interval(1, &b).unwrap();
        assert_eq!(
            s1.pieces()[0].interval.rational_endpoints().unwrap(),
            (rat(1, 2), rat(1, 1))
        );
        let s3 = shrink_interval(3, &b).unwrap();
        assert_eq!(
            s3.pieces()[0].interval.rational_endpoints().unwrap(),
            (rat(1, 4), rat(1, 3))
        );
        let s4 = shrink_interval(4, &b).unwrap();
        assert_eq!(
            s4.support_measure_exact().unwrap().as_rational().unwrap(),
            rat(1, 20)
        );
    }

    #[test]
    fn shrink_split_uses_interleaved_indices() {
        let b = basis();
        let f = shrink_split(1, 1, &b).unwrap();
        assert_eq!(
            f.pieces()[0].interval.rational_endpoints().unwrap(),
            (rat(1, 2), rat(1, 1))
        );
        let f = shrink_split(2, 1, &b).unwrap();
        assert_eq!(
            f.pieces()[0].interval.rational_endpoints().unwrap(),
            (rat(1, 3), rat(1, 2))
        );
        let f = shrink_split(1, 2, &b).unwrap();
        assert_eq!(
            f.pieces()[0].interval.rational_endpoints().unwrap(),
            (rat(1, 4), rat(1, 3))
        );
    }

    #[test]
    fn nup_generator_hits_one_at_left_endpoint() {
        let b = basis();
        for n in [1u64, 2, 5] {
            let f = nup_gen(1, n, &b).unwrap();
            let left = rat(1, (n + 1) as i64);
            let v = f.evaluate_exact(&left, &b).unwrap();
            assert_eq!(v, MonomialSum::one(), "w = 0 must give exactly 1");
            // At the right endpoint the value is e^{-c}.
            let right = rat(1, n as i64);
            let v = f.evaluate_exact(&right, &b).unwrap();
            let expected = MonomialSum::exp_form(LinearForm::symbol(1).neg());
            assert!(v.sub(&expected).is_zero(), "w = 1 must give e^-c");
        }
    }

    #[test]
    fn l1_generator_norm_formula() {
        let b = basis();
        let f = l1_gen(1, 1, &b).unwrap();
        // n = 1: sup = 1^{-c} = 1.
        let sup = crate::pwfun::ess_sup_exact(&f, &crate::pwfun::full_region(Domain::HalfLine), &b)
            .unwrap()
            .unwrap();
        assert_eq!(sup, MonomialSum::one());
        // log-enclosure of ||F(c,10)||_1 = e^10/10^{sqrt2}:
        // 10 - sqrt2 ln 10 = 6.74365293296970631077...
        let f10 = l1_gen(1, 10, &b).unwrap();
        let norm = crate::pwfun::l1_norm_exact(&f10, &b).unwrap().unwrap();
        let m = norm.as_single_monomial().unwrap();
        let enc = m.log_abs(&b, 128).unwrap();
        crate::exactreal::testutil::assert_brackets(&enc, 674365293296970631, 100000000000000000);
    }

    #[test]
    fn flat_bump_mass_and_sup() {
        let b = basis();
        let r7 = flat_bump(7, &b).unwrap();
        let sup = crate::pwfun::ess_sup_exact(&r7, &crate::pwfun::full_region(Domain::HalfLine), &b)
            .unwrap()
            .unwrap();
        assert_eq!(sup.as_rational().unwrap(), rat(1, 7));
        for n in 1..=100u64 {
            let f = flat_bump(n, &b).unwrap();
            let norm = crate::pwfun::l1_norm_exact(&f, &b).unwrap().unwrap();
            assert_eq!(norm.as_rational().unwrap(), rat(1, 1));
        }
    }

    #[test]
    fn block_intervals_match_reference() {
        let b = basis();
        let i11 = block_interval(1, 1).unwrap();
        assert_eq!(i11.rational_endpoints().unwrap(), (rat(0, 1), rat(1, 1)));
        let i22 = block_interval(2, 2).unwrap();
        assert_eq!(i22.rational_endpoints().unwrap(), (rat(2, 1), rat(4, 1)));
        let i32 = block_interval(3, 2).unwrap();
        assert_eq!(i32.rational_endpoints().unwrap(), (rat(5, 1), rat(7, 1)));
        assert!(matches!(
            block_interval(3, 4),
            Err(WitnessError::IndexOutOfRange(_))
        ));
        let _ = b;
    }

    #[test]
    fn blocks_tile_the_half_line_prefix() {
        // Union over N <= 50, M <= N tiles [0, sum N(N+1)/2] exactly.
        let mut expected_start = BigInt::from(0);
        for n in 1..=50u64 {
            for m in 1..=n {
                let iv = block_interval(n, m).unwrap();
                let (lo, hi) = iv.rational_endpoints().unwrap();
                assert_eq!(lo, BigRational::from_integer(expected_start.clone()));
                expected_start = hi.numer().clone();
                assert_eq!(hi.denom(), &BigInt::one());
                assert_eq!(hi - lo, BigRational::from_integer(BigInt::from(m)));
            }
        }
        let total: u64 = (1..=50).map(|n| n * (n + 1) / 2).sum();
        assert_eq!(expected_start, BigInt::from(total));
    }

    #[test]
    fn traveling_bump_unit_mass() {
        let b = basis();
        let g12 = traveling_bump(1, 2, &b).unwrap();
        let (lo, hi) = g12.pieces()[0].interval.rational_endpoints().unwrap();
        assert_eq!((lo, hi), (rat(2, 1), rat(4, 1)));
        let norm = crate::pwfun::l1_norm_exact(&g12, &b).unwrap().unwrap();
        assert_eq!(norm.as_rational().unwrap(), rat(1, 1));
    }

    #[test]
    fn family_specs_round_trip_through_strings() {
        for spec in FamilySpec::catalog() {
            let s = spec.to_string();
            let parsed: FamilySpec = s.parse().unwrap();
            assert_eq!(parsed, spec);
        }
        assert!("nup-gen".parse::<FamilySpec>().is_err());
        assert!("unknown-family".parse::<FamilySpec>().is_err());
    }

    #[test]
    fn registry_builds_catalog_with_audits() {
        let reg = Registry::new(basis());
        for spec in FamilySpec::catalog() {
            let seq = reg.build(&spec).unwrap_or_else(|e| panic!("{}: {}", spec, e));
            let f = seq.generate(3);
            let _ = f;
        }
    }
}
