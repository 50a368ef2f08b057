use thiserror::Error;

/// Errors raised by the algebra layer.
///
/// Mathematical "no" answers (a module that is not étale, a cohomology run
/// that did not stabilize) are reported through certificates and reports;
/// the variants here are for operations that cannot produce a value.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("element is not a unit")]
    NonUnit,
    #[error("invalid field parameters: {0}")]
    InvalidParams(String),
    #[error("precision {requested} exceeds the supported maximum {max}")]
    PrecisionTooLarge { requested: u32, max: u32 },
    #[error("power series has a nonzero constant term")]
    ConstantTermNonzero,
    #[error("linear step of the formal group solve is singular at degree {0}")]
    NoConvergence(usize),
    #[error("inexact division by pi^{power} in {context}")]
    InexactDivision { power: u32, context: String },
    #[error("operands live in different rings")]
    RingMismatch,
    #[error("coefficient ring has no valuation")]
    NoValuation,
    #[error("leading term of the series is not certified by its window")]
    UncertifiedLeadingTerm,
    #[error("perfection level {requested} exceeds configured maximum {max}")]
    PerfLevelExceeded { requested: u32, max: u32 },
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("trace is not divisible by pi")]
    TraceNotDivisible,
    #[error("growth certificate invalid: {0}")]
    CertificateInvalid(String),
    #[error("no valid r found at current precision")]
    NoValidR,
    #[error("enumeration too large: {0} elements")]
    TooLarge(u64),
    #[error("order of the torsion subgroup is divisible by p")]
    DeltaOrderDivisibleByP,
    #[error("projector rank is not certified")]
    RankNotCertified,
    #[error("cohomology did not stabilize")]
    NotStabilized,
    #[error("module is not étale")]
    NotEtale,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
