use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{0} is not a unit modulo p")]
    NonUnit(u64),
    #[error("matrix is singular modulo p")]
    SingularModP,
    #[error("operands live over different rings ({0})")]
    RingMismatch(String),
    #[error("series profile mismatch: {0}")]
    ProfileMismatch(String),
    #[error("series has a non-unit constant term")]
    NonUnitSeries,
    #[error("substituted series has a nonzero constant term")]
    NonzeroConstant,
    #[error("exponent known to p^{have}, need at least p^{need}")]
    InsufficientExponentPrecision { have: u32, need: u32 },
    #[error("exact division failed: {0}")]
    NotDivisible(String),
    #[error("series is not in the pi0-subring: component {component} is nonzero")]
    NotInS0 { component: usize },
    #[error("operator expects a series in {expected}")]
    VariableMismatch { expected: &'static str },
    #[error("weight {weight} exceeds the bound {bound}")]
    WeightOverflow { weight: u32, bound: u32 },
    #[error("validation failed: {}", .0.join("; "))]
    ValidationFailed(Vec<String>),
    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("perturbed matrix does not reduce to A*diag(p^r) modulo pi0")]
    NotCongruent,
    #[error("axiom violation: {0}")]
    AxiomViolation(String),
    #[error("lattice basis is singular modulo p")]
    SingularBasis,
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("schema error: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;
