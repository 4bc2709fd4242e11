use thiserror::Error;

/// Errors surfaced by the engine. `ModulusSplit` is internal control flow for
/// dynamic evaluation modulo a squarefree polynomial: it carries a proper
/// factor of the modulus and is caught by the place-splitting drivers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("xgcd of zeros")]
    XgcdOfZeros,
    #[error("zero input")]
    ZeroInput,
    #[error("division by zero")]
    DivisionByZero,
    #[error("inconsistent linear system")]
    InconsistentSystem,
    #[error("reduction contract violated: {0}")]
    ReductionContract(&'static str),
    #[error("reduction contract violated: solution not unique")]
    NonUniqueSolution,
    #[error("not a basis")]
    NotABasis,
    #[error("unsupported constant field: {0}")]
    UnsupportedConstantField(String),
    #[error("valuation uncertain (truncation retries exhausted)")]
    ValuationUncertain,
    #[error("termination bound exceeded: {0}")]
    TerminationBoundExceeded(String),
    #[error("precondition violated: {0}")]
    Precondition(&'static str),
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("internal error: {0}")]
    Internal(String),
    /// The modulus of a residue-ring computation factored; callers retry per factor.
    #[error("modulus split")]
    ModulusSplit(crate::poly::Poly),
}

pub type Result<T> = std::result::Result<T, Error>;
