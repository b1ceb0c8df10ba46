use thiserror::Error;

/// Errors raised by field construction, linear algebra and the code builders.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("field of order {p}^{e} exceeds the 2^16 element cap")]
    FieldTooLarge { p: u32, e: u32 },
    #[error("{0} is not a prime power")]
    NotPrimePower(u32),
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands live in different fields: GF({left}) and GF({right})")]
    FieldMismatch { left: u32, right: u32 },
    #[error("GF({order}) is not a quadratic extension of GF({base})")]
    NotQuadraticExtension { order: u32, base: u32 },
    #[error("GF({order}) has no element of multiplicative order {n}")]
    NoSuchRoot { order: u32, n: u32 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("matrix is not monomial")]
    NotMonomial,
    #[error("no permutation satisfies the minor condition at step {step}")]
    NotDerivable { step: usize },
    #[error("postcondition failed: {0}")]
    PostconditionFailed(String),
    #[error("hypothesis unmet: {0}")]
    HypothesisUnmet(String),
    #[error("no admissible scalars found for block {block}")]
    NoAdmissibleScalars { block: usize },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("constituent codes have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("invalid input: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
