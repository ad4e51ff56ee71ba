use thiserror::Error;

/// Errors raised by field arithmetic, linear algebra, the protocol and the attack.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not an odd prime below 2^31")]
    InvalidModulus(u64),

    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u32, u32),

    #[error("division by zero")]
    DivisionByZero,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),

    #[error("singular matrix")]
    Singular,

    #[error("vector is not in the span")]
    NotInSpan,

    #[error("generator index {index} out of range (n = {n})")]
    GeneratorIndex { index: usize, n: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("presentation is not a conjugation")]
    NotAConjugation,

    #[error("ambiguous conjugator: solution space has dimension {0}")]
    AmbiguousConjugator(usize),

    #[error("no non-trivial conjugator found after {0} attempts")]
    KeygenExhausted(usize),

    #[error("no discrete logarithm below bound {0}; increase the bound")]
    NoSolutionBelowBound(u64),

    #[error("decryption failure: result is not a group element")]
    DecryptionFailure,

    #[error("automorphism does not extend linearly: {0}")]
    InconsistentExtension(String),
}

pub type Result<T> = std::result::Result<T, Error>;
