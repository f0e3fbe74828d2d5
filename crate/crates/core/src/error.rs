use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network size {n}: must be a power of two and at least {min}")]
    InvalidSize { n: usize, min: usize },

    #[error("invalid band width k={k} for n={n}")]
    InvalidBandWidth { n: usize, k: usize },

    #[error("band width k={k} exceeds n/4 for n={n}; use a full Benes network instead")]
    UnsupportedBandWidth { n: usize, k: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("size mismatch: network has {expected} lines, permutation has {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("expected a {expected} network, got {found}")]
    WrongNetworkKind { expected: String, found: String },

    #[error("permutation is not {k}-bounded: input {input} goes to {output}")]
    NotKBounded {
        k: usize,
        input: usize,
        output: usize,
    },

    #[error("corrupt plan: {0}")]
    CorruptPlan(String),

    #[error("malformed plan: {0}")]
    MalformedPlan(String),

    #[error("malformed network: {0}")]
    MalformedNetwork(String),

    #[error("matching invariant violated: {0}")]
    TheoremViolation(String),

    #[error("enumeration budget exceeded: n={n} is larger than {limit}")]
    BudgetExceeded { n: usize, limit: usize },

    #[error("out of domain: {0}")]
    OutOfDomain(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
