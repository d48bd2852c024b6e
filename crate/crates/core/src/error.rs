use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed xml: {0}")]
    MalformedXml(String),
    #[error("missing field: {0}")]
    MissingField(String),
    #[error("invalid value for {field}: {value}")]
    InvalidValue { field: String, value: String },
    #[error("expected {expected} mesh sections, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("uniform region has {0} points, need at least 2")]
    DegenerateGeometry(i64),
    #[error("non-positive near-wall spacing {0}")]
    NonPositiveSpacing(f64),
    #[error("duplicate or out-of-order mesh direction {0}")]
    DuplicateDirection(String),

    #[error("node {0} is not on a boundary")]
    InternalNode(usize),
    #[error("index {index} out of range for size {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("system is not degenerate")]
    NotDegenerate,
    #[error("matrix has no non-zero entries")]
    ZeroMatrix,
    #[error("matrix is not square ({0}x{1})")]
    NonSquare(usize, usize),
    #[error("shape mismatch: {0:?} vs {1:?}")]
    ShapeMismatch((usize, usize), (usize, usize)),

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("cannot solve a degenerate Poisson equation")]
    DegenerateUnsolvable,
    #[error("factorization failed: {0}")]
    SingularFactorization(String),
    #[error("zero eigenvalue encountered")]
    ZeroEigenvalue,
    #[error("matrix of size {0} exceeds the eigen-solve cap {1}")]
    TooLarge(usize, usize),

    #[error("dimension {0} is not a power of two")]
    NonPowerOfTwo(usize),
    #[error("decomposition has no terms")]
    EmptyDecomposition,
    #[error("matrix entry {0} outside [-1, 1]")]
    EntryOutOfRange(f64),
    #[error("vector length {0} is not a power of four")]
    BadLength(usize),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt header: {0}")]
    CorruptHeader(String),
    #[error("truncated payload")]
    TruncatedPayload,
}

pub type Result<T> = std::result::Result<T, Error>;
