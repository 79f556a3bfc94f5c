use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    FdSyntax { line: usize, message: String },

    #[error("line {line}: duplicate functional dependency `{fd}`")]
    DuplicateFd { line: usize, fd: String },

    #[error("line {line}: right-hand side `{attr}` also appears on the left-hand side")]
    RhsInLhs { line: usize, attr: String },

    #[error("line {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("duplicate attribute name `{0}` in header")]
    DuplicateHeader(String),

    #[error("input has no header row")]
    MissingHeader,

    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("pattern refers to an edge that is not in the instance graph")]
    MissingEdge,

    #[error("tuple index {index} out of range for {len} tuples")]
    TupleOutOfRange { index: usize, len: usize },

    #[error("repair was run without trace recording")]
    TraceUnavailable,

    #[error("search space of about {estimate:.3e} states exceeds the limit of {limit}")]
    SearchSpaceExceeded { estimate: f64, limit: u64 },

    #[error("invalid generator profile: {0}")]
    Profile(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
