use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("unknown atom `{0}`")]
    UnknownAtom(String),

    #[error("boundary mismatch at node {path}: left codomain {left_codomain}, cut {cut}, right domain {right_domain}")]
    BoundaryMismatch {
        path: String,
        left_codomain: usize,
        cut: usize,
        right_domain: usize,
    },

    #[error("object of size {0} is not copiable in this algebra")]
    NotCopiable(usize),

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("undecided at cap: {0}")]
    UndecidedAtCap(String),

    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("glueing property violated: vertices {0} and {1} are identified but not both on the boundary")]
    GlueingViolation(usize, usize),

    #[error("matrix is not of full row rank: {0}")]
    NotFullRank(String),

    #[error("argument out of range: {0}")]
    OutOfRange(String),
}

pub type Result<T> = std::result::Result<T, Error>;
