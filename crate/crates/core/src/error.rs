use thiserror::Error;

/// Errors raised across the library.
///
/// Variants fall into three families which the CLI maps to exit codes:
/// invalid input (`is_usage`), internal-consistency failures
/// (`Inconsistent`), and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("field hypothesis violated: {0}")]
    FieldHypothesis(String),

    #[error("field too large: {0}")]
    TooLarge(String),

    #[error("polynomial is not monic: {0}")]
    NotMonic(String),

    #[error("polynomial is not irreducible: {0}")]
    NotIrreducible(String),

    #[error("constant polynomial where a non-constant one is required")]
    ConstantPolynomial,

    #[error("division by zero")]
    DivisionByZero,

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("operands live in different field contexts")]
    ContextMismatch,

    #[error("bad reduction at {0}")]
    BadReduction(String),

    #[error("rank mismatch: {0}")]
    Rank(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("odd extension degree {0}: no quadratic subfield")]
    OddDegree(usize),

    #[error("{a} shares a factor with the prime {p}")]
    SharedFactor { a: String, p: String },

    #[error("torsion not found within tower degree bound {bound}")]
    TowerBound { bound: usize },

    #[error("CRT moduli have total degree {total}, need more than {needed_half}/2")]
    InsufficientModuli { total: usize, needed_half: usize },

    #[error("degree {n} exceeds the configured cap {cap}")]
    DegreeCap { n: usize, cap: usize },

    #[error("ring of size {size} is too large for enumeration (cap {cap})")]
    EnumerationCap { size: u64, cap: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal consistency failure: {0}")]
    Inconsistent(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn parse(pos: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            pos,
            msg: msg.into(),
        }
    }

    pub fn is_inconsistent(&self) -> bool {
        matches!(self, Error::Inconsistent(_))
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
