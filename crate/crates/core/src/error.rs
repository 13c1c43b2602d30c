use thiserror::Error;

/// Errors raised by the algebraic operations of this crate.
///
/// Payloads carry rendered labels and elements so the error stays cheap to
/// clone and print.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("label {label} is not in the {role} basis")]
    LabelOutsideBasis { label: String, role: &'static str },
    #[error("multi-index length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("binomial coefficient undefined: {lower} is not below {upper}")]
    BinomialDomain { upper: String, lower: String },
    #[error("index {index} out of range for multi-indices of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),
    #[error("direct sum needs disjoint bases")]
    OverlappingBases,
    #[error("operation needs finite bases")]
    InfiniteBasis,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("series does not terminate on {edge} ⊗ {vertex} within {max_iter} iterations")]
    NonNilpotent { edge: String, vertex: String, max_iter: usize },
    #[error("map is not tree-compatible: witness ({a}, {a2}, {b})")]
    IncompatiblePhi { a: String, a2: String, b: String },
    #[error("edge maps do not commute on {0}")]
    OrderDependent(String),
    #[error("invalid vertex address {0:?}")]
    InvalidVertex(Vec<usize>),
    #[error("grafting map does not fit the forests")]
    InvalidGrafting,
    #[error("invalid post-Lie structure: {0}")]
    InvalidPostLie(String),
    #[error("unknown generator {0}")]
    UnknownGenerator(String),
    #[error("maps are not adjoint at ({a2}, {b2}) against ({a}, {b})")]
    AdjointnessViolated { a2: String, b2: String, a: String, b: String },
    #[error("not Xi-admissible: {0}")]
    NotAdmissible(String),
    #[error("generation probe missed {target}: residual {residual}")]
    NotReached { target: String, residual: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
