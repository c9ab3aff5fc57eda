use thiserror::Error;

use crate::graded::Parity;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("operands live over different generator tables")]
    TableMismatch,

    #[error("invalid generator table: {0}")]
    InvalidTable(String),

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("assignment for `{name}` has the wrong parity (expected {expected:?})")]
    ParityViolation { name: String, expected: Parity },

    #[error("assignment for formal generator `{0}` is not nilpotent")]
    NonNilpotentImage(String),

    #[error("series inversion needs identity linear part: {0}")]
    LinearPartNotIdentity(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("truncation orders differ ({0} vs {1})")]
    OrderMismatch(u32, u32),

    #[error("chart mismatch: {0}")]
    ChartMismatch(String),

    #[error("connection is not torsion-free: Gamma^{upper}_({a},{b}) != Gamma^{upper}_({b},{a})")]
    NotTorsionFree { upper: String, a: String, b: String },

    #[error("bundle connection does not preserve degree at A^{alpha}_({coord},{beta})")]
    DegreeMixing { alpha: usize, coord: String, beta: usize },

    #[error("shape violation: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value during numeric integration")]
    NonFinite,

    #[error("Newton shooting failed at grid points {0:?}")]
    NotInChart(Vec<usize>),

    #[error(transparent)]
    Parse(#[from] crate::io::ParseError),

    #[error("document error: {0}")]
    Document(String),
}
