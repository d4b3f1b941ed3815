use thiserror::Error;

use crate::pipeline::IterationOutcome;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coordinate {value} of point {point:?} lies outside [1, {bound}]")]
    CoordinateOutOfRange {
        point: Vec<u64>,
        value: u64,
        bound: u64,
    },
    #[error("point set is empty")]
    EmptySet,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("generation failed: {0}")]
    GenerationFailed(String),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("header mismatch: {0}")]
    HeaderMismatch(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("prime window lower endpoint {lower} is below 2")]
    WindowBelowTwo { lower: f64 },
    #[error("prime window contains no primes")]
    EmptyWindow,
    #[error("trial budget must be at least 1")]
    ZeroTrials,
    #[error("overdetermined: {points} points but only {monomials} monomials of degree <= {degree}")]
    Overdetermined {
        points: usize,
        monomials: usize,
        degree: u32,
    },
    #[error("search space of {candidates} candidates exceeds the limit of {limit}")]
    SearchSpaceTooLarge { candidates: f64, limit: u64 },
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error("internal error: {0}")]
    Internal(String),
    #[error(
        "iteration budget of {} rounds exhausted with covered fraction {:.6}",
        .0.rounds.len(),
        .0.covered_fraction
    )]
    IterationBudgetExceeded(Box<IterationOutcome>),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable code, used by the command-line front end.
    pub fn code(&self) -> &'static str {
        match self {
            Error::CoordinateOutOfRange { .. } => "COORDINATE_OUT_OF_RANGE",
            Error::EmptySet => "EMPTY_SET",
            Error::InvalidParameter(_) => "INVALID_PARAMETER",
            Error::GenerationFailed(_) => "GENERATION_FAILED",
            Error::Parse { .. } => "PARSE_ERROR",
            Error::HeaderMismatch(_) => "HEADER_MISMATCH",
            Error::DimensionMismatch { .. } => "DIMENSION_MISMATCH",
            Error::WindowBelowTwo { .. } => "WINDOW_BELOW_TWO",
            Error::EmptyWindow => "EMPTY_WINDOW",
            Error::ZeroTrials => "ZERO_TRIALS",
            Error::Overdetermined { .. } => "OVERDETERMINED",
            Error::SearchSpaceTooLarge { .. } => "SEARCH_SPACE_TOO_LARGE",
            Error::ZeroPolynomial => "ZERO_POLYNOMIAL",
            Error::Internal(_) => "INTERNAL_ERROR",
            Error::IterationBudgetExceeded(_) => "ITERATION_BUDGET_EXCEEDED",
            Error::Io(e) if e.kind() == std::io::ErrorKind::NotFound => "IO_NOT_FOUND",
            Error::Io(_) => "IO_ERROR",
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
