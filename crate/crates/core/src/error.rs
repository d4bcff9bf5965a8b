use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Column of a [`Sample`](crate::Sample) that an estimator needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    R,
    V,
    W,
}

impl Column {
    pub fn name(self) -> &'static str {
        match self {
            Column::R => "r",
            Column::V => "v",
            Column::W => "w",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    TooFewObservations(usize),
    MissingColumn(Column),
    NonFiniteValue {
        column: &'static str,
        row: usize,
    },
    InvalidIndicator {
        row: usize,
        value: f64,
    },
    InvalidSpec(&'static str),
    InvalidDomain {
        coordinate: usize,
    },
    IndexOutOfRange {
        index: usize,
        len: usize,
    },
    LengthMismatch {
        left: usize,
        right: usize,
    },
    InvalidArgument(&'static str),
    InvalidStep(f64),
    SingularHessian {
        smallest: f64,
        largest: f64,
    },
    NonPositiveVariance(f64),
    DegenerateSample,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch {
                what,
                expected,
                got,
            } => write!(f, "DimensionMismatch {what}: expected {expected}, got {got}"),
            Error::TooFewObservations(n) => {
                write!(f, "DimensionMismatch: need at least 2 observations, got {n}")
            }
            Error::MissingColumn(c) => write!(f, "MissingColumn {}", c.name()),
            Error::NonFiniteValue { column, row } => {
                write!(f, "NonFiniteValue in column {column} at row {row}")
            }
            Error::InvalidIndicator { row, value } => {
                write!(f, "InvalidIndicator: r[{row}] = {value}, expected 0 or 1")
            }
            Error::InvalidSpec(msg) => write!(f, "InvalidSpec: {msg}"),
            Error::InvalidDomain { coordinate } => {
                write!(f, "InvalidDomain: empty box or init outside it at coordinate {coordinate}")
            }
            Error::IndexOutOfRange { index, len } => {
                write!(f, "IndexOutOfRange: {index} not in 0..{len}")
            }
            Error::LengthMismatch { left, right } => {
                write!(f, "LengthMismatch: {left} vs {right}")
            }
            Error::InvalidArgument(msg) => write!(f, "InvalidArgument: {msg}"),
            Error::InvalidStep(eps) => write!(f, "InvalidStep: step size {eps} must be positive"),
            Error::SingularHessian { smallest, largest } => write!(
                f,
                "SingularHessian: smallest singular value {smallest:e} vs largest {largest:e}"
            ),
            Error::NonPositiveVariance(v) => {
                write!(f, "NonPositiveVariance: projected variance {v:e}")
            }
            Error::DegenerateSample => write!(f, "DegenerateSample: zero spread"),
        }
    }
}

impl core::error::Error for Error {}
