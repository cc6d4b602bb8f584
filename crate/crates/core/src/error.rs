use thiserror::Error;

/// Errors produced by the estimation library.
///
/// Every variant maps to a stable machine-readable code (see [`Error::code`]),
/// which the command-line front end prints alongside the message.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} = {value} is outside its domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid bounds: lo = {lo} must be below hi = {hi}")]
    InvalidBounds { lo: f64, hi: f64 },

    #[error("degenerate margin: {0}")]
    DegenerateMargin(String),

    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("unknown metric `{0}`")]
    UnknownMetric(String),

    #[error("single class: {0}")]
    SingleClass(&'static str),

    #[error("duplicate question `{0}`")]
    DuplicateQuestion(String),

    #[error("missing second-pass outcome for refused questions: {}", .0.join(", "))]
    MissingSecondPass(Vec<String>),

    #[error("requested size {size} exceeds the {available} available questions")]
    SizeTooLarge { size: usize, available: usize },

    #[error(transparent)]
    Records(#[from] crate::ingest::RecordErrors),
}

impl Error {
    /// Stable code used in diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::InvalidBounds { .. } => "invalid-bounds",
            Error::DegenerateMargin(_) => "degenerate-margin",
            Error::Inconsistent(_) => "inconsistent",
            Error::Empty(_) => "empty-input",
            Error::LengthMismatch { .. } => "length-mismatch",
            Error::ShapeMismatch(_) => "shape-mismatch",
            Error::UnknownMetric(_) => "unknown-metric",
            Error::SingleClass(_) => "single-class",
            Error::DuplicateQuestion(_) => "duplicate-question",
            Error::MissingSecondPass(_) => "missing-pass-2",
            Error::SizeTooLarge { .. } => "size-too-large",
            Error::Records(_) => "invalid-records",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_correlation(rho: f64) -> Result<()> {
    if rho.is_finite() && rho.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "rho",
            value: rho,
            domain: "(-1, 1)",
        })
    }
}

pub(crate) fn check_probability(what: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value: p,
            domain: "[0, 1]",
        })
    }
}
