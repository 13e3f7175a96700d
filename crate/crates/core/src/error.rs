use thiserror::Error;

/// Errors raised across the crate.
///
/// Variants carry enough context (the offending model, row, or column) to
/// be reported without re-running the computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("model {model} is rank deficient (smallest/largest R diagonal ratio {ratio:.3e})")]
    RankDeficient { model: String, ratio: f64 },

    #[error("column index {index} out of range for p = {p}")]
    IndexOutOfRange { index: usize, p: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("model {model} has non-positive residual sum of squares")]
    NonPositiveRss { model: String },

    #[error("AICc undefined for model size {size} with n = {n}")]
    AiccDegenerate { size: usize, n: usize },

    #[error("contrast vector eta has zero norm")]
    ZeroEta,

    #[error("eta is not in the column span of the selected model (relative residual {residual:.3e})")]
    EtaNotInSpan { residual: f64 },

    #[error("model {model} is not the criterion minimizer for the observed response")]
    NotSelectedModel { model: String },

    #[error("column {index} is not part of model {model}")]
    IndexNotInModel { index: usize, model: String },

    #[error("observation {value} lies outside the truncation region")]
    ObservationOutsideRegion { value: f64 },

    #[error("bracketing failed while inverting the truncated CDF: {0}")]
    BracketFailure(String),

    #[error("truncation region carries no representable probability mass")]
    RegionMassUnderflow,

    #[error("non-positive residual degrees of freedom ({df})")]
    NonPositiveDf { df: i64 },

    #[error("AR(1) correlation must lie in (-1, 1), got {0}")]
    InvalidRho(f64),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// Process exit code for the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::RankDeficient { .. }
            | Error::NonPositiveRss { .. }
            | Error::BracketFailure(_)
            | Error::RegionMassUnderflow
            | Error::ObservationOutsideRegion { .. } => 3,
            Error::Invariant(_) => 4,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
