use thiserror::Error;

/// Errors raised while building states, ensembles, instruments and reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace deviation {0:e} from unit trace")]
    TraceDeviation(f64),

    #[error("negative eigenvalue {0:e}")]
    NegativeEigenvalue(f64),

    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("measure unavailable: {0}")]
    MeasureUnavailable(String),

    #[error("incomplete instrument (max deviation of sum K^dag K from identity {0:e})")]
    IncompleteInstrument(f64),

    #[error("instrument has no outcomes")]
    EmptyInstrument,

    #[error("no instrument defined for outcome history {0:?}")]
    ChooserUndefined(Vec<String>),

    #[error("inconsistent result: {0}")]
    Inconsistent(String),

    #[error("scenario error at `{field}`: {message}")]
    Scenario { field: String, message: String },

    #[error("scenario parse error: {0}")]
    Parse(String),

    #[error("{0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn scenario(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Scenario {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
