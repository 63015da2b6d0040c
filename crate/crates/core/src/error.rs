use thiserror::Error;

/// Errors raised by the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: malformed ARFF header: {message}")]
    MalformedHeader { line: usize, message: String },

    #[error("line {line}, column {column}: non-numeric value {value:?}")]
    NonNumeric { line: usize, column: usize, value: String },

    #[error("line {line}, column {column}: non-finite value {value:?}")]
    NonFinite { line: usize, column: usize, value: String },

    #[error("line {line}: class label {value:?} is not 0 or 1")]
    InvalidLabel { line: usize, value: String },

    #[error("line {line}: expected {expected} fields, found {found}")]
    RaggedRow { line: usize, expected: usize, found: usize },

    #[error("no data rows")]
    EmptyData,

    #[error("invalid recording: {0}")]
    InvalidRecording(String),

    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("unsupported format {0:?}")]
    UnsupportedFormat(String),

    #[error("channel {channel:?} is not zero-centered (mean {mean:e}); apply centering first")]
    NotCentered { channel: String, mean: f64 },

    #[error("channel {0:?} has zero energy over the selected timepoints")]
    DegenerateChannel(String),

    #[error("state filter matches {0} timepoints, need at least 2")]
    EmptySubset(usize),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("rankings cover different channel sets")]
    MismatchedChannels,

    #[error("only {available} disjoint transition windows available, {requested} requested")]
    InsufficientTransitions { available: usize, requested: usize },

    #[error("training data contains a single class")]
    SingleClass,

    #[error("dimension mismatch: model expects {expected} features, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("cannot stratify: class {class} has {count} rows for {folds} folds")]
    ClassTooSmall { class: u8, count: usize, folds: usize },

    #[error("gains requested but no base report was supplied")]
    MissingBase,

    #[error("training failed for {classifier}: {source}")]
    Training {
        classifier: String,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error in {what}: {message}")]
    Parse { what: &'static str, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter { name, message: message.into() }
    }

    /// True for failures of the environment rather than of the data or the
    /// arguments.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_)) || matches!(self, Error::Csv(e) if e.is_io_error())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
