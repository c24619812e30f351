use std::path::PathBuf;

use thiserror::Error;

use crate::types::ValidationIssue;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the toolkit can report.
///
/// Each variant carries a stable upper-case code (see [`Error::code`]) that the
/// CLI prints next to the message.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value: {}", join_issues(.0))]
    Invalid(Vec<ValidationIssue>),

    #[error("{}: {message}", location(.path, *.line))]
    Malformed { path: Option<PathBuf>, line: Option<usize>, message: String },

    #[error("duplicate factor name {0:?}")]
    DuplicateName(String),

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("{}: {message}", location(.path, *.line))]
    Range { path: Option<PathBuf>, line: Option<usize>, message: String },

    #[error("missing factor column {0:?}")]
    MissingFactorColumn(String),

    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("every latent dimension is inactive (std below {threshold})")]
    AllInactive { threshold: f64 },

    #[error("factor {factor} has {found} pairs, at least {required} required")]
    TooFewPairs { factor: usize, found: usize, required: usize },

    #[error("index {index} out of range for length {len}")]
    Index { index: usize, len: usize },

    #[error("factor {0} takes a single observed value")]
    ConstantFactor(usize),

    #[error("MIG needs at least two active dimensions, found {0}")]
    NeedTwoDims(usize),

    #[error("no latent dimension carries information about any factor")]
    NoInformativeDims,

    #[error("importance matrix is all zero")]
    NoImportance,

    #[error("training labels for factor {0} are constant")]
    SingleClass(usize),

    #[error("rank vector is constant ({0})")]
    ZeroVariance(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("no two rows differ in exactly one factor")]
    NoPairs,

    #[error("rank correlation needs at least 3 models, got {0}")]
    TooFewModels(usize),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Invalid(_) => "INVALID",
            Error::Malformed { .. } => "MALFORMED",
            Error::DuplicateName(_) => "DUPLICATE_NAME",
            Error::DimMismatch(_) => "DIM_MISMATCH",
            Error::Range { .. } => "RANGE",
            Error::MissingFactorColumn(_) => "MISSING_FACTOR_COLUMN",
            Error::Io { .. } => "IO_FAILURE",
            Error::AllInactive { .. } => "ALL_INACTIVE",
            Error::TooFewPairs { .. } => "TOO_FEW_PAIRS",
            Error::Index { .. } => "INDEX",
            Error::ConstantFactor(_) => "CONSTANT_FACTOR",
            Error::NeedTwoDims(_) => "NEED_TWO_DIMS",
            Error::NoInformativeDims => "NO_INFORMATIVE_DIMS",
            Error::NoImportance => "NO_IMPORTANCE",
            Error::SingleClass(_) => "SINGLE_CLASS",
            Error::ZeroVariance(_) => "ZERO_VARIANCE",
            Error::Shape(_) => "SHAPE",
            Error::NoPairs => "NO_PAIRS",
            Error::TooFewModels(_) => "TOO_FEW_MODELS",
        }
    }

    /// Input errors are problems with files or arguments; everything else is a
    /// failure of the computation on otherwise well-formed input.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Invalid(_)
                | Error::Malformed { .. }
                | Error::DuplicateName(_)
                | Error::DimMismatch(_)
                | Error::Range { .. }
                | Error::MissingFactorColumn(_)
                | Error::Io { .. }
        )
    }

    pub(crate) fn malformed(message: impl Into<String>) -> Self {
        Error::Malformed { path: None, line: None, message: message.into() }
    }

    /// Attach a file path to errors that carry one.
    pub(crate) fn at_path(self, p: &std::path::Path) -> Self {
        match self {
            Error::Malformed { line, message, .. } => Error::Malformed { path: Some(p.to_path_buf()), line, message },
            Error::Range { line, message, .. } => Error::Range { path: Some(p.to_path_buf()), line, message },
            other => other,
        }
    }
}

fn location(path: &Option<PathBuf>, line: Option<usize>) -> String {
    match (path, line) {
        (Some(p), Some(l)) => format!("{}: line {l}", p.display()),
        (Some(p), None) => p.display().to_string(),
        (None, Some(l)) => format!("line {l}"),
        (None, None) => "input".to_string(),
    }
}

fn join_issues(issues: &[ValidationIssue]) -> String {
    issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; ")
}
