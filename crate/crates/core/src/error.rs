use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },

    #[error("target {target} lies outside the uncertainty interval [{lo}, {hi}]")]
    TargetOutsideInterval { target: f64, lo: f64, hi: f64 },

    #[error("no mode meets the accuracy requirement {0}")]
    Infeasible(f64),

    #[error("fit needs at least two distinct difficulty levels, got {0}")]
    DegenerateFit(usize),

    #[error("no records to analyze")]
    Empty,

    #[error("unknown experiment family `{0}`")]
    UnknownFamily(String),

    #[error("log line {line}: {reason}")]
    CorruptLog { line: usize, reason: String },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field,
            reason: reason.into(),
        }
    }
}
