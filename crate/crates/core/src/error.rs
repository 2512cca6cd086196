use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("thresholds must be strictly decreasing (level {level}: {previous} -> {next})")]
    NonDecreasingThresholds { level: usize, previous: f64, next: f64 },

    #[error("level {level} out of range (ladder has {levels} levels)")]
    LevelOutOfRange { level: usize, levels: usize },

    #[error("need at least {required} levels, got {got}")]
    TooFewLevels { required: usize, got: usize },

    #[error("exponent out of range: {0}")]
    ExponentOutOfRange(String),

    #[error("hoeffding condition violated at interval {interval}, grid index {index}: |h S| = {value} > b = {bound}")]
    HoeffdingCondition {
        interval: usize,
        index: usize,
        value: f64,
        bound: f64,
    },

    #[error("chen relation violated at ({s}, {u}, {t}): residual {residual}")]
    Chen {
        s: usize,
        u: usize,
        t: usize,
        residual: f64,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("unknown path kind `{0}`")]
    UnknownKind(String),

    #[error("missing parameter `{0}`")]
    MissingParam(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable code, used in CLI error reports and the C ABI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain_error",
            Error::InvalidPath(_) => "invalid_path",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NonDecreasingThresholds { .. } => "non_decreasing_thresholds",
            Error::LevelOutOfRange { .. } => "level_out_of_range",
            Error::TooFewLevels { .. } => "too_few_levels",
            Error::ExponentOutOfRange(_) => "exponent_out_of_range",
            Error::HoeffdingCondition { .. } => "hoeffding_condition",
            Error::Chen { .. } => "chen_relation",
            Error::GridMismatch(_) => "grid_mismatch",
            Error::Precondition(_) => "precondition_failed",
            Error::UnknownKind(_) => "unknown_kind",
            Error::MissingParam(_) => "missing_param",
            Error::Config(_) => "invalid_config",
            Error::Io { .. } => "io_error",
            Error::Csv(_) => "csv_error",
            Error::Json(_) => "json_error",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
