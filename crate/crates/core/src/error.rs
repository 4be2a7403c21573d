use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the heatmap, metric, ranking and pipeline layers.
#[derive(Error, Debug)]
pub enum Error {
    #[error("heatmap must have positive dimensions, got {width}x{height}")]
    EmptyCanvas { width: u32, height: u32 },
    #[error("heatmap of {width}x{height} expects {expected} values, got {actual}")]
    ValueCount {
        width: u32,
        height: u32,
        expected: usize,
        actual: usize,
    },
    #[error("negative value {value} at index {index}")]
    NegativeValue { index: usize, value: f64 },
    #[error("non-finite value at index {index}")]
    NonFiniteValue { index: usize },
    #[error("empty bounding box [{x_min},{x_max})x[{y_min},{y_max})")]
    EmptyBox {
        x_min: u32,
        y_min: u32,
        x_max: u32,
        y_max: u32,
    },
    #[error("bounding box [{x_min},{x_max})x[{y_min},{y_max}) exceeds {width}x{height} canvas")]
    BoxOutOfCanvas {
        x_min: u32,
        y_min: u32,
        x_max: u32,
        y_max: u32,
        width: u32,
        height: u32,
    },
    #[error("annotation set for image {0:?} has no boxes")]
    EmptyAnnotationSet(String),
    #[error("vector has zero total mass")]
    ZeroMass,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("degenerate input for {metric}: {reason}")]
    DegenerateInput {
        metric: &'static str,
        reason: &'static str,
    },
    #[error("minkowski order must be >= 1, got {0}")]
    InvalidOrder(f64),
    #[error("dimension mismatch{}: expected {expected_width}x{expected_height}, got {width}x{height}", context_suffix(.context))]
    DimensionMismatch {
        context: Option<String>,
        expected_width: u32,
        expected_height: u32,
        width: u32,
        height: u32,
    },
    #[error("score table needs at least 2 methods, got {0}")]
    TooFewMethods(usize),
    #[error("threshold {0} outside [0, 1]")]
    ThresholdOutOfRange(f64),
    #[error("thresholds must be strictly increasing")]
    ThresholdsNotIncreasing,
    #[error("no votes for image {0:?}")]
    NoVotes(String),
    #[error("score table has no usable row for metric {0}")]
    MissingMetricRow(&'static str),
    #[error("depth {depth} out of range 1..={max}")]
    DepthOutOfRange { depth: usize, max: usize },
    #[error("ranking is empty")]
    EmptyRanking,
    #[error("persistence {0} outside [0, 1]")]
    PersistenceOutOfRange(f64),
    #[error("duplicate item {0:?} in ranking")]
    DuplicateItem(String),
    #[error("unknown method {method:?}{}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    UnknownMethod { method: String, line: Option<u64> },
    #[error("unknown metric {0:?}")]
    UnknownMetric(String),
    #[error("{}: malformed input at line {line}: {message}", path.display())]
    MalformedCsv {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{}: {message}", path.display())]
    MalformedFile { path: PathBuf, message: String },
    #[error("value {value} at index {index} cannot be stored in [0, 1]")]
    UnrepresentableValue { index: usize, value: f64 },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn context_suffix(context: &Option<String>) -> String {
    context
        .as_ref()
        .map(|c| format!(" in {c}"))
        .unwrap_or_default()
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for filesystem failures, false for validation failures.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
