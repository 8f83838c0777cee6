use thiserror::Error;

/// Errors raised by the scoring, e-value, sequential and I/O layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("probability {value} outside {allowed} for {what}")]
    ProbabilityRange {
        what: &'static str,
        value: f64,
        allowed: &'static str,
    },
    #[error("lambda {0} outside [0, 1]")]
    LambdaRange(f64),
    #[error("degenerate interval [{a}, {b})")]
    DegenerateInterval { a: f64, b: f64 },
    #[error("mixing measure has no mass on [{a}, {b})")]
    ZeroMass { a: f64, b: f64 },
    #[error("forecasts are equal (p = q = {0}); no comparison is possible")]
    EqualForecasts(f64),
    #[error("alternative {pi1} lies inside the null interval [{lo}, {hi}]")]
    AlternativeInsideNull { pi1: f64, lo: f64, hi: f64 },
    #[error("invalid mixing density: {0}")]
    InvalidDensity(String),
    #[error("invalid alternative: {0}")]
    InvalidAlternative(String),
    #[error("time {got} out of order (expected {expected})")]
    Ordering { expected: i64, got: i64 },
    #[error("outcome for forecast time {0} has not been observed yet")]
    OutcomeOverdue(i64),
    #[error("no committed forecast is waiting for an outcome")]
    NoPending,
    #[error("stopping rule requires {expected}, process has lag {lag}")]
    LagMismatch { expected: &'static str, lag: usize },
    #[error("invalid parameter {name}: {reason}")]
    Parameter { name: &'static str, reason: String },
    #[error("series too short: need at least {needed}, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("degenerate variance estimate {0}")]
    DegenerateVariance(f64),
    #[error("cannot average an empty list of e-values")]
    EmptyMerge,
    #[error("input row {row}, column {column}: {reason}")]
    Parse {
        row: usize,
        column: String,
        reason: String,
    },
    #[error("missing required column {0}")]
    MissingColumn(String),
    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by malformed input files, configuration or
    /// parameters, as opposed to numeric or domain failures.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Ordering { .. }
                | Error::Parse { .. }
                | Error::MissingColumn(_)
                | Error::Config { .. }
                | Error::Parameter { .. }
                | Error::Io(_)
                | Error::Csv(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
