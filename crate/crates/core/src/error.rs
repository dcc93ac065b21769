use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Stage of the cascaded fit in which a regression error occurred.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitStage {
    /// Exponential in distance, per (altitude, frequency) cell.
    Distance,
    /// Exponential in altitude, per frequency.
    Altitude,
    /// Polynomial in frequency.
    Frequency,
}

impl std::fmt::Display for FitStage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FitStage::Distance => write!(f, "step 1 (distance)"),
            FitStage::Altitude => write!(f, "step 2 (altitude)"),
            FitStage::Frequency => write!(f, "step 3 (frequency)"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} is outside the valid range {range}")]
    Range {
        what: &'static str,
        value: f64,
        range: String,
    },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("unknown {kind} `{name}`; valid names are: {valid}")]
    Lookup {
        kind: &'static str,
        name: String,
        valid: String,
    },

    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("grid has {count} missing cell(s), first missing: {listed}")]
    MissingCells { count: usize, listed: String },

    #[error("duplicate grid cell at line {line} (first seen at line {first}): {coord}")]
    DuplicateCell { line: usize, first: usize, coord: String },

    #[error("line {line}: coordinate {coord} is not on the grid's Cartesian product")]
    NonGrid { line: usize, coord: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("axis mismatch: {0}")]
    AxisMismatch(String),

    #[error("band mismatch: {0}")]
    BandMismatch(String),

    #[error("singular fit: {0}")]
    SingularFit(String),

    #[error("sign error: {0}")]
    Sign(String),

    #[error("underdetermined fit: {0}")]
    Underdetermined(String),

    #[error("{stage}{}: {source}", theta.map(|t| format!(" at theta = {t} deg")).unwrap_or_default())]
    Stage {
        stage: FitStage,
        theta: Option<f64>,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn range(what: &'static str, value: f64, range: impl Into<String>) -> Self {
        Error::Range {
            what,
            value,
            range: range.into(),
        }
    }

    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at_stage(self, stage: FitStage, theta: Option<f64>) -> Self {
        Error::Stage {
            stage,
            theta,
            source: Box::new(self),
        }
    }

    /// Process exit code: 2 for usage and validation problems, 1 for numeric
    /// or internal failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Stage { source, .. } => source.exit_code(),
            Error::NumericFailure(_)
            | Error::SingularFit(_)
            | Error::Sign(_)
            | Error::Underdetermined(_)
            | Error::Io { .. } => 1,
            _ => 2,
        }
    }
}
