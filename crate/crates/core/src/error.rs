use thiserror::Error;

/// Axis of a contingency table, used in marginal diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Row,
    Col,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Axis::Row => write!(f, "row"),
            Axis::Col => write!(f, "column"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("malformed CSV at line {line}: {reason}")]
    CsvFormat { line: usize, reason: String },

    #[error("negative count {value:?} at line {line}")]
    NegativeCount { line: usize, value: String },

    #[error("duplicate {axis} label {label:?}")]
    DuplicateLabel { axis: Axis, label: String },

    #[error("ragged row at line {line}: expected {expected} fields, got {got}")]
    RaggedRow {
        line: usize,
        expected: usize,
        got: usize,
    },

    #[error("empty input: no records found")]
    EmptyInput,

    #[error("{axis} {label:?} sums to zero; filter it out before normalizing")]
    ZeroMarginal { axis: Axis, label: String },

    #[error("label {label:?} cannot be written to CSV: {reason}")]
    UnwritableLabel { label: String, reason: String },

    #[error("eigen-iteration did not converge after {sweeps} sweeps (off-diagonal norm {off:e})")]
    ConvergenceFailure { sweeps: usize, off: f64 },

    #[error("factor axis {axis} out of range: model has {available} factors")]
    AxisOutOfRange { axis: usize, available: usize },

    #[error("map has {units} units; the neighborhood null model needs at least 9")]
    UnitCountTooSmall { units: usize },

    #[error("unknown label {label:?}")]
    UnknownLabel { label: String },

    #[error("item sets do not match: {reason}")]
    ItemSetMismatch { reason: String },

    #[error("invalid configuration: {reason}")]
    InvalidConfig { reason: String },

    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 config, 3 data, 4 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Stage { source, .. } => source.exit_code(),
            Error::InvalidConfig { .. }
            | Error::UnitCountTooSmall { .. }
            | Error::AxisOutOfRange { .. } => 2,
            Error::ConvergenceFailure { .. } => 4,
            _ => 3,
        }
    }

    /// Tags an error with the pipeline stage it surfaced in.
    pub fn at_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
