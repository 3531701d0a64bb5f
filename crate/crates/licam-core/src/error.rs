use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors reported by the preprocessing and calibration pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate time interval: start and end are both {0} ns")]
    DegenerateInterval(i64),

    #[error("timestamp {t} ns outside interval [{start}, {end}] ns")]
    TimestampOutOfInterval { t: i64, start: i64, end: i64 },

    #[error("IMU stream does not cover frame [{start}, {end}] ns: gap [{gap_start}, {gap_end}] ns exceeds {max_gap} ns")]
    ImuCoverageGap {
        start: i64,
        end: i64,
        gap_start: i64,
        gap_end: i64,
        max_gap: i64,
    },

    #[error("insufficient IMU samples: {0}")]
    InsufficientSamples(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("negative depth {0} m")]
    NegativeDepth(f64),

    #[error("raster dimensions differ: {lhs_width}x{lhs_height} vs {rhs_width}x{rhs_height}")]
    DimensionMismatch {
        lhs_width: u32,
        lhs_height: u32,
        rhs_width: u32,
        rhs_height: u32,
    },

    #[error("edge map has no pixels")]
    EmptyEdgeMap,

    #[error("insufficient scene structure: {0}")]
    InsufficientStructure(String),

    #[error("cost function evaluated to a non-finite value")]
    NonFiniteCost,

    #[error("invalid value: {0}")]
    Invalid(String),

    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("png {path}: {message}")]
    Png { path: String, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
