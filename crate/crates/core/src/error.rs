use thiserror::Error;

/// Broad classification used for exit codes and FFI status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input files, unknown names, invalid arguments.
    Input,
    /// The estimator could not produce a result from otherwise valid input.
    Estimation,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("duplicate observation for ({entity}, {period})")]
    DuplicateKey { entity: String, period: i32 },

    #[error("cannot parse value {value:?} at row {row}, column {column:?}")]
    ParseCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("missing column {0:?}")]
    MissingColumn(String),

    #[error("unknown variable {0:?}")]
    UnknownVariable(String),

    #[error("cannot take log of non-positive value {value} in column {column:?} at ({entity}, {period})")]
    NonPositiveLog {
        column: String,
        entity: String,
        period: i32,
        value: f64,
    },

    #[error(
        "entity {entity:?} has {available} usable period(s) in {column:?}, at least 2 required"
    )]
    InsufficientPeriods {
        entity: String,
        column: String,
        available: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("undefined NSFR: required stable funding is zero")]
    UndefinedNsfr,

    #[error("risk-weighted assets must be positive, got {0}")]
    NonPositiveRwa(f64),

    #[error("regressor matrix is rank deficient; collinear columns: {}", .columns.join(", "))]
    RankDeficient { columns: Vec<String> },

    #[error("too few observations: {observations} for {parameters} parameter(s)")]
    TooFewObservations {
        observations: usize,
        parameters: usize,
    },

    #[error("column {0:?} is unbalanced; balance the panel before running the unit-root test")]
    Unbalanced(String),

    #[error("degenerate variance in {0:?}: demeaned lagged values are all zero")]
    DegenerateVariance(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::RankDeficient { .. }
            | Error::TooFewObservations { .. }
            | Error::InsufficientPeriods { .. }
            | Error::DegenerateVariance(_) => ErrorKind::Estimation,
            _ => ErrorKind::Input,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
