use std::path::PathBuf;

/// Errors raised by the decomposition library and the command-line front end.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("signal length {len} is not divisible by 2^{levels}")]
    NotDivisible { len: usize, levels: usize },

    #[error("decomposition depth must be at least 1")]
    ZeroLevels,

    #[error("decomposition depth {levels} exceeds the wavelet limit of {max}")]
    TooManyLevels { levels: usize, max: usize },

    #[error("signal of length {len} is too short (need an even length of at least {min})")]
    TooShort { len: usize, min: usize },

    #[error("coefficient level {level} has length {found}, expected {expected}")]
    LevelLength {
        level: usize,
        expected: usize,
        found: usize,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("input contains non-finite values")]
    NonFinite,

    #[error("SVD failed to converge on a {rows}x{cols} matrix")]
    Svd { rows: usize, cols: usize },

    #[error("rank {k} out of range for a {rows}x{cols} matrix")]
    RankOutOfRange { k: usize, rows: usize, cols: usize },

    #[error("infeasible topology: {0}")]
    Topology(String),

    #[error("ground-truth component {0} has zero norm")]
    ZeroDenominator(&'static str),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: row {row}, column {col}: {msg}")]
    Parse {
        path: PathBuf,
        row: usize,
        col: usize,
        msg: String,
    },
}

impl Error {
    /// Process exit code for the CLI: 2 config, 3 data, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parameter(_) | Error::TooManyLevels { .. } => 2,
            Error::Io { .. } | Error::Parse { .. } | Error::Dimension(_) => 3,
            Error::NotDivisible { .. } | Error::ZeroLevels | Error::TooShort { .. } => 2,
            Error::Topology(_) | Error::RankOutOfRange { .. } => 2,
            Error::ZeroDenominator(_) | Error::LevelLength { .. } | Error::NonFinite => 3,
            Error::Svd { .. } => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
