use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A frequency law lacks the absolute moments every construction here needs.
    #[error("moments do not exist: {law} has divergent absolute moments of order >= {order}")]
    MomentsDoNotExist { law: String, order: u32 },

    /// `L²(g)` has dimension equal to the support size of `g`.
    #[error("measure support too small: {support} support points cannot carry {requested} orthonormal polynomials")]
    DegenerateMeasure { support: usize, requested: usize },

    #[error("index out of range: {what} = {index} exceeds limit {limit}")]
    IndexOutOfRange {
        what: &'static str,
        index: i64,
        limit: i64,
    },

    #[error("invalid measure specification: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value at step {step} (node {node})")]
    NonFinite { step: usize, node: usize },

    /// A truncated moment lattice left the region where its closure is meaningful.
    #[error("moment lattice blew up at t = {t}: |Z| = {magnitude} exceeds {limit}")]
    TruncationBlowUp { t: f64, magnitude: f64, limit: f64 },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    /// Coarse failure category, used by the CLI for exit codes.
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Config(_) => ErrorCategory::Config,
            Error::Io { .. } | Error::Csv { .. } => ErrorCategory::Io,
            Error::NonFinite { .. } | Error::TruncationBlowUp { .. } => ErrorCategory::Numerical,
            _ => ErrorCategory::Input,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Input,
    Numerical,
    Io,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Config => 2,
            ErrorCategory::Input => 3,
            ErrorCategory::Numerical => 4,
            ErrorCategory::Io => 5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::Config => "config",
            ErrorCategory::Input => "input",
            ErrorCategory::Numerical => "numerical",
            ErrorCategory::Io => "io",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
