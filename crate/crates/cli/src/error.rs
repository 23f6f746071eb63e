use std::path::PathBuf;

/// Failure to read an IDX file.
#[derive(Debug, thiserror::Error)]
pub enum IdxError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: wrong magic 0x{found:08x}, expected 0x{expected:08x}")]
    WrongMagic { path: PathBuf, expected: u32, found: u32 },
    #[error("{path}: truncated, {needed} bytes declared but {found} present")]
    Truncated { path: PathBuf, needed: usize, found: usize },
    #[error("{path}: dimension mismatch: {detail}")]
    DimensionMismatch { path: PathBuf, detail: String },
}

/// Failure to read an edge list.
#[derive(Debug, thiserror::Error)]
pub enum EdgeListError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed edge line {content:?}")]
    Malformed { path: PathBuf, line: usize, content: String },
    #[error("{path}: no edges")]
    Empty { path: PathBuf },
    #[error("{path}: {source}")]
    Graph {
        path: PathBuf,
        #[source]
        source: robustopt_core::Error,
    },
}

/// Top-level failure, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Idx(#[from] IdxError),
    #[error(transparent)]
    EdgeList(#[from] EdgeListError),
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: robustopt_core::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("report error: {0}")]
    Report(String),
}

impl CliError {
    /// 1 for configuration problems, 2 for everything that fails at run time.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            _ => 2,
        }
    }

    pub(crate) fn core(context: impl Into<String>) -> impl FnOnce(robustopt_core::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Core { context, source }
    }
}

pub type CliResult<T> = Result<T, CliError>;
