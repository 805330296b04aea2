use std::path::PathBuf;

/// Errors produced by the measurement and estimation pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("image has no foreground pixels")]
    EmptyForeground,

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("PBM parse error at byte {offset}: {msg}")]
    PbmParse { offset: usize, msg: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("singular regression design (constant x-values)")]
    SingularDesign,

    #[error("divergent integral: {0}")]
    Divergence(String),

    #[error("no reference values available for {0}")]
    NotAvailable(String),

    #[error("malformed {what} at line {line}: {msg}")]
    Format {
        what: &'static str,
        line: usize,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
