use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: unknown IOB2 tag `{tag}`")]
    UnknownTag { line: usize, tag: String },

    #[error("embedding for `{word}` has {found} values, expected {expected}")]
    EmbeddingDim {
        word: String,
        expected: usize,
        found: usize,
    },

    #[error("invalid span {start}..{end} for length {len}")]
    SpanOutOfRange {
        start: usize,
        end: usize,
        len: usize,
    },

    #[error("spans {0:?} and {1:?} overlap")]
    SpanOverlap((usize, usize), (usize, usize)),

    #[error("shape mismatch in {context}: {message}")]
    Shape { context: String, message: String },

    #[error("singular parent covariance for node {node}")]
    Singular { node: String },

    #[error("not enough time instants: need {needed}, have {available}")]
    TooFewInstants { needed: usize, available: usize },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("model format: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn shape(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Shape {
            context: context.into(),
            message: message.into(),
        }
    }
}
