use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{file}:{line}: {message}")]
    MalformedRecord {
        file: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{file}:{line}: unknown {what} code {code:?}")]
    UnknownCode {
        file: PathBuf,
        line: usize,
        what: &'static str,
        code: String,
    },

    #[error("corpus validation failed: {0}")]
    CorpusInvariant(String),

    #[error("recommendation list invalid: {0}")]
    RecListInvalid(String),

    #[error("unknown user {0:?}")]
    UnknownUser(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("template error: {0}")]
    Template(String),

    #[error("prompt error: {0}")]
    Prompt(String),

    #[error("dimension registry error: {0}")]
    Registry(String),

    #[error("provider configuration error: {0}")]
    Config(String),

    #[error("transport error after {retries} retries: {message}")]
    Transport { retries: u32, message: String },

    #[error("provider error: {0}")]
    Provider(String),

    #[error("response cache error: {0}")]
    Cache(String),

    #[error("unparseable judge response: {reason}\n--- response for audit ---\n{response}")]
    Unparseable { reason: String, response: String },

    #[error("verdict validation failed: {0}")]
    VerdictInvalid(String),

    #[error("tally error: {0}")]
    Tally(String),

    #[error("report error: {0}")]
    Report(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("judging quality failure: {0}")]
    JudgingQuality(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 for input/config problems, 3 when
    /// judging quality falls below the acceptable threshold.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::JudgingQuality(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
