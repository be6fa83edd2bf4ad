use caclab_core::CacError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Model {
        context: String,
        #[source]
        source: CacError,
    },

    #[error("csv line {line}: {reason}")]
    Csv { line: usize, reason: String },

    #[error("nothing to write: {0}")]
    Empty(String),
}

impl CliError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }

    pub fn model(context: impl Into<String>) -> impl FnOnce(CacError) -> Self {
        let context = context.into();
        move |source| CliError::Model { context, source }
    }

    /// 1 for configuration problems, 2 for anything that failed at run time.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            _ => 2,
        }
    }
}
