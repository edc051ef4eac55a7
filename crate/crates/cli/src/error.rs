use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("ambiguous config key `{key}` (found in sections {sections})")]
    AmbiguousKey { key: String, sections: String },
    #[error("invalid value for `{key}`: {message}")]
    BadValue { key: String, message: String },
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Core(#[from] geomopt_core::Error),
    #[error("support not identified in any of {0} trials")]
    NotIdentified(usize),
}

impl CliError {
    pub fn bad(key: &str, message: impl Into<String>) -> Self {
        CliError::BadValue {
            key: key.to_string(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        use geomopt_core::Error as E;
        match self {
            CliError::UnknownKey(_)
            | CliError::AmbiguousKey { .. }
            | CliError::BadValue { .. }
            | CliError::Config(_)
            | CliError::Io { .. } => 2,
            CliError::Core(E::Input(_) | E::Parse { .. } | E::Dimension { .. }) => 2,
            CliError::Core(_) => 3,
            CliError::NotIdentified(_) => 4,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
