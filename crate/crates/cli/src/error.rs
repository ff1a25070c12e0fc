use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("malformed input at {location}: {detail}")]
    Malformed { location: String, detail: String },

    #[error("{location}: {error}")]
    Invalid { location: String, error: motive_core::Error },

    #[error("cannot read {path}: {detail}")]
    Io { path: String, detail: String },

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 1 for validation failures, 2 for precision exhaustion, 3 for malformed input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid { error, .. } => core_exit_code(error),
            CliError::Malformed { .. } | CliError::Io { .. } | CliError::Usage(_) => 3,
        }
    }

    pub fn computation(location: impl Into<String>, error: motive_core::Error) -> CliError {
        CliError::Invalid { location: location.into(), error }
    }
}

pub fn core_exit_code(e: &motive_core::Error) -> i32 {
    match e {
        motive_core::Error::PrecisionExhausted { .. } => 2,
        _ => 1,
    }
}
