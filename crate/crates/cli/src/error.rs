use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid config:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error("{operation} failed ({params}): {source}")]
    Run {
        operation: String,
        params: String,
        #[source]
        source: mismatch_quant::Error,
    },
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            Self::Parse(_) | Self::Invalid(_) => ExitCode::from(2),
            Self::Run { .. } | Self::Io { .. } => ExitCode::from(1),
        }
    }
}
