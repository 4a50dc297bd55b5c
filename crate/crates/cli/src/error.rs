use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] vicinal_core::Error),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    /// 2 for invalid configuration, 3 for solver failure, 1 for I/O.
    pub fn exit_code(&self) -> u8 {
        use vicinal_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 1,
            CliError::Core(e) => match e {
                E::NonConvergence { .. } | E::EscapedDomain { .. } | E::NotFixedPoint { .. } => 3,
                _ => 2,
            },
        }
    }

    fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "invalid_config",
            3 => "solver_failure",
            _ => "io",
        }
    }

    /// The machine-readable record written to standard error.
    pub fn record(&self) -> serde_json::Value {
        json!({
            "error": {
                "kind": self.kind(),
                "exit_code": self.exit_code(),
                "message": self.to_string(),
            }
        })
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
