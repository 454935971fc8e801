use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Io(String),

    #[error(transparent)]
    Core(#[from] shortpath::Error),

    #[error("{failed} of {total} acceptance criteria failed")]
    AcceptanceFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Core(shortpath::Error::StepSizeRejected { .. }) => "not_converged",
            CliError::Core(shortpath::Error::Convergence { .. }) => "not_converged",
            CliError::Core(_) => "computation",
            CliError::AcceptanceFailed { .. } => "acceptance",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Core(_) => 4,
            CliError::AcceptanceFailed { .. } => 5,
        }
    }

    /// Single-line JSON for stderr.
    pub fn machine_line(&self) -> String {
        serde_json::json!({
            "error": {
                "kind": self.kind(),
                "code": self.exit_code(),
                "message": self.to_string(),
            }
        })
        .to_string()
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
