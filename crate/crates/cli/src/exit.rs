//! Exit-code contract and the machine-readable error record.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitCode {
    Success,
    /// I/O failures while writing artifacts.
    Io,
    Config,
    Gate,
    Convergence,
    Invariant,
}

impl ExitCode {
    pub fn code(self) -> i32 {
        match self {
            ExitCode::Success => 0,
            ExitCode::Io => 1,
            ExitCode::Config => 2,
            ExitCode::Gate => 3,
            ExitCode::Convergence => 4,
            ExitCode::Invariant => 5,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CliError {
    pub exit_code: i32,
    pub kind: String,
    pub message: String,
}

impl CliError {
    pub fn new(code: ExitCode, kind: &str, message: impl Into<String>) -> Self {
        Self { exit_code: code.code(), kind: kind.into(), message: message.into() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&serde_json::json!({ "error": self })).expect("error serialises")
    }
}

impl From<nlnls::Error> for CliError {
    fn from(e: nlnls::Error) -> Self {
        use nlnls::Error::*;
        let (code, kind) = match &e {
            Contract(_) | InvalidInput(_) | Configuration(_) => (ExitCode::Config, "configuration"),
            SmallnessViolation { .. } => (ExitCode::Gate, "gate_violation"),
            OracleFailure { .. } | ContractionFailure { .. } | NonConvergence { .. } => {
                (ExitCode::Convergence, "convergence_failure")
            }
            GluingFailure { .. } => (ExitCode::Invariant, "gluing_failure"),
            Io(_) | Json(_) | Csv(_) => (ExitCode::Io, "io"),
        };
        CliError::new(code, kind, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new(ExitCode::Io, "io", e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::new(ExitCode::Io, "io", e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::new(ExitCode::Io, "io", e.to_string())
    }
}
