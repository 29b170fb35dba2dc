use lowpass_gsp::GspError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, missing config sections or unusable paths.
    #[error("{message}")]
    Usage { message: String },

    /// Config failed to parse or validate; `pointer` locates the offending field.
    #[error("{message} at {pointer}")]
    Config { pointer: String, message: String },

    #[error(transparent)]
    Gsp(#[from] GspError),
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage {
            message: message.into(),
        }
    }

    pub fn config(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            pointer: pointer.into(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage { .. } | CliError::Config { .. } => 1,
            CliError::Gsp(e) => match e {
                GspError::Parameter(_) | GspError::Io(_) => 1,
                GspError::Instability(_) | GspError::Singularity(_) | GspError::Numerical(_) => 3,
                _ => 2,
            },
        }
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage { .. } => "usage",
            CliError::Config { .. } => "config",
            CliError::Gsp(e) => match e {
                GspError::Validation(_) => "validation",
                GspError::Dimension { .. } => "dimension",
                GspError::Parameter(_) => "parameter",
                GspError::Instability(_) => "instability",
                GspError::Singularity(_) => "singularity",
                GspError::Numerical(_) => "numerical",
                GspError::RankDeficient { .. } => "rank_deficient",
                GspError::Underdetermined(_) => "underdetermined",
                GspError::InsufficientCalibration { .. } => "insufficient_calibration",
                GspError::Io(_) => "io",
                GspError::Csv(_) => "csv",
                GspError::Parse(_) => "parse",
            },
        }
    }

    /// One-line JSON record for stderr.
    pub fn record(&self) -> String {
        let mut rec = serde_json::json!({
            "status": "error",
            "exit_code": self.exit_code(),
            "kind": self.kind(),
            "message": self.to_string(),
        });
        if let CliError::Config { pointer, .. } = self {
            rec["pointer"] = serde_json::Value::String(pointer.clone());
        }
        rec.to_string()
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
