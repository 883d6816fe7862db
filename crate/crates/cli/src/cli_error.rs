//! Error-to-exit-code mapping: 0 ok, 2 configuration, 3 data, 4 numeric.

use torusmix::Error as CoreError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Config,
    Data,
    Numeric,
}

impl ExitKind {
    pub fn code(self) -> u8 {
        match self {
            ExitKind::Config => 2,
            ExitKind::Data => 3,
            ExitKind::Numeric => 4,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ExitKind,
    pub message: String,
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError {
            kind: ExitKind::Config,
            message: msg.into(),
        }
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError {
            kind: ExitKind::Data,
            message: msg.into(),
        }
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        CliError {
            kind: ExitKind::Numeric,
            message: msg.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let kind = match &e {
            CoreError::Config(_) | CoreError::Domain(_) => ExitKind::Config,
            CoreError::Dimension(_) | CoreError::Degenerate(_) => ExitKind::Data,
            CoreError::Constraint(_) => ExitKind::Config,
            CoreError::Numeric(_) => ExitKind::Numeric,
        };
        CliError {
            kind,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
