use thiserror::Error;

/// Failure classes, each with its own process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or malformed input files, bad flag values.
    #[error("input error: {0}")]
    Input(String),
    /// The inputs were valid but the requested computation cannot proceed.
    #[error("computation error: {0}")]
    Compute(String),
    /// Results could not be written.
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub const EXIT_INPUT: i32 = 2;
    pub const EXIT_COMPUTE: i32 = 3;
    pub const EXIT_OUTPUT: i32 = 4;

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => Self::EXIT_INPUT,
            CliError::Compute(_) => Self::EXIT_COMPUTE,
            CliError::Output(_) => Self::EXIT_OUTPUT,
        }
    }

    /// Error pinned to a location in an input file. Lines are 1-based as
    /// shown by editors; columns are 1-based CSV fields.
    pub fn at(source: &str, line: Option<u64>, column: Option<usize>, msg: impl std::fmt::Display) -> Self {
        let loc = match (line, column) {
            (Some(l), Some(c)) => format!("{source}:{l}:{c}"),
            (Some(l), None) => format!("{source}:{l}"),
            _ => source.to_string(),
        };
        CliError::Input(format!("{loc}: {msg}"))
    }
}

/// Core errors caused by the data itself count as input errors; everything
/// else is a computation error.
impl From<permwalk::Error> for CliError {
    fn from(e: permwalk::Error) -> Self {
        use permwalk::Error as E;
        match e {
            E::LengthMismatch(..) | E::GroupTooSmall { .. } | E::NonFinite { .. } | E::ShapeMismatch { .. } => {
                CliError::Input(e.to_string())
            }
            E::InvalidPlan(_) | E::InvalidAlpha(_) => CliError::Input(e.to_string()),
            _ => CliError::Compute(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
