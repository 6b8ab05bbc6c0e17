use std::path::PathBuf;

use lowlat_core::Error as CoreError;
use thiserror::Error;

use crate::report::Report;

/// Process exit codes. Stable; documented in the README.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum ExitCode {
    Ok = 0,
    Internal = 1,
    /// Invalid parameters or command-line usage (clap uses 2 as well).
    Params = 2,
    Io = 3,
    Shape = 4,
    VerificationFailed = 5,
    UnsupportedWav = 6,
    SampleRateMismatch = 7,
    MissingAudiogram = 8,
    DegenerateWindow = 9,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{path}: unsupported WAV encoding ({detail})")]
    UnsupportedWav { path: PathBuf, detail: String },

    #[error("{path}: sample rate {found} Hz does not match {expected} Hz (pass --resample to convert)")]
    SampleRateMismatch { path: PathBuf, found: u32, expected: u32 },

    #[error("audiogram file {0} not found")]
    MissingAudiogram(PathBuf),

    #[error("{0}")]
    Params(String),

    #[error("{0}")]
    Shape(String),

    /// A check ran to completion and failed; the report is still printed.
    #[error("verification failed")]
    Verification(Report),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Core(e) => match e {
                CoreError::InvalidParams(_) => ExitCode::Params,
                CoreError::DegenerateWindow { .. } => ExitCode::DegenerateWindow,
                CoreError::Shape(_) => ExitCode::Shape,
                CoreError::UndefinedSnr => ExitCode::Shape,
                CoreError::Sequencing { .. } | CoreError::State(_) => ExitCode::Internal,
            },
            CliError::Io { .. } => ExitCode::Io,
            CliError::UnsupportedWav { .. } => ExitCode::UnsupportedWav,
            CliError::SampleRateMismatch { .. } => ExitCode::SampleRateMismatch,
            CliError::MissingAudiogram(_) => ExitCode::MissingAudiogram,
            CliError::Params(_) => ExitCode::Params,
            CliError::Shape(_) => ExitCode::Shape,
            CliError::Verification(_) => ExitCode::VerificationFailed,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
