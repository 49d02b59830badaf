use std::path::PathBuf;

use thiserror::Error;

/// Broad category of a failure, used by front-ends to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad arguments or configuration.
    Validation,
    /// Input data that cannot be processed.
    Data,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: line {line}: {msg}")]
    Parse { path: PathBuf, line: u64, msg: String },

    #[error("{path}: empty track")]
    EmptyTrack { path: PathBuf },

    #[error("catalog: {0}")]
    Catalog(String),

    #[error("video {video}: frame {frame}: active tool set {{{tools}}} is not in the catalog")]
    UnknownCombination { video: String, frame: usize, tools: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no input tracks")]
    NoTracks,

    #[error("video {0}: no tool-in-contact run found")]
    NoActiveRun(String),

    #[error("graph: {0}")]
    Graph(String),

    #[error("class {0} has no outgoing transition and is not final")]
    DeadEnd(String),

    #[error("walk did not terminate within {0} steps")]
    WalkDidNotTerminate(usize),

    #[error("no segment covers transition {from} -> {to}")]
    UncoveredTransition { from: String, to: String },

    #[error("no {kind} segment for class {class}")]
    MissingEndpoint { kind: &'static str, class: String },

    #[error("unknown segment id {0}")]
    UnknownSegment(String),

    #[error("frame {index} of video {video} cannot be resolved: {reason}")]
    MissingFrame { video: String, index: usize, reason: String },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("empty confusion matrix")]
    EmptyMatrix,

    #[error("schedule covers zero frames")]
    EmptySchedule,

    #[error("interpolator: {0}")]
    Interpolator(String),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidArgument(_) | Error::Catalog(_) => ErrorKind::Validation,
            _ => ErrorKind::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, msg: impl ToString) -> Self {
        Error::Format { path: path.into(), msg: msg.to_string() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
