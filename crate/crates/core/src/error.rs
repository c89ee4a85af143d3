use std::path::PathBuf;

use thiserror::Error;

use crate::audio::{Layout, Split};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("unsupported encoding: {0}")]
    UnsupportedEncoding(String),

    #[error("unsupported channel count: {0}")]
    UnsupportedChannelCount(usize),

    #[error("unsupported sample rate: {0} Hz (expected {expected} Hz)", expected = crate::SAMPLE_RATE_HZ)]
    UnsupportedSampleRate(u32),

    #[error("truncated file: {0}")]
    Truncated(String),

    #[error("wav error: {0}")]
    Wav(String),

    #[error("expected {expected:?} layout, found {found:?}")]
    Layout { expected: Layout, found: Layout },

    #[error("invalid audio clip: {0}")]
    InvalidClip(String),

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("input too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("trajectory ends at {traj_end_s:.4} s but clip runs to {clip_end_s:.4} s")]
    Coverage { traj_end_s: f64, clip_end_s: f64 },

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("duplicate id: {0}")]
    DuplicateId(String),

    #[error("missing file referenced by manifest: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("empty split: {0:?}")]
    EmptySplit(Split),

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Diverged { epoch: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("model is untrained")]
    Untrained,

    #[error("missing class {0} in support set")]
    MissingClass(usize),

    #[error("format version mismatch: expected {expected}, found {found}")]
    Version { expected: u32, found: u32 },
}

impl From<hound::Error> for Error {
    fn from(e: hound::Error) -> Self {
        match e {
            hound::Error::IoError(io) if io.kind() == std::io::ErrorKind::UnexpectedEof => {
                Error::Truncated(io.to_string())
            }
            hound::Error::IoError(io) => Error::Io(io),
            hound::Error::Unsupported => Error::UnsupportedEncoding("unsupported wav feature".into()),
            hound::Error::FormatError(msg) => Error::Wav(msg.to_string()),
            other => Error::Wav(other.to_string()),
        }
    }
}
