//! Spatial audio-visual alignment on synthetic binaural and first-order
//! ambisonic scenes.
//!
//! A scene is a source azimuth track paired with the audio it produces. The
//! pretext task asks whether the two agree: stereo negatives swap the left and
//! right channels, ambisonic negatives rotate the sound field about the
//! vertical axis by roughly half a turn. Everything downstream of the trained
//! classifier (embedding analysis, one-shot direction of arrival, rotation
//! recovery, upmixing, separation) is evaluated against exact ground truth.

pub mod audio;
pub mod downstream;
pub mod dsp;
mod error;
pub mod metrics;
pub mod model;
pub mod synth;
pub mod transforms;

pub use audio::{
    AlignmentLabel, AudioClip, DatasetManifest, Layout, ManifestEntry, Misalignment,
    SourceTrajectory, Split, SAMPLE_RATE_HZ,
};
pub use dsp::{CueSequence, MelSpectrogram, Spectrogram, StftParams};
pub use transforms::{PretextMode, RotationAngle};
pub use error::{Error, Result};
pub use model::{AlignmentModel, FeatureMode, FeatureSequence, Hyper, TrainReport};


