//! The two-branch audio/trajectory alignment classifier, its training loop,
//! and embedding analysis.

mod features;
mod network;
mod pca;
mod train;

pub use features::{assemble_features, audio_features, AudioFeatures, FeatureMode, FeatureSequence, NormStats, TRAJ_DIM};
pub use network::{bce_loss, sigmoid, AlignmentModel, Hyper, Params, CHECKPOINT_VERSION, PROB_CLAMP, TENSOR_NAMES};
pub use pca::{pca, Pca};
pub use train::{
    evaluate_accuracy, init_model, load_checkpoint, save_checkpoint, train, Dataset, EpochRecord, Sample, TrainReport,
};

use crate::dsp::CueParams;
use crate::{AudioClip, Result};

/// Audio-branch activations (`frames × hidden`) for a clip; no trajectory
/// input is involved.
pub fn extract_audio_embedding(model: &AlignmentModel, audio: &AudioClip, params: &CueParams) -> Result<Vec<Vec<f64>>> {
    model.embed(&audio_features(audio, model.feature_mode, params)?)
}
