//! Time-frequency analysis and spatial-cue extraction.
//!
//! Sign convention shared by every cue: positive means the source sits to
//! the listener's right (right channel louder, right ear leading).

mod cues;
mod foa;
mod gcc;
mod mel;
mod stft;

pub use cues::{binaural_cues, ild_db, led, BinauralCues, CueParams, CueSequence, IntensityCues, ENERGY_FLOOR};
pub use foa::{foa_cross_features, intensity_vector, FoaCrossFeatures};
pub use gcc::{gcc_phat, GccPhat, GccResult, DEFAULT_MAX_LAG};
pub use mel::{hz_to_mel, log_mel, mel_filterbank, mel_to_hz, MelParams, MelSpectrogram, LOG_FLOOR};
pub use stft::{hann, istft, stft, Spectrogram, Stft, StftParams};
