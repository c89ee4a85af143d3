//! Audio and trajectory containers, WAV I/O, and dataset manifests.

mod clip;
mod label;
mod manifest;
mod trajectory;
mod wav;

pub use clip::{AudioClip, Layout, SAMPLE_RATE_HZ};
pub use label::{AlignmentLabel, Misalignment};
pub use manifest::{load_manifest, save_manifest, DatasetManifest, ManifestEntry, Split, MANIFEST_VERSION};
pub use trajectory::{
    load_trajectory, save_trajectory, trajectory_grid, wrap_pi, AzimuthRange, SourceTrajectory, TRAJECTORY_RATE_HZ,
};
pub use wav::{read_wav, read_wav_layout, write_wav, WavEncoding};
