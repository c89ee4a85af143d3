//! Downstream evaluations on ground-truthed scenes: direction of arrival,
//! one-shot localization, rotation alignment, upmixing and separation.

mod align;
mod doa;
mod oneshot;
mod separation;
mod upmix;

pub use align::{rotation_alignment, AlignOptions, AlignmentEstimate, GridScore, DEFAULT_CONSENSUS_ROTATIONS, WINDOW_S};
pub use doa::{doa_from_gcc, doa_from_intensity, invert_woodworth, DoaEstimate};
pub use oneshot::{class_azimuth_deg, one_shot_doa, pooled_embedding, OneShotResult, ONE_SHOT_CLASSES};
pub use separation::{ideal_mask, separate_spatial, SeparationResult, ILD_SIGMA_DB, PHASE_WEIGHT};
pub use upmix::{upmix_learned, upmix_oracle, LearnedUpmix, UpmixResult, UpmixTrainConfig};
