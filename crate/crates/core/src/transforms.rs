//! Label-generating audio transforms and label-preserving augmentations.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::audio::wrap_pi;
use crate::{AlignmentLabel, AudioClip, Error, Layout, Result, SourceTrajectory};

/// Rotation about the vertical axis, normalized to `[0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RotationAngle(f64);

impl RotationAngle {
    pub fn new(theta_rad: f64) -> Self {
        let t = theta_rad.rem_euclid(TAU);
        Self(if t >= TAU { 0.0 } else { t })
    }

    pub fn from_degrees(deg: f64) -> Self {
        Self::new(deg.to_radians())
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }
}

/// Swaps left and right.
pub fn flip_stereo(clip: &AudioClip) -> Result<AudioClip> {
    clip.layout().expect(Layout::Stereo)?;
    let channels = vec![clip.right().to_vec(), clip.left().to_vec()];
    Ok(AudioClip::from_parts_unchecked(Layout::Stereo, channels, clip.sample_rate_hz()))
}

/// Rotates the sound field about the z-axis:
/// `(w, x·sinθ + y·cosθ, z, x·cosθ − y·sinθ)`.
///
/// A plane wave encoded at azimuth φ comes out at φ + θ. W and Z are copied
/// untouched.
pub fn rotate_foa(clip: &AudioClip, theta: RotationAngle) -> Result<AudioClip> {
    clip.layout().expect(Layout::Foa)?;
    let (s, c) = theta.radians().sin_cos();
    let y = clip.channel(AudioClip::Y);
    let x = clip.channel(AudioClip::X);
    let new_y = x.iter().zip(y).map(|(x, y)| x * s + y * c).collect();
    let new_x = x.iter().zip(y).map(|(x, y)| x * c - y * s).collect();
    let channels = vec![clip.channel(AudioClip::W).to_vec(), new_y, clip.channel(AudioClip::Z).to_vec(), new_x];
    Ok(AudioClip::from_parts_unchecked(Layout::Foa, channels, clip.sample_rate_hz()))
}

/// Keeps W and silences the three directional channels.
pub fn zero_directional(clip: &AudioClip) -> Result<AudioClip> {
    clip.layout().expect(Layout::Foa)?;
    let n = clip.len();
    let channels = vec![clip.channel(AudioClip::W).to_vec(), vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    Ok(AudioClip::from_parts_unchecked(Layout::Foa, channels, clip.sample_rate_hz()))
}

/// `(l + r) / 2` per sample.
pub fn downmix_to_mono(clip: &AudioClip) -> Result<AudioClip> {
    clip.layout().expect(Layout::Stereo)?;
    let mono = clip.left().iter().zip(clip.right()).map(|(l, r)| (l + r) / 2.0).collect();
    Ok(AudioClip::from_parts_unchecked(Layout::Mono, vec![mono], clip.sample_rate_hz()))
}

/// Sample-wise sum. Not renormalized; a peak above 1 is logged.
pub fn mix_clips(a: &AudioClip, b: &AudioClip) -> Result<AudioClip> {
    if a.layout() != b.layout() || a.len() != b.len() || a.sample_rate_hz() != b.sample_rate_hz() {
        return Err(Error::ShapeMismatch(format!(
            "cannot mix {:?}/{} samples/{} Hz with {:?}/{} samples/{} Hz",
            a.layout(),
            a.len(),
            a.sample_rate_hz(),
            b.layout(),
            b.len(),
            b.sample_rate_hz()
        )));
    }
    let channels: Vec<Vec<f64>> = a
        .channels()
        .iter()
        .zip(b.channels())
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q).collect())
        .collect();
    let mixed = AudioClip::from_parts_unchecked(a.layout(), channels, a.sample_rate_hz());
    let peak = mixed.peak();
    if peak > 1.0 {
        log::warn!("mixture peak {peak:.3} exceeds full scale");
    }
    Ok(mixed)
}

/// Reflects the track left-right: φ → −φ.
pub fn mirror_trajectory(traj: &SourceTrajectory) -> SourceTrajectory {
    SourceTrajectory {
        times_s: traj.times_s.clone(),
        azimuth_rad: traj
            .azimuth_rad
            .iter()
            .map(|&a| match -a {
                m if m >= PI => m - TAU,
                m => m + 0.0,
            })
            .collect(),
        elevation_rad: traj.elevation_rad.clone(),
    }
}

/// Rotates the track about the vertical axis: φ → φ + θ, wrapped to `[-π, π)`.
pub fn rotate_trajectory(traj: &SourceTrajectory, theta: RotationAngle) -> SourceTrajectory {
    SourceTrajectory {
        times_s: traj.times_s.clone(),
        azimuth_rad: traj.azimuth_rad.iter().map(|&a| wrap_pi(a + theta.radians())).collect(),
        elevation_rad: traj.elevation_rad.clone(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PretextMode {
    /// Stereo scenes; negatives swap the channels.
    Flip,
    /// FOA scenes; negatives rotate the audio about the z-axis.
    Rotation,
}

impl PretextMode {
    pub fn layout(self) -> Layout {
        match self {
            PretextMode::Flip => Layout::Stereo,
            PretextMode::Rotation => Layout::Foa,
        }
    }
}

/// How negatives and joint augmentations are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NegativeConfig {
    pub negative_prob: f64,
    /// Range of the rotation applied to FOA negatives.
    pub theta_min_rad: f64,
    pub theta_max_rad: f64,
    /// Probability of the joint mirror (stereo) or joint rotation (FOA).
    pub joint_augment_prob: f64,
}

impl Default for NegativeConfig {
    fn default() -> Self {
        Self { negative_prob: 0.5, theta_min_rad: 0.95 * PI, theta_max_rad: 1.05 * PI, joint_augment_prob: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingExample {
    pub trajectory: SourceTrajectory,
    pub audio: AudioClip,
    pub label: AlignmentLabel,
}

/// Turns an aligned scene into a pretext example.
///
/// The joint augmentation is applied first (to audio and track together),
/// then with probability `negative_prob` the audio alone is flipped or
/// rotated and the label becomes misaligned.
pub fn make_training_example<R: Rng + ?Sized>(
    trajectory: &SourceTrajectory,
    audio: &AudioClip,
    mode: PretextMode,
    cfg: &NegativeConfig,
    rng: &mut R,
) -> Result<TrainingExample> {
    audio.layout().expect(mode.layout())?;
    let negative = rng.random_bool(cfg.negative_prob);
    let augment = rng.random_bool(cfg.joint_augment_prob);

    let (mut trajectory, mut audio) = (trajectory.clone(), audio.clone());
    match mode {
        PretextMode::Flip => {
            if augment {
                trajectory = mirror_trajectory(&trajectory);
                audio = flip_stereo(&audio)?;
            }
            let label = if negative {
                audio = flip_stereo(&audio)?;
                AlignmentLabel::FLIPPED
            } else {
                AlignmentLabel::ALIGNED
            };
            Ok(TrainingExample { trajectory, audio, label })
        }
        PretextMode::Rotation => {
            if augment {
                let alpha = RotationAngle::new(rng.random_range(0.0..TAU));
                trajectory = rotate_trajectory(&trajectory, alpha);
                audio = rotate_foa(&audio, alpha)?;
            }
            let label = if negative {
                let theta = if cfg.theta_max_rad > cfg.theta_min_rad {
                    rng.random_range(cfg.theta_min_rad..cfg.theta_max_rad)
                } else {
                    cfg.theta_min_rad
                };
                audio = rotate_foa(&audio, RotationAngle::new(theta))?;
                AlignmentLabel::rotated(theta)
            } else {
                AlignmentLabel::ALIGNED
            };
            Ok(TrainingExample { trajectory, audio, label })
        }
    }
}
