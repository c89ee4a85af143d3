use serde::{Deserialize, Serialize};

use crate::dsp::CueParams;
use crate::metrics::circular_error_deg;
use crate::model::{assemble_features, AudioFeatures, FeatureMode, FeatureSequence, TRAJ_DIM};
use crate::{AlignmentModel, AudioClip, Error, Layout, Result, SourceTrajectory};

/// Scoring window length, matching the training clips.
pub const WINDOW_S: f64 = 3.0;

/// Shared rotations applied to both audio and trajectory when scoring.
pub const DEFAULT_CONSENSUS_ROTATIONS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridScore {
    pub theta_deg: f64,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignmentEstimate {
    pub theta_hat_deg: f64,
    /// Best score minus the median score over the grid.
    pub confidence: f64,
    pub windows: usize,
    pub scores: Vec<GridScore>,
    pub error_deg: Option<f64>,
}

/// Splits a clip-length feature sequence into consecutive windows of the
/// frames a standalone `WINDOW_S` clip would produce.
fn windows(seq: &FeatureSequence, params: &CueParams, n_samples: usize, sr: u32) -> Vec<FeatureSequence> {
    let win = (WINDOW_S * sr as f64).round() as usize;
    if n_samples < 2 * win {
        return vec![seq.clone()];
    }
    let per_window = params.stft.frame_count(win);
    let stride = win / params.stft.hop;
    let count = n_samples / win;
    (0..count)
        .map(|w| {
            let r = w * stride..w * stride + per_window;
            let d = seq.audio.dim;
            FeatureSequence {
                audio: AudioFeatures {
                    frames: per_window,
                    dim: d,
                    values: seq.audio.values[r.start * d..r.end * d].to_vec(),
                    energy: seq.audio.energy[r.clone()].to_vec(),
                },
                trajectory: seq.trajectory[r.start * TRAJ_DIM..r.end * TRAJ_DIM].to_vec(),
                azimuth_rad: seq.azimuth_rad[r].to_vec(),
            }
        })
        .collect()
}

/// Rotates cue features as `rotate_foa` would rotate the audio: the
/// intensity direction turns by `theta`, level and spectrum are unchanged.
fn rotate_intensity(seq: &mut FeatureSequence, theta_rad: f64) {
    let (s, c) = theta_rad.sin_cos();
    let d = seq.audio.dim;
    for t in 0..seq.audio.frames {
        let f = &mut seq.audio.values[t * d..t * d + 2];
        let (x, y) = (f[0], f[1]);
        f[0] = x * c - y * s;
        f[1] = x * s + y * c;
    }
}

fn rotate_traj_features(seq: &mut FeatureSequence, theta_rad: f64) {
    for (k, a) in seq.azimuth_rad.iter_mut().enumerate() {
        *a += theta_rad;
        let (s, c) = a.sin_cos();
        seq.trajectory[k * TRAJ_DIM] = s;
        seq.trajectory[k * TRAJ_DIM + 1] = c;
    }
}

/// Options for [`rotation_alignment`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlignOptions {
    pub grid_deg: f64,
    /// Number of evenly spaced shared rotations of audio and trajectory each
    /// candidate is scored under; 1 scores the input as given.
    pub consensus_rotations: usize,
    pub cues: CueParams,
}

impl Default for AlignOptions {
    fn default() -> Self {
        Self { grid_deg: 10.0, consensus_rotations: DEFAULT_CONSENSUS_ROTATIONS, cues: CueParams::default() }
    }
}

/// Recovers a global misrotation of FOA audio relative to its trajectory.
///
/// Each candidate θ on a `grid_deg` grid de-rotates the audio by −θ and is
/// scored by the model's mean log-odds over the clip's 3 s windows and over
/// shared rotations of audio and trajectory (which leave the alignment
/// unchanged and average out the model's direction bias). The highest
/// score wins, ties going to the smaller θ.
pub fn rotation_alignment(
    clip: &AudioClip,
    traj: &SourceTrajectory,
    model: &AlignmentModel,
    opts: &AlignOptions,
    truth_deg: Option<f64>,
) -> Result<AlignmentEstimate> {
    let grid_deg = opts.grid_deg;
    let params = &opts.cues;
    if !model.trained {
        return Err(Error::Untrained);
    }
    clip.layout().expect(Layout::Foa)?;
    model.layout.expect(Layout::Foa)?;
    if !matches!(model.feature_mode, FeatureMode::Cues | FeatureMode::CuesMel) {
        return Err(Error::InvalidParams("rotation alignment needs a cue-feature model".into()));
    }
    if !(grid_deg > 0.0 && grid_deg <= 180.0) {
        return Err(Error::InvalidParams("grid_deg must be in (0, 180]".into()));
    }
    if opts.consensus_rotations == 0 {
        return Err(Error::InvalidParams("consensus_rotations must be at least 1".into()));
    }
    let base = assemble_features(traj, clip, model.feature_mode, params)?;
    let wins = windows(&base, params, clip.len(), clip.sample_rate_hz());
    let steps = (360.0 / grid_deg).round() as usize;
    let mut scores = Vec::with_capacity(steps);
    for i in 0..steps {
        let theta_deg = i as f64 * grid_deg;
        let mut total = 0.0;
        for k in 0..opts.consensus_rotations {
            let alpha = std::f64::consts::TAU * k as f64 / opts.consensus_rotations as f64;
            for w in &wins {
                let mut seq = w.clone();
                rotate_intensity(&mut seq, alpha - theta_deg.to_radians());
                rotate_traj_features(&mut seq, alpha);
                total += model.logit(&seq)?;
            }
        }
        scores.push(GridScore { theta_deg, score: total / (wins.len() * opts.consensus_rotations) as f64 });
    }
    let n_windows = wins.len();
    let mut best = scores[0];
    for s in &scores[1..] {
        if s.score > best.score {
            best = *s;
        }
    }
    let mut sorted: Vec<f64> = scores.iter().map(|s| s.score).collect();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 { sorted[m] } else { 0.5 * (sorted[m - 1] + sorted[m]) };
    Ok(AlignmentEstimate {
        theta_hat_deg: best.theta_deg,
        confidence: best.score - median,
        windows: n_windows,
        scores,
        error_deg: truth_deg.map(|t| circular_error_deg(best.theta_deg, t)),
    })
}
