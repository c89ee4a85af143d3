use serde::{Deserialize, Serialize};

use crate::dsp::{binaural_cues, hann, intensity_vector, log_mel, CueParams, MelParams, ENERGY_FLOOR};
use crate::{AudioClip, Error, Layout, Result, SourceTrajectory, Spectrogram};

/// Audio front end of the alignment model.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    /// Stereo: `itd_ms, ild_db, led`. FOA: `ix/e, iy/e, ln e`.
    #[default]
    Cues,
    /// Stereo only: stacked left and right log-mel frames.
    LogMel,
    /// The cue vector followed by the log-mel frame of the omnidirectional
    /// signal (FOA `W`, stereo mid channel).
    CuesMel,
}

impl FeatureMode {
    pub fn audio_dim(self, layout: Layout) -> Result<usize> {
        match (self, layout) {
            (FeatureMode::Cues, Layout::Stereo | Layout::Foa) => Ok(3),
            (FeatureMode::LogMel, Layout::Stereo) => Ok(2 * MelParams::default().n_mels),
            (FeatureMode::CuesMel, Layout::Stereo | Layout::Foa) => Ok(3 + MelParams::default().n_mels),
            _ => Err(Error::InvalidParams(format!("feature mode {self:?} does not support {layout:?} audio"))),
        }
    }
}

pub const TRAJ_DIM: usize = 2;

/// Per-frame audio features, row-major `frames × dim`, plus the frame energy
/// used to find active frames.
#[derive(Clone, Debug, PartialEq)]
pub struct AudioFeatures {
    pub frames: usize,
    pub dim: usize,
    pub values: Vec<f64>,
    pub energy: Vec<f64>,
}

impl AudioFeatures {
    pub fn frame(&self, t: usize) -> &[f64] {
        &self.values[t * self.dim..(t + 1) * self.dim]
    }

    /// Frames whose energy exceeds `rel` times the loudest frame.
    pub fn active_frames(&self, rel: f64) -> Vec<usize> {
        let max = self.energy.iter().cloned().fold(0.0, f64::max);
        (0..self.frames).filter(|&t| max > 0.0 && self.energy[t] > rel * max).collect()
    }
}

/// Model input: audio features and the trajectory proxy `(sinφ, cosφ)` on
/// the same frame grid. `azimuth_rad` keeps the raw trajectory for analysis.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSequence {
    pub audio: AudioFeatures,
    pub trajectory: Vec<f64>,
    pub azimuth_rad: Vec<f64>,
}

impl FeatureSequence {
    pub fn frames(&self) -> usize {
        self.audio.frames
    }

    pub fn traj_frame(&self, t: usize) -> &[f64] {
        &self.trajectory[t * TRAJ_DIM..(t + 1) * TRAJ_DIM]
    }
}

fn stereo_frame_energy(clip: &AudioClip, params: &CueParams) -> Vec<f64> {
    let n = params.stft.window_len;
    let w = hann(n);
    let frames = params.stft.frame_count(clip.len());
    (0..frames)
        .map(|t| {
            let start = t * params.stft.hop;
            (0..n)
                .map(|i| {
                    let (l, r) = (clip.left()[start + i] * w[i], clip.right()[start + i] * w[i]);
                    l * l + r * r
                })
                .sum()
        })
        .collect()
}

pub fn audio_features(audio: &AudioClip, mode: FeatureMode, params: &CueParams) -> Result<AudioFeatures> {
    let dim = mode.audio_dim(audio.layout())?;
    match (mode, audio.layout()) {
        (FeatureMode::Cues, Layout::Stereo) => {
            let cues = binaural_cues(audio, params)?;
            let mut values = Vec::with_capacity(cues.len() * dim);
            for t in 0..cues.len() {
                values.extend_from_slice(&[cues.itd_s[t] * 1000.0, cues.ild_db[t], cues.led[t]]);
            }
            Ok(AudioFeatures { frames: cues.len(), dim, values, energy: stereo_frame_energy(audio, params) })
        }
        (FeatureMode::Cues, Layout::Foa) => {
            let spec = Spectrogram::from_clip(audio, params.stft)?;
            let iv = intensity_vector(&spec)?;
            let mut values = Vec::with_capacity(iv.len() * dim);
            for t in 0..iv.len() {
                let e = iv.energy[t];
                let (ux, uy) = if e > 0.0 { (iv.ix[t] / e, iv.iy[t] / e) } else { (0.0, 0.0) };
                values.extend_from_slice(&[ux, uy, (e + ENERGY_FLOOR).ln()]);
            }
            Ok(AudioFeatures { frames: iv.len(), dim, values, energy: iv.energy })
        }
        (FeatureMode::LogMel, Layout::Stereo) => {
            let spec = Spectrogram::from_clip(audio, params.stft)?;
            let mel = log_mel(&spec, &MelParams::default())?;
            let mut values = Vec::with_capacity(mel.frames * dim);
            for t in 0..mel.frames {
                values.extend_from_slice(mel.frame(0, t));
                values.extend_from_slice(mel.frame(1, t));
            }
            Ok(AudioFeatures { frames: mel.frames, dim, values, energy: stereo_frame_energy(audio, params) })
        }
        (FeatureMode::CuesMel, layout) => {
            let cues = audio_features(audio, FeatureMode::Cues, params)?;
            let omni = match layout {
                Layout::Foa => AudioClip::mono(audio.channel(AudioClip::W).to_vec())?,
                _ => crate::transforms::downmix_to_mono(audio)?,
            };
            let mel = log_mel(&Spectrogram::from_clip(&omni, params.stft)?, &MelParams::default())?;
            let mut values = Vec::with_capacity(cues.frames * dim);
            for t in 0..cues.frames {
                values.extend_from_slice(cues.frame(t));
                values.extend_from_slice(mel.frame(0, t));
            }
            Ok(AudioFeatures { frames: cues.frames, dim, values, energy: cues.energy })
        }
        _ => unreachable!("rejected by audio_dim"),
    }
}

/// Frame-aligned model input for a trajectory and clip covering the same
/// interval. Values are raw; the model applies its stored normalization.
pub fn assemble_features(
    traj: &SourceTrajectory,
    audio: &AudioClip,
    mode: FeatureMode,
    params: &CueParams,
) -> Result<FeatureSequence> {
    traj.check_covers(audio.len(), audio.sample_rate_hz())?;
    let audio_feats = audio_features(audio, mode, params)?;
    let centers = params.stft.frame_centers_s(audio_feats.frames, audio.sample_rate_hz());
    let azimuth_rad = traj.resample(&centers);
    let mut trajectory = Vec::with_capacity(azimuth_rad.len() * TRAJ_DIM);
    for a in &azimuth_rad {
        let (s, c) = a.sin_cos();
        trajectory.extend_from_slice(&[s, c]);
    }
    Ok(FeatureSequence { audio: audio_feats, trajectory, azimuth_rad })
}

/// Per-dimension audio feature mean and standard deviation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl NormStats {
    pub fn identity(dim: usize) -> Self {
        Self { mean: vec![0.0; dim], std: vec![1.0; dim] }
    }

    /// Statistics over every frame of `seqs`; near-constant dimensions keep
    /// unit scale.
    pub fn fit<'a>(seqs: impl IntoIterator<Item = &'a AudioFeatures>) -> Result<Self> {
        let mut dim = None;
        let (mut sum, mut sq, mut n) = (Vec::new(), Vec::new(), 0usize);
        for f in seqs {
            let d = *dim.get_or_insert_with(|| {
                sum = vec![0.0; f.dim];
                sq = vec![0.0; f.dim];
                f.dim
            });
            if f.dim != d {
                return Err(Error::ShapeMismatch(format!("feature dims {d} and {}", f.dim)));
            }
            for t in 0..f.frames {
                for (k, v) in f.frame(t).iter().enumerate() {
                    sum[k] += v;
                    sq[k] += v * v;
                }
            }
            n += f.frames;
        }
        if n == 0 {
            return Err(Error::InvalidParams("no frames to fit normalization".into()));
        }
        let mean: Vec<f64> = sum.iter().map(|s| s / n as f64).collect();
        let std = sq
            .iter()
            .zip(&mean)
            .map(|(q, m)| {
                let s = (q / n as f64 - m * m).max(0.0).sqrt();
                if s > 1e-8 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { mean, std })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        for k in 0..x.len() {
            out[k] = (x[k] - self.mean[k]) / self.std[k];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{render_binaural, sample_source_signal, SceneParams, SourceKind};
    use crate::transforms::flip_stereo;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scene(az_deg: f64) -> (SourceTrajectory, AudioClip) {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = sample_source_signal(&mut rng, SourceKind::WhiteNoiseBursts, 3.0);
        let t = SourceTrajectory::constant(az_deg.to_radians(), 3.0);
        let clip = render_binaural(&s.samples, &t, &SceneParams::default(), &mut rng).unwrap();
        (t, clip)
    }

    #[test]
    fn aligned_scene_signs_agree() {
        let (t, clip) = scene(45.0);
        let f = assemble_features(&t, &clip, FeatureMode::Cues, &CueParams::default()).unwrap();
        let mean_led: f64 = (0..f.frames()).map(|i| f.audio.frame(i)[2]).sum::<f64>() / f.frames() as f64;
        let mean_sin: f64 = (0..f.frames()).map(|i| f.traj_frame(i)[0]).sum::<f64>() / f.frames() as f64;
        assert!(mean_led > 0.0 && mean_sin > 0.0);
    }

    #[test]
    fn flip_negates_audio_keeps_trajectory() {
        let (t, clip) = scene(30.0);
        let p = CueParams::default();
        let a = assemble_features(&t, &clip, FeatureMode::Cues, &p).unwrap();
        let b = assemble_features(&t, &flip_stereo(&clip).unwrap(), FeatureMode::Cues, &p).unwrap();
        for (x, y) in a.audio.values.iter().zip(&b.audio.values) {
            assert_eq!(*x, -*y);
        }
        assert_eq!(a.trajectory, b.trajectory);
        assert_eq!(a.audio.energy, b.audio.energy);
    }

    #[test]
    fn zero_trajectory_features() {
        let (_, clip) = scene(0.0);
        let t = SourceTrajectory::constant(0.0, 3.0);
        let f = assemble_features(&t, &clip, FeatureMode::Cues, &CueParams::default()).unwrap();
        assert_eq!(f.frames(), 297);
        for i in 0..f.frames() {
            assert_eq!(f.traj_frame(i), &[0.0, 1.0]);
        }
    }

    #[test]
    fn coverage_mismatch() {
        let (_, clip) = scene(0.0);
        let t = SourceTrajectory::constant(0.0, 2.0);
        let r = assemble_features(&t, &clip, FeatureMode::Cues, &CueParams::default());
        assert!(matches!(r, Err(Error::Coverage { .. })));
    }

    #[test]
    fn log_mel_mode_is_stereo_only() {
        let (t, clip) = scene(20.0);
        let f = assemble_features(&t, &clip, FeatureMode::LogMel, &CueParams::default()).unwrap();
        assert_eq!(f.audio.dim, 128);
        assert!(FeatureMode::LogMel.audio_dim(Layout::Foa).is_err());
    }

    #[test]
    fn norm_stats() {
        let f = AudioFeatures { frames: 4, dim: 2, values: vec![1.0, 5.0, 3.0, 5.0, 1.0, 5.0, 3.0, 5.0], energy: vec![1.0; 4] };
        let s = NormStats::fit([&f]).unwrap();
        assert_eq!(s.mean, vec![2.0, 5.0]);
        assert_eq!(s.std, vec![1.0, 1.0]);
        let mut out = [0.0; 2];
        s.apply(&[3.0, 5.0], &mut out);
        assert_eq!(out, [1.0, 0.0]);
    }
}
