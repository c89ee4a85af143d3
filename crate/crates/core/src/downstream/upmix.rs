use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::metrics::{l1_spec, L1Mode};
use crate::synth::SceneParams;
use crate::{AudioClip, Error, Layout, Result, SourceTrajectory, Spectrogram, StftParams};

#[derive(Clone, Debug, PartialEq)]
pub struct UpmixResult {
    pub predicted: Spectrogram,
    pub l1_complex: f64,
    /// The same metric for duplicating the mono signal into both channels.
    pub baseline_l1: f64,
}

/// Mid `M = (L + R)/2` and half-difference `S = (L − R)/2` spectra.
fn mid_side(target: &Spectrogram) -> (Vec<Complex64>, Vec<Complex64>) {
    let (l, r) = (target.channel(0), target.channel(1));
    let m = l.iter().zip(r).map(|(a, b)| (a + b) * 0.5).collect();
    let s = l.iter().zip(r).map(|(a, b)| (a - b) * 0.5).collect();
    (m, s)
}

fn stereo_spec(target: &Spectrogram, left: Vec<Complex64>, right: Vec<Complex64>) -> Result<Spectrogram> {
    Spectrogram::from_parts(Layout::Stereo, vec![left, right], target.params(), target.sample_rate_hz(), target.n_samples())
}

fn check_pair(mono: &AudioClip, target: &AudioClip, traj: &SourceTrajectory) -> Result<()> {
    mono.layout().expect(Layout::Mono)?;
    target.layout().expect(Layout::Stereo)?;
    if mono.len() != target.len() {
        return Err(Error::ShapeMismatch(format!("mono has {} samples, target {}", mono.len(), target.len())));
    }
    traj.check_covers(mono.len(), mono.sample_rate_hz())
}

fn score(predicted: Spectrogram, mono: &Spectrogram, target: &Spectrogram) -> Result<UpmixResult> {
    let m = mono.channel(0).to_vec();
    let baseline = stereo_spec(target, m.clone(), m)?;
    Ok(UpmixResult {
        l1_complex: l1_spec(&predicted, target, L1Mode::Complex)?,
        baseline_l1: l1_spec(&baseline, target, L1Mode::Complex)?,
        predicted,
    })
}

/// Keeps the oracle's inverse finite if the mid response ever vanishes.
const ORACLE_EPS: f64 = 1e-12;

/// Frequency response of reading a signal at `n + shift` with linear
/// interpolation between neighbouring samples, as the renderer does.
fn shift_response(shift: f64, omega: f64) -> Complex64 {
    let k = shift.floor();
    let frac = shift - k;
    Complex64::from_polar(1.0, omega * k) * (Complex64::new(1.0 - frac, 0.0) + Complex64::from_polar(frac, omega))
}

/// Re-renders the stereo scene from the mono mix using the renderer's own
/// gain and delay model. Per frame the ears respond with `H_l`, `H_r` and the
/// downmix with `H_m = (H_l + H_r)/2`, so each ear is estimated as
/// `M·H/H_m` at the frame's azimuth.
pub fn upmix_oracle(
    mono: &AudioClip,
    traj: &SourceTrajectory,
    scene: &SceneParams,
    target: &AudioClip,
    stft: StftParams,
) -> Result<UpmixResult> {
    check_pair(mono, target, traj)?;
    let mono_spec = Spectrogram::from_clip(mono, stft)?;
    let target_spec = Spectrogram::from_clip(target, stft)?;
    let (frames, bins) = (mono_spec.frames(), mono_spec.bins());
    let sr = mono.sample_rate_hz() as f64;
    let azimuth = traj.resample(&mono_spec.frame_centers_s());
    let m = mono_spec.channel(0);
    let mut left = Vec::with_capacity(m.len());
    let mut right = Vec::with_capacity(m.len());
    for t in 0..frames {
        let phi = azimuth[t].clamp(-FRAC_PI_2, FRAC_PI_2);
        let half_delay = if scene.itd_enabled { scene.woodworth_itd_s(phi) * sr / 2.0 } else { 0.0 };
        let (gl, gr) = scene.ild_gains(phi);
        for f in 0..bins {
            let omega = TAU * f as f64 / stft.window_len as f64;
            let hl = shift_response(-half_delay, omega) * gl;
            let hr = shift_response(half_delay, omega) * gr;
            let hm = (hl + hr) * 0.5;
            let inv = hm.conj() / (hm.norm_sqr() + ORACLE_EPS);
            let x = m[t * bins + f];
            left.push(x * hl * inv);
            right.push(x * hr * inv);
        }
    }
    score(stereo_spec(&target_spec, left, right)?, &mono_spec, &target_spec)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UpmixTrainConfig {
    pub lr: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub seed: u64,
    pub stft: StftParams,
}

impl Default for UpmixTrainConfig {
    fn default() -> Self {
        Self { lr: 0.05, momentum: 0.9, epochs: 20, seed: 0, stft: StftParams::default() }
    }
}

/// Frequency-independent difference mask `m[t] = tanh(w·(sinφ, cosφ) + b)`;
/// the prediction is `L̂ = M + m·M`, `R̂ = M − m·M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnedUpmix {
    pub w: [f64; 2],
    pub b: f64,
    pub stft: StftParams,
    /// Mean training loss after each epoch.
    pub history: Vec<f64>,
}

impl LearnedUpmix {
    fn frame_masks(&self, traj: &SourceTrajectory, frames: usize, sr: u32) -> (Vec<f64>, Vec<[f64; 2]>) {
        let centers = self.stft.frame_centers_s(frames, sr);
        let v: Vec<[f64; 2]> = traj.resample(&centers).iter().map(|a| [a.sin(), a.cos()]).collect();
        let m = v.iter().map(|v| (self.w[0] * v[0] + self.w[1] * v[1] + self.b).tanh()).collect();
        (m, v)
    }

    /// Mini-batch-of-one SGD with momentum on the complex L1 loss over
    /// `(stereo target, trajectory)` pairs. Deterministic for a fixed seed.
    pub fn train(pairs: &[(AudioClip, SourceTrajectory)], cfg: &UpmixTrainConfig) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidParams("no upmix training pairs".into()));
        }
        let mut model = Self { w: [0.0; 2], b: 0.0, stft: cfg.stft, history: Vec::new() };
        let mut vel = [0.0; 3];
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut order: Vec<usize> = (0..pairs.len()).collect();
        for epoch in 1..=cfg.epochs {
            order.shuffle(&mut rng);
            let mut total = 0.0;
            for &i in &order {
                let (target, traj) = &pairs[i];
                target.layout().expect(Layout::Stereo)?;
                traj.check_covers(target.len(), target.sample_rate_hz())?;
                let spec = Spectrogram::from_clip(target, cfg.stft)?;
                let (mid, side) = mid_side(&spec);
                let (frames, bins) = (spec.frames(), spec.bins());
                let (masks, v) = model.frame_masks(traj, frames, target.sample_rate_hz());
                let norm = 1.0 / (frames * bins) as f64;
                let mut grad = [0.0; 3];
                for t in 0..frames {
                    let m = masks[t];
                    let mut dm = 0.0;
                    for f in t * bins..(t + 1) * bins {
                        let d = mid[f] * m - side[f];
                        total += (d.re.abs() + d.im.abs()) * norm;
                        dm += d.re.signum() * mid[f].re + d.im.signum() * mid[f].im;
                    }
                    let dpre = dm * norm * (1.0 - m * m);
                    grad[0] += dpre * v[t][0];
                    grad[1] += dpre * v[t][1];
                    grad[2] += dpre;
                }
                for k in 0..3 {
                    vel[k] = cfg.momentum * vel[k] - cfg.lr * grad[k];
                }
                model.w[0] += vel[0];
                model.w[1] += vel[1];
                model.b += vel[2];
            }
            let mean = total / pairs.len() as f64;
            if !mean.is_finite() {
                return Err(Error::Diverged { epoch });
            }
            model.history.push(mean);
        }
        Ok(model)
    }

    pub fn predict(&self, mono: &AudioClip, traj: &SourceTrajectory) -> Result<Spectrogram> {
        mono.layout().expect(Layout::Mono)?;
        traj.check_covers(mono.len(), mono.sample_rate_hz())?;
        let spec = Spectrogram::from_clip(mono, self.stft)?;
        let (masks, _) = self.frame_masks(traj, spec.frames(), mono.sample_rate_hz());
        let bins = spec.bins();
        let m = spec.channel(0);
        let left = m.iter().enumerate().map(|(i, x)| x + x * masks[i / bins]).collect();
        let right = m.iter().enumerate().map(|(i, x)| x - x * masks[i / bins]).collect();
        Spectrogram::from_parts(Layout::Stereo, vec![left, right], self.stft, mono.sample_rate_hz(), mono.len())
    }
}

/// Scores the learned mask on one held-out scene.
pub fn upmix_learned(
    model: &LearnedUpmix,
    mono: &AudioClip,
    traj: &SourceTrajectory,
    target: &AudioClip,
) -> Result<UpmixResult> {
    check_pair(mono, target, traj)?;
    let predicted = model.predict(mono, traj)?;
    score(predicted, &Spectrogram::from_clip(mono, model.stft)?, &Spectrogram::from_clip(target, model.stft)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{render_binaural, sample_source_signal, SourceKind};
    use crate::transforms::downmix_to_mono;

    fn scene(az_deg: f64, itd: bool, seed: u64) -> (AudioClip, SourceTrajectory, SceneParams) {
        let p = SceneParams { itd_enabled: itd, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = sample_source_signal(&mut rng, SourceKind::WhiteNoiseBursts, 3.0);
        let t = SourceTrajectory::constant(az_deg.to_radians(), 3.0);
        (render_binaural(&s.samples, &t, &p, &mut rng).unwrap(), t, p)
    }

    #[test]
    fn oracle_is_near_exact_without_itd() {
        let (target, t, p) = scene(50.0, false, 1);
        let mono = downmix_to_mono(&target).unwrap();
        let r = upmix_oracle(&mono, &t, &p, &target, StftParams::default()).unwrap();
        assert!(r.l1_complex < 1e-9 * r.baseline_l1.max(1.0), "{} vs {}", r.l1_complex, r.baseline_l1);
        assert!(r.baseline_l1 > 0.0);
    }

    #[test]
    fn oracle_inverts_the_delay_model() {
        for az in [-70.0, 20.0, 85.0] {
            let (target, t, p) = scene(az, true, 4);
            let mono = downmix_to_mono(&target).unwrap();
            let r = upmix_oracle(&mono, &t, &p, &target, StftParams::default()).unwrap();
            assert!(r.l1_complex < 0.1 * r.baseline_l1, "{az}: {} vs {}", r.l1_complex, r.baseline_l1);
        }
    }

    #[test]
    fn shift_response_of_whole_samples_is_a_phase_ramp() {
        let h = shift_response(3.0, 0.4);
        assert!((h - Complex64::from_polar(1.0, 1.2)).norm() < 1e-12);
        let h = shift_response(0.5, 0.0);
        assert!((h - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn exact_mask_matches_ild_closed_form() {
        let (target, t, p) = scene(-35.0, false, 2);
        let mono = downmix_to_mono(&target).unwrap();
        let k = std::f64::consts::LN_10 * p.ild_max_db / 40.0;
        let exact = LearnedUpmix { w: [-k, 0.0], b: 0.0, stft: StftParams::default(), history: vec![] };
        let r = upmix_learned(&exact, &mono, &t, &target).unwrap();
        assert!(r.l1_complex < 1e-9, "{}", r.l1_complex);
    }

    #[test]
    fn learned_mask_beats_duplication() {
        let pairs: Vec<(AudioClip, SourceTrajectory)> =
            (0..8).map(|i| { let (c, t, _) = scene(-80.0 + 20.0 * i as f64, true, 10 + i); (c, t) }).collect();
        let model = LearnedUpmix::train(&pairs, &UpmixTrainConfig { epochs: 5, ..Default::default() }).unwrap();
        let (target, t, _) = scene(40.0, true, 99);
        let r = upmix_learned(&model, &downmix_to_mono(&target).unwrap(), &t, &target).unwrap();
        assert!(r.l1_complex < r.baseline_l1, "{} vs {}", r.l1_complex, r.baseline_l1);
    }

    #[test]
    fn identical_prediction_scores_zero() {
        let (target, t, _) = scene(0.0, true, 3);
        let mono = downmix_to_mono(&target).unwrap();
        let spec = Spectrogram::from_clip(&target, StftParams::default()).unwrap();
        let r = score(spec.clone(), &Spectrogram::from_clip(&mono, StftParams::default()).unwrap(), &spec).unwrap();
        assert_eq!(r.l1_complex, 0.0);
        let _ = t;
    }
}
