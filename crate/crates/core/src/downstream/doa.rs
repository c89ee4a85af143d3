use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::audio::wrap_pi;
use crate::dsp::{binaural_cues, hann, intensity_vector, CueParams};
use crate::synth::SceneParams;
use crate::{AudioClip, Layout, Result, Spectrogram};

/// Per-frame azimuth estimates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoaEstimate {
    pub azimuth_rad: Vec<f64>,
    /// Frame energy relative to the loudest frame.
    pub confidence: Vec<f64>,
    /// Frames whose estimate is unreliable (silent, or clamped to ±90°).
    pub flagged: Vec<bool>,
}

impl DoaEstimate {
    pub fn len(&self) -> usize {
        self.azimuth_rad.len()
    }

    pub fn is_empty(&self) -> bool {
        self.azimuth_rad.is_empty()
    }

    /// Median azimuth over unflagged frames with confidence above `min_conf`.
    pub fn median_rad(&self, min_conf: f64) -> Option<f64> {
        let mut v: Vec<f64> = (0..self.len())
            .filter(|&t| !self.flagged[t] && self.confidence[t] > min_conf)
            .map(|t| self.azimuth_rad[t])
            .collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let m = v.len() / 2;
        Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
    }

    /// Energy-weighted circular mean over unflagged frames.
    pub fn circular_mean_rad(&self) -> Option<f64> {
        let (mut s, mut c) = (0.0, 0.0);
        for t in 0..self.len() {
            if !self.flagged[t] {
                s += self.confidence[t] * self.azimuth_rad[t].sin();
                c += self.confidence[t] * self.azimuth_rad[t].cos();
            }
        }
        (s != 0.0 || c != 0.0).then(|| s.atan2(c))
    }
}

fn normalize(energy: &[f64]) -> Vec<f64> {
    let max = energy.iter().cloned().fold(0.0, f64::max);
    energy.iter().map(|e| if max > 0.0 { e / max } else { 0.0 }).collect()
}

/// Inverts the Woodworth model `τ = (r/c)(φ + sin φ)` on `[−π/2, π/2]` by
/// bisection. Delays beyond the model's range clamp to ±π/2 and return
/// `clamped = true`.
pub fn invert_woodworth(itd_s: f64, scene: &SceneParams) -> (f64, bool) {
    let max = scene.woodworth_itd_s(FRAC_PI_2);
    if itd_s >= max {
        return (FRAC_PI_2, itd_s > max);
    }
    if itd_s <= -max {
        return (-FRAC_PI_2, itd_s < -max);
    }
    let (mut lo, mut hi) = (-FRAC_PI_2, FRAC_PI_2);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if scene.woodworth_itd_s(mid) < itd_s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi), false)
}

/// Frame-wise azimuth from the GCC-PHAT delay of a binaural clip.
pub fn doa_from_gcc(clip: &AudioClip, scene: &SceneParams, params: &CueParams) -> Result<DoaEstimate> {
    clip.layout().expect(Layout::Stereo)?;
    let cues = binaural_cues(clip, params)?;
    let w = hann(params.stft.window_len);
    let energy: Vec<f64> = (0..cues.len())
        .map(|t| {
            let start = t * params.stft.hop;
            w.iter()
                .enumerate()
                .map(|(i, w)| (clip.left()[start + i] * w).powi(2) + (clip.right()[start + i] * w).powi(2))
                .sum()
        })
        .collect();
    let mut est = DoaEstimate { azimuth_rad: Vec::new(), confidence: normalize(&energy), flagged: Vec::new() };
    for (t, &itd) in cues.itd_s.iter().enumerate() {
        let (phi, clamped) = invert_woodworth(itd, scene);
        est.azimuth_rad.push(phi);
        est.flagged.push(clamped || energy[t] == 0.0);
    }
    Ok(est)
}

/// Frame-wise azimuth `atan2(i_y, i_x)` from the active intensity vector.
pub fn doa_from_intensity(clip: &AudioClip, params: &CueParams) -> Result<DoaEstimate> {
    clip.layout().expect(Layout::Foa)?;
    let iv = intensity_vector(&Spectrogram::from_clip(clip, params.stft)?)?;
    Ok(DoaEstimate {
        azimuth_rad: (0..iv.len()).map(|t| wrap_pi(iv.iy[t].atan2(iv.ix[t]))).collect(),
        confidence: normalize(&iv.energy),
        flagged: iv.energy.iter().map(|&e| e == 0.0).collect(),
    })
}
