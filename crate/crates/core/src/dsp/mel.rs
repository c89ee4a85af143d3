use serde::{Deserialize, Serialize};

use super::Spectrogram;
use crate::{Error, Result, SAMPLE_RATE_HZ};

/// Lower clamp on mel-band power before taking the log.
pub const LOG_FLOOR: f64 = 1e-10;

/// HTK mel scale.
pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MelParams {
    pub n_mels: usize,
    pub f_min_hz: f64,
    pub f_max_hz: f64,
}

impl Default for MelParams {
    fn default() -> Self {
        Self { n_mels: 64, f_min_hz: 0.0, f_max_hz: 8000.0 }
    }
}

/// Triangular filters, `n_mels` rows of `n_fft / 2 + 1` weights, each row
/// scaled to a peak of one.
pub fn mel_filterbank(params: &MelParams, n_fft: usize, sample_rate_hz: u32) -> Result<Vec<Vec<f64>>> {
    let bins = n_fft / 2 + 1;
    if params.n_mels == 0 || params.n_mels > bins {
        return Err(Error::InvalidParams(format!("n_mels {} exceeds {bins} bins", params.n_mels)));
    }
    if !(params.f_min_hz >= 0.0 && params.f_min_hz < params.f_max_hz) {
        return Err(Error::InvalidParams("mel band edges out of order".into()));
    }
    let lo = hz_to_mel(params.f_min_hz);
    let hi = hz_to_mel(params.f_max_hz);
    let edges: Vec<f64> = (0..params.n_mels + 2)
        .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (params.n_mels + 1) as f64))
        .collect();
    let bin_hz = |k: usize| k as f64 * sample_rate_hz as f64 / n_fft as f64;

    let mut bank = Vec::with_capacity(params.n_mels);
    for j in 0..params.n_mels {
        let (left, centre, right) = (edges[j], edges[j + 1], edges[j + 2]);
        let mut row: Vec<f64> = (0..bins)
            .map(|k| {
                let f = bin_hz(k);
                if f <= left || f >= right {
                    0.0
                } else if f <= centre {
                    (f - left) / (centre - left)
                } else {
                    (right - f) / (right - centre)
                }
            })
            .collect();
        let peak = row.iter().cloned().fold(0.0, f64::max);
        if peak <= 0.0 {
            return Err(Error::InvalidParams(format!("mel band {j} contains no FFT bin")));
        }
        row.iter_mut().for_each(|w| *w /= peak);
        bank.push(row);
    }
    Ok(bank)
}

/// Log mel power, per channel `frames × n_mels` row-major, natural log.
#[derive(Clone, Debug, PartialEq)]
pub struct MelSpectrogram {
    pub values: Vec<Vec<f64>>,
    pub frames: usize,
    pub params: MelParams,
}

impl MelSpectrogram {
    pub fn frame(&self, c: usize, t: usize) -> &[f64] {
        let m = self.params.n_mels;
        &self.values[c][t * m..(t + 1) * m]
    }
}

pub fn log_mel(spec: &Spectrogram, params: &MelParams) -> Result<MelSpectrogram> {
    if spec.sample_rate_hz() != SAMPLE_RATE_HZ {
        return Err(Error::InvalidParams(format!("log_mel expects {SAMPLE_RATE_HZ} Hz input")));
    }
    let bank = mel_filterbank(params, spec.params().window_len, spec.sample_rate_hz())?;
    let floor_ln = LOG_FLOOR.ln();
    let values = (0..spec.n_channels())
        .map(|c| {
            let mut out = Vec::with_capacity(spec.frames() * params.n_mels);
            for t in 0..spec.frames() {
                let power: Vec<f64> = spec.frame(c, t).iter().map(|z| z.norm_sqr()).collect();
                for row in &bank {
                    let e: f64 = row.iter().zip(&power).map(|(w, p)| w * p).sum();
                    out.push(if e > LOG_FLOOR { e.ln() } else { floor_ln });
                }
            }
            out
        })
        .collect();
    Ok(MelSpectrogram { values, frames: spec.frames(), params: *params })
}
