use std::f64::consts::TAU;
use std::ops::Range;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::{AudioClip, Error, Layout, Result};

/// Periodic Hann window.
pub fn hann(len: usize) -> Vec<f64> {
    (0..len).map(|n| 0.5 - 0.5 * (TAU * n as f64 / len as f64).cos()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StftParams {
    pub window_len: usize,
    pub hop: usize,
}

impl Default for StftParams {
    /// 32 ms Hann window, 10 ms hop at 16 kHz.
    fn default() -> Self {
        Self { window_len: 512, hop: 160 }
    }
}

impl StftParams {
    pub fn new(window_len: usize, hop: usize) -> Result<Self> {
        let p = Self { window_len, hop };
        p.validate()?;
        Ok(p)
    }

    /// The window length must be a power of two, and the squared Hann window
    /// shifted by `hop` must overlap-add to a sum bounded away from zero so
    /// that weighted overlap-add inverts the transform.
    pub fn validate(&self) -> Result<()> {
        let Self { window_len, hop } = *self;
        if window_len < 2 || !window_len.is_power_of_two() {
            return Err(Error::InvalidParams(format!("window_len {window_len} is not a power of two")));
        }
        if hop == 0 || hop > window_len {
            return Err(Error::InvalidParams(format!("hop {hop} must be in 1..={window_len}")));
        }
        let w = hann(window_len);
        let sums: Vec<f64> = (0..hop)
            .map(|p| (p..window_len).step_by(hop).map(|n| w[n] * w[n]).sum())
            .collect();
        let max = sums.iter().cloned().fold(0.0, f64::max);
        let min = sums.iter().cloned().fold(f64::INFINITY, f64::min);
        if min <= 1e-3 * max {
            return Err(Error::InvalidParams(format!(
                "window {window_len} / hop {hop} does not overlap-add (min squared-window sum {min:.3e})"
            )));
        }
        Ok(())
    }

    pub fn bins(&self) -> usize {
        self.window_len / 2 + 1
    }

    /// Frames that fit entirely inside `n` samples (no padding).
    pub fn frame_count(&self, n: usize) -> usize {
        if n < self.window_len {
            0
        } else {
            1 + (n - self.window_len) / self.hop
        }
    }

    pub fn frame_center_s(&self, frame: usize, sample_rate_hz: u32) -> f64 {
        (frame * self.hop) as f64 / sample_rate_hz as f64 + self.window_len as f64 / 2.0 / sample_rate_hz as f64
    }

    pub fn frame_centers_s(&self, frames: usize, sample_rate_hz: u32) -> Vec<f64> {
        (0..frames).map(|t| self.frame_center_s(t, sample_rate_hz)).collect()
    }

    /// Samples covered by the maximum number of frames.
    pub fn interior(&self, n: usize) -> Range<usize> {
        let frames = self.frame_count(n);
        if frames == 0 {
            return 0..0;
        }
        let covered = (frames - 1) * self.hop + self.window_len;
        self.window_len..covered.saturating_sub(self.window_len).max(self.window_len)
    }
}

/// Planned forward/inverse transforms for one parameter set.
#[derive(Clone)]
pub struct Stft {
    params: StftParams,
    window: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Stft {
    pub fn new(params: StftParams) -> Result<Self> {
        params.validate()?;
        let mut planner = FftPlanner::new();
        Ok(Self {
            params,
            window: hann(params.window_len),
            fwd: planner.plan_fft_forward(params.window_len),
            inv: planner.plan_fft_inverse(params.window_len),
        })
    }

    pub fn params(&self) -> StftParams {
        self.params
    }

    pub fn window(&self) -> &[f64] {
        &self.window
    }

    /// One-sided spectra of every frame, `frames × bins` row-major.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<Complex64>> {
        let StftParams { window_len, hop } = self.params;
        if x.len() < window_len {
            return Err(Error::TooShort { needed: window_len, got: x.len() });
        }
        let frames = self.params.frame_count(x.len());
        let bins = self.params.bins();
        let mut out = Vec::with_capacity(frames * bins);
        let mut buf = vec![Complex64::default(); window_len];
        for t in 0..frames {
            let frame = &x[t * hop..t * hop + window_len];
            for ((b, &s), &w) in buf.iter_mut().zip(frame).zip(&self.window) {
                *b = Complex64::new(s * w, 0.0);
            }
            self.fwd.process(&mut buf);
            out.extend_from_slice(&buf[..bins]);
        }
        Ok(out)
    }

    /// Weighted overlap-add inverse producing `len` samples. Samples with no
    /// window support come back as zero.
    pub fn inverse(&self, spec: &[Complex64], len: usize) -> Result<Vec<f64>> {
        let StftParams { window_len, hop } = self.params;
        let bins = self.params.bins();
        if !spec.len().is_multiple_of(bins) {
            return Err(Error::ShapeMismatch(format!("{} values is not a multiple of {bins} bins", spec.len())));
        }
        let frames = spec.len() / bins;
        let mut out = vec![0.0; len];
        let mut norm = vec![0.0; len];
        let mut buf = vec![Complex64::default(); window_len];
        let scale = 1.0 / window_len as f64;
        for t in 0..frames {
            let half = &spec[t * bins..(t + 1) * bins];
            buf[..bins].copy_from_slice(half);
            for k in bins..window_len {
                buf[k] = half[window_len - k].conj();
            }
            self.inv.process(&mut buf);
            let start = t * hop;
            for n in 0..window_len {
                let i = start + n;
                if i >= len {
                    break;
                }
                let w = self.window[n];
                out[i] += buf[n].re * scale * w;
                norm[i] += w * w;
            }
        }
        for (o, &d) in out.iter_mut().zip(&norm) {
            *o = if d > 1e-12 { *o / d } else { 0.0 };
        }
        Ok(out)
    }
}

/// Single-channel forward transform.
pub fn stft(x: &[f64], params: StftParams) -> Result<Vec<Complex64>> {
    Stft::new(params)?.forward(x)
}

/// Inverse of a whole spectrogram back to a clip of the original length.
pub fn istft(spec: &Spectrogram) -> Result<AudioClip> {
    let stft = Stft::new(spec.params)?;
    let channels = spec
        .channels
        .iter()
        .map(|c| stft.inverse(c, spec.n_samples))
        .collect::<Result<Vec<_>>>()?;
    AudioClip::new(spec.layout, channels, spec.sample_rate_hz)
}

/// Complex spectrogram of a clip: per channel, `frames × bins` row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrogram {
    channels: Vec<Vec<Complex64>>,
    frames: usize,
    params: StftParams,
    sample_rate_hz: u32,
    layout: Layout,
    n_samples: usize,
}

impl Spectrogram {
    pub fn from_clip(clip: &AudioClip, params: StftParams) -> Result<Self> {
        Self::from_clip_with(clip, &Stft::new(params)?)
    }

    pub fn from_clip_with(clip: &AudioClip, stft: &Stft) -> Result<Self> {
        let channels = clip.channels().iter().map(|c| stft.forward(c)).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            frames: stft.params().frame_count(clip.len()),
            channels,
            params: stft.params(),
            sample_rate_hz: clip.sample_rate_hz(),
            layout: clip.layout(),
            n_samples: clip.len(),
        })
    }

    /// Assembles a spectrogram from per-channel `frames × bins` data, e.g. a
    /// model prediction.
    pub fn from_parts(
        layout: Layout,
        channels: Vec<Vec<Complex64>>,
        params: StftParams,
        sample_rate_hz: u32,
        n_samples: usize,
    ) -> Result<Self> {
        if channels.len() != layout.channels() {
            return Err(Error::ShapeMismatch(format!("{layout:?} needs {} channels", layout.channels())));
        }
        let frames = params.frame_count(n_samples);
        if channels.iter().any(|c| c.len() != frames * params.bins()) {
            return Err(Error::ShapeMismatch(format!("expected {frames}x{} per channel", params.bins())));
        }
        Ok(Self { channels, frames, params, sample_rate_hz, layout, n_samples })
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn bins(&self) -> usize {
        self.params.bins()
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn params(&self) -> StftParams {
        self.params
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn channel(&self, c: usize) -> &[Complex64] {
        &self.channels[c]
    }

    pub fn channels(&self) -> &[Vec<Complex64>] {
        &self.channels
    }

    pub fn frame(&self, c: usize, t: usize) -> &[Complex64] {
        let b = self.bins();
        &self.channels[c][t * b..(t + 1) * b]
    }

    pub fn at(&self, c: usize, t: usize, f: usize) -> Complex64 {
        self.channels[c][t * self.bins() + f]
    }

    /// Centre frequency of bin `f`.
    pub fn bin_hz(&self, f: usize) -> f64 {
        f as f64 * self.sample_rate_hz as f64 / self.params.window_len as f64
    }

    pub fn frame_centers_s(&self) -> Vec<f64> {
        self.params.frame_centers_s(self.frames, self.sample_rate_hz)
    }

    /// `|X|` per channel, same layout as the complex data.
    pub fn magnitudes(&self) -> Vec<Vec<f64>> {
        self.channels.iter().map(|c| c.iter().map(|z| z.norm()).collect()).collect()
    }

    pub fn to_clip(&self) -> Result<AudioClip> {
        istft(self)
    }
}
