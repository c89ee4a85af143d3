use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Every clip in the pipeline runs at this rate; there is no resampler.
pub const SAMPLE_RATE_HZ: u32 = 16_000;

/// Channel layout. FOA channels are in ACN order: W, Y, Z, X.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    Mono,
    Stereo,
    Foa,
}

impl Layout {
    pub const fn channels(self) -> usize {
        match self {
            Layout::Mono => 1,
            Layout::Stereo => 2,
            Layout::Foa => 4,
        }
    }

    pub fn from_channels(n: usize) -> Result<Self> {
        match n {
            1 => Ok(Layout::Mono),
            2 => Ok(Layout::Stereo),
            4 => Ok(Layout::Foa),
            n => Err(Error::UnsupportedChannelCount(n)),
        }
    }

    pub(crate) fn expect(self, expected: Layout) -> Result<()> {
        if self == expected {
            Ok(())
        } else {
            Err(Error::Layout { expected, found: self })
        }
    }
}

/// A multi-channel sample buffer.
///
/// Samples are stored as `f64` so that the channel transforms compose without
/// single-precision drift; [`AudioClip::quantize_f32`] snaps a clip onto the
/// grid the canonical float32 WAV files use.
#[derive(Clone, Debug, PartialEq)]
pub struct AudioClip {
    channels: Vec<Vec<f64>>,
    sample_rate_hz: u32,
    layout: Layout,
}

impl AudioClip {
    pub const W: usize = 0;
    pub const Y: usize = 1;
    pub const Z: usize = 2;
    pub const X: usize = 3;

    pub fn new(layout: Layout, channels: Vec<Vec<f64>>, sample_rate_hz: u32) -> Result<Self> {
        if channels.len() != layout.channels() {
            return Err(Error::InvalidClip(format!(
                "{layout:?} layout needs {} channels, got {}",
                layout.channels(),
                channels.len()
            )));
        }
        if sample_rate_hz == 0 {
            return Err(Error::InvalidClip("sample rate must be positive".into()));
        }
        let n = channels[0].len();
        if channels.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidClip("channels differ in length".into()));
        }
        if channels.iter().flatten().any(|s| !s.is_finite()) {
            return Err(Error::InvalidClip("non-finite sample".into()));
        }
        Ok(Self { channels, sample_rate_hz, layout })
    }

    pub fn mono(samples: Vec<f64>) -> Result<Self> {
        Self::new(Layout::Mono, vec![samples], SAMPLE_RATE_HZ)
    }

    pub fn stereo(left: Vec<f64>, right: Vec<f64>) -> Result<Self> {
        Self::new(Layout::Stereo, vec![left, right], SAMPLE_RATE_HZ)
    }

    pub fn foa(w: Vec<f64>, y: Vec<f64>, z: Vec<f64>, x: Vec<f64>) -> Result<Self> {
        Self::new(Layout::Foa, vec![w, y, z, x], SAMPLE_RATE_HZ)
    }

    pub fn silence(layout: Layout, len: usize) -> Self {
        Self {
            channels: vec![vec![0.0; len]; layout.channels()],
            sample_rate_hz: SAMPLE_RATE_HZ,
            layout,
        }
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.sample_rate_hz as f64
    }

    pub fn channel(&self, i: usize) -> &[f64] {
        &self.channels[i]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.channels
    }

    /// Left channel of a stereo clip (channel 0).
    pub fn left(&self) -> &[f64] {
        &self.channels[0]
    }

    /// Right channel of a stereo clip (channel 1).
    pub fn right(&self) -> &[f64] {
        &self.channels[1]
    }

    pub fn peak(&self) -> f64 {
        self.channels.iter().flatten().fold(0.0, |m, s| m.max(s.abs()))
    }

    /// Time-slice `[start, start + len)` of every channel.
    pub fn slice(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.len() {
            return Err(Error::InvalidParams(format!(
                "slice {start}..{} exceeds clip length {}",
                start + len,
                self.len()
            )));
        }
        let channels = self.channels.iter().map(|c| c[start..start + len].to_vec()).collect();
        Ok(Self { channels, sample_rate_hz: self.sample_rate_hz, layout: self.layout })
    }

    /// Rounds every sample to the nearest `f32`.
    pub fn quantize_f32(mut self) -> Self {
        for s in self.channels.iter_mut().flatten() {
            *s = *s as f32 as f64;
        }
        self
    }

    pub(crate) fn from_parts_unchecked(layout: Layout, channels: Vec<Vec<f64>>, sample_rate_hz: u32) -> Self {
        debug_assert_eq!(channels.len(), layout.channels());
        Self { channels, sample_rate_hz, layout }
    }
}
