use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{GccPhat, StftParams, DEFAULT_MAX_LAG};
use crate::{AudioClip, Layout, Result};

/// Added to frame energies before taking logs.
pub const ENERGY_FLOOR: f64 = 1e-10;

fn energy(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Interaural level difference in dB, positive when the right frame is louder.
pub fn ild_db(left: &[f64], right: &[f64]) -> f64 {
    // difference of logs so that swapping the channels negates exactly
    10.0 * ((energy(right) + ENERGY_FLOOR).log10() - (energy(left) + ENERGY_FLOOR).log10())
}

/// Log-energy difference in nats, positive when the right frame is louder.
pub fn led(left: &[f64], right: &[f64]) -> f64 {
    (energy(right) + ENERGY_FLOOR).ln() - (energy(left) + ENERGY_FLOOR).ln()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CueParams {
    pub stft: StftParams,
    pub max_lag: usize,
}

impl Default for CueParams {
    fn default() -> Self {
        Self { stft: StftParams::default(), max_lag: DEFAULT_MAX_LAG }
    }
}

/// Per-frame binaural cues on the STFT frame grid.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BinauralCues {
    /// Seconds; positive when the right ear leads.
    pub itd_s: Vec<f64>,
    pub ild_db: Vec<f64>,
    pub led: Vec<f64>,
}

impl BinauralCues {
    pub fn len(&self) -> usize {
        self.itd_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.itd_s.is_empty()
    }
}

/// Per-frame acoustic intensity of an FOA clip.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IntensityCues {
    pub ix: Vec<f64>,
    pub iy: Vec<f64>,
    pub energy: Vec<f64>,
}

impl IntensityCues {
    pub fn len(&self) -> usize {
        self.ix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ix.is_empty()
    }

    /// `atan2(iy, ix)` per frame.
    pub fn azimuth_rad(&self) -> Vec<f64> {
        self.ix.iter().zip(&self.iy).map(|(x, y)| y.atan2(*x)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CueSequence {
    Binaural(BinauralCues),
    Intensity(IntensityCues),
}

impl CueSequence {
    pub fn len(&self) -> usize {
        match self {
            CueSequence::Binaural(c) => c.len(),
            CueSequence::Intensity(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Debug dump: `frame,itd_s,ild_db,led[,ix,iy,energy]`. FOA rows leave
    /// the binaural columns empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match self {
            CueSequence::Binaural(c) => {
                out.push_str("frame,itd_s,ild_db,led\n");
                for t in 0..c.len() {
                    let _ = writeln!(out, "{t},{},{},{}", c.itd_s[t], c.ild_db[t], c.led[t]);
                }
            }
            CueSequence::Intensity(c) => {
                out.push_str("frame,itd_s,ild_db,led,ix,iy,energy\n");
                for t in 0..c.len() {
                    let _ = writeln!(out, "{t},,,,{},{},{}", c.ix[t], c.iy[t], c.energy[t]);
                }
            }
        }
        out
    }
}

/// ITD, ILD and log-energy difference for every STFT frame of a stereo clip.
/// Frames are Hann-windowed before both the energy and correlation measures.
pub fn binaural_cues(clip: &AudioClip, params: &CueParams) -> Result<BinauralCues> {
    clip.layout().expect(Layout::Stereo)?;
    let StftParams { window_len, hop } = params.stft;
    params.stft.validate()?;
    let frames = params.stft.frame_count(clip.len());
    let window = super::hann(window_len);
    let gcc = GccPhat::new(window_len, params.max_lag)?;
    let sr = clip.sample_rate_hz() as f64;

    let mut cues = BinauralCues {
        itd_s: Vec::with_capacity(frames),
        ild_db: Vec::with_capacity(frames),
        led: Vec::with_capacity(frames),
    };
    let mut l = vec![0.0; window_len];
    let mut r = vec![0.0; window_len];
    for t in 0..frames {
        let start = t * hop;
        for n in 0..window_len {
            l[n] = clip.left()[start + n] * window[n];
            r[n] = clip.right()[start + n] * window[n];
        }
        // gcc lag > 0 means the right channel lags, i.e. the left ear leads
        let g = gcc.process(&l, &r)?;
        cues.itd_s.push(-(g.lag as f64) / sr);
        cues.ild_db.push(ild_db(&l, &r));
        cues.led.push(led(&l, &r));
    }
    Ok(cues)
}
