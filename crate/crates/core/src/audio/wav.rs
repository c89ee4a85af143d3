use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};
use serde::{Deserialize, Serialize};

use crate::{AudioClip, Error, Layout, Result, SAMPLE_RATE_HZ};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WavEncoding {
    Pcm16,
    Float32,
}

fn check_spec(spec: &WavSpec) -> Result<Layout> {
    let layout = Layout::from_channels(spec.channels as usize)?;
    if spec.sample_rate != SAMPLE_RATE_HZ {
        return Err(Error::UnsupportedSampleRate(spec.sample_rate));
    }
    match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) | (SampleFormat::Float, 32) => Ok(layout),
        (fmt, bits) => Err(Error::UnsupportedEncoding(format!("{fmt:?} {bits}-bit"))),
    }
}

/// Reads the header only and returns the channel layout.
pub fn read_wav_layout(path: &Path) -> Result<Layout> {
    let reader = WavReader::open(path)?;
    check_spec(&reader.spec())
}

/// Reads a PCM16 or float32 WAV file. PCM16 samples are divided by 32768.
pub fn read_wav(path: &Path) -> Result<AudioClip> {
    let mut reader = WavReader::open(path)?;
    let spec = reader.spec();
    let layout = check_spec(&spec)?;
    let n_channels = spec.channels as usize;
    let expected = reader.len() as usize;

    let interleaved: Vec<f64> = match spec.sample_format {
        SampleFormat::Float => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()?,
        SampleFormat::Int => reader
            .samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<std::result::Result<_, _>>()?,
    };
    if interleaved.len() != expected || !interleaved.len().is_multiple_of(n_channels) {
        return Err(Error::Truncated(format!(
            "{}: expected {expected} samples, read {}",
            path.display(),
            interleaved.len()
        )));
    }

    let frames = interleaved.len() / n_channels;
    let mut channels = vec![Vec::with_capacity(frames); n_channels];
    for frame in interleaved.chunks_exact(n_channels) {
        for (c, &s) in channels.iter_mut().zip(frame) {
            c.push(s);
        }
    }
    AudioClip::new(layout, channels, spec.sample_rate)
}

/// Writes `clip` to `path`, returning how many samples were clamped into
/// `[-1, 1]` (PCM16 only; float32 is written as-is).
pub fn write_wav(clip: &AudioClip, path: &Path, encoding: WavEncoding) -> Result<usize> {
    let spec = WavSpec {
        channels: clip.layout().channels() as u16,
        sample_rate: clip.sample_rate_hz(),
        bits_per_sample: match encoding {
            WavEncoding::Pcm16 => 16,
            WavEncoding::Float32 => 32,
        },
        sample_format: match encoding {
            WavEncoding::Pcm16 => SampleFormat::Int,
            WavEncoding::Float32 => SampleFormat::Float,
        },
    };
    let mut writer = WavWriter::create(path, spec)?;
    let mut clipped = 0;
    for i in 0..clip.len() {
        for ch in clip.channels() {
            let s = ch[i];
            match encoding {
                WavEncoding::Float32 => writer.write_sample(s as f32)?,
                WavEncoding::Pcm16 => {
                    if !(-1.0..=1.0).contains(&s) {
                        clipped += 1;
                    }
                    let q = (s.clamp(-1.0, 1.0) * 32768.0).round().clamp(-32768.0, 32767.0);
                    writer.write_sample(q as i16)?;
                }
            }
        }
    }
    writer.finalize()?;
    if clipped > 0 {
        log::warn!("{}: clamped {clipped} samples outside [-1, 1]", path.display());
    }
    Ok(clipped)
}
