use num_complex::Complex64;

use super::{IntensityCues, Spectrogram};
use crate::{AudioClip, Layout, Result};

const W: usize = AudioClip::W;
const Y: usize = AudioClip::Y;
const Z: usize = AudioClip::Z;
const X: usize = AudioClip::X;

/// Per time-frequency bin: `|W|²`, then real and imaginary parts of
/// `Y·W*`, `Z·W*`, `X·W*`.
#[derive(Clone, Debug, PartialEq)]
pub struct FoaCrossFeatures {
    pub frames: usize,
    pub bins: usize,
    pub values: Vec<[f64; 7]>,
}

impl FoaCrossFeatures {
    pub fn at(&self, t: usize, f: usize) -> &[f64; 7] {
        &self.values[t * self.bins + f]
    }
}

pub fn foa_cross_features(spec: &Spectrogram) -> Result<FoaCrossFeatures> {
    spec.layout().expect(Layout::Foa)?;
    let (w, y, z, x) = (spec.channel(W), spec.channel(Y), spec.channel(Z), spec.channel(X));
    let values = (0..w.len())
        .map(|i| {
            let wc = w[i].conj();
            let (py, pz, px): (Complex64, Complex64, Complex64) = (y[i] * wc, z[i] * wc, x[i] * wc);
            [w[i].norm_sqr(), py.re, py.im, pz.re, pz.im, px.re, px.im]
        })
        .collect();
    Ok(FoaCrossFeatures { frames: spec.frames(), bins: spec.bins(), values })
}

/// Frame-wise active intensity: `ix = Σ Re(W·X*)`, `iy = Σ Re(W·Y*)`,
/// `energy = Σ |W|²`, summed over the one-sided spectrum.
pub fn intensity_vector(spec: &Spectrogram) -> Result<IntensityCues> {
    spec.layout().expect(Layout::Foa)?;
    let frames = spec.frames();
    let mut cues = IntensityCues {
        ix: Vec::with_capacity(frames),
        iy: Vec::with_capacity(frames),
        energy: Vec::with_capacity(frames),
    };
    for t in 0..frames {
        let (w, y, x) = (spec.frame(W, t), spec.frame(Y, t), spec.frame(X, t));
        let (mut ix, mut iy, mut e) = (0.0, 0.0, 0.0);
        for f in 0..w.len() {
            ix += (w[f] * x[f].conj()).re;
            iy += (w[f] * y[f].conj()).re;
            e += w[f].norm_sqr();
        }
        cues.ix.push(ix);
        cues.iy.push(iy);
        cues.energy.push(e);
    }
    Ok(cues)
}
