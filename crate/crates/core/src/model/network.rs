use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::{FeatureMode, FeatureSequence, NormStats, TRAJ_DIM};
use super::AudioFeatures;
use crate::{Error, Layout, Result};

pub const CHECKPOINT_VERSION: u32 = 1;
pub const PROB_CLAMP: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyper {
    pub hidden: usize,
    pub lr: f64,
    pub momentum: f64,
    pub batch: usize,
    pub epochs: usize,
    pub patience: usize,
    pub seed: u64,
}

impl Default for Hyper {
    fn default() -> Self {
        Self { hidden: 16, lr: 0.05, momentum: 0.9, batch: 32, epochs: 200, patience: 5, seed: 0 }
    }
}

impl Hyper {
    pub fn validate(&self) -> Result<()> {
        if self.hidden < 2 {
            return Err(Error::InvalidParams("hidden width must be at least 2".into()));
        }
        if !(self.lr > 0.0) || !(0.0..1.0).contains(&self.momentum) || self.batch == 0 || self.epochs == 0 {
            return Err(Error::InvalidParams("invalid optimizer settings".into()));
        }
        Ok(())
    }
}

/// Row-major weight matrices and bias vectors.
///
/// `audio_w: h × d_a`, `traj_w: h × 2`, `fuse_w: h × 2h`, `head_w: h`,
/// `head_b: 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub audio_w: Vec<f64>,
    pub audio_b: Vec<f64>,
    pub traj_w: Vec<f64>,
    pub traj_b: Vec<f64>,
    pub fuse_w: Vec<f64>,
    pub fuse_b: Vec<f64>,
    pub head_w: Vec<f64>,
    pub head_b: Vec<f64>,
}

pub const TENSOR_NAMES: [&str; 8] = ["audio_w", "audio_b", "traj_w", "traj_b", "fuse_w", "fuse_b", "head_w", "head_b"];

impl Params {
    pub fn zeros(audio_dim: usize, hidden: usize) -> Self {
        Self {
            audio_w: vec![0.0; hidden * audio_dim],
            audio_b: vec![0.0; hidden],
            traj_w: vec![0.0; hidden * TRAJ_DIM],
            traj_b: vec![0.0; hidden],
            fuse_w: vec![0.0; hidden * 2 * hidden],
            fuse_b: vec![0.0; hidden],
            head_w: vec![0.0; hidden],
            head_b: vec![0.0; 1],
        }
    }

    pub fn tensors(&self) -> [&Vec<f64>; 8] {
        [&self.audio_w, &self.audio_b, &self.traj_w, &self.traj_b, &self.fuse_w, &self.fuse_b, &self.head_w, &self.head_b]
    }

    pub fn tensors_mut(&mut self) -> [&mut Vec<f64>; 8] {
        [
            &mut self.audio_w,
            &mut self.audio_b,
            &mut self.traj_w,
            &mut self.traj_b,
            &mut self.fuse_w,
            &mut self.fuse_b,
            &mut self.head_w,
            &mut self.head_b,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }

    /// `self += a · other`
    pub fn add_scaled(&mut self, a: f64, other: &Params) {
        for (p, o) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (x, y) in p.iter_mut().zip(o) {
                *x += a * y;
            }
        }
    }

    pub fn scale(&mut self, a: f64) {
        for p in self.tensors_mut() {
            p.iter_mut().for_each(|x| *x *= a);
        }
    }
}

fn xavier<R: Rng>(rng: &mut R, fan_in: usize, fan_out: usize) -> Vec<f64> {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    (0..fan_in * fan_out).map(|_| rng.random_range(-limit..limit)).collect()
}

/// `out = W·x + b` for row-major `W: rows × x.len()`.
fn affine(w: &[f64], b: &[f64], x: &[f64], out: &mut [f64]) {
    let cols = x.len();
    for (r, o) in out.iter_mut().enumerate() {
        let row = &w[r * cols..(r + 1) * cols];
        *o = b[r] + row.iter().zip(x).map(|(a, c)| a * c).sum::<f64>();
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Binary cross-entropy in nats with the probability clamped to
/// `[1e-7, 1 − 1e-7]`.
pub fn bce_loss(p: f64, y: f64) -> f64 {
    let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

/// Two-branch alignment classifier.
///
/// Per frame, `za = tanh(Wa·â + ba)` and `zv = tanh(Wv·v + bv)` are fused by
/// `zf = tanh(Wf·[za; zv] + bf)`; `zf` is mean-pooled over frames and an
/// affine head gives the log-odds that audio and trajectory are aligned.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignmentModel {
    pub format_version: u32,
    pub layout: Layout,
    pub feature_mode: FeatureMode,
    pub audio_dim: usize,
    pub hidden: usize,
    pub params: Params,
    pub norm: NormStats,
    pub hyper: Hyper,
    pub trained: bool,
}

/// Per-frame activations kept for backpropagation.
struct Trace {
    a: Vec<f64>,
    v: Vec<f64>,
    za: Vec<f64>,
    zv: Vec<f64>,
    zf: Vec<f64>,
    pooled: Vec<f64>,
    logit: f64,
}

impl AlignmentModel {
    /// Xavier-uniform weights and zero biases drawn from `hyper.seed`.
    pub fn new(layout: Layout, feature_mode: FeatureMode, norm: NormStats, hyper: Hyper) -> Result<Self> {
        hyper.validate()?;
        let audio_dim = feature_mode.audio_dim(layout)?;
        if norm.dim() != audio_dim {
            return Err(Error::ShapeMismatch(format!("norm stats dim {} for audio dim {audio_dim}", norm.dim())));
        }
        let h = hyper.hidden;
        let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
        let mut params = Params::zeros(audio_dim, h);
        params.audio_w = xavier(&mut rng, audio_dim, h);
        params.traj_w = xavier(&mut rng, TRAJ_DIM, h);
        params.fuse_w = xavier(&mut rng, 2 * h, h);
        params.head_w = xavier(&mut rng, h, 1);
        Ok(Self { format_version: CHECKPOINT_VERSION, layout, feature_mode, audio_dim, hidden: h, params, norm, hyper, trained: false })
    }

    fn check_input(&self, seq: &FeatureSequence) -> Result<()> {
        if seq.audio.dim != self.audio_dim {
            return Err(Error::ShapeMismatch(format!("audio dim {} for model dim {}", seq.audio.dim, self.audio_dim)));
        }
        if seq.frames() == 0 || seq.trajectory.len() != seq.frames() * TRAJ_DIM {
            return Err(Error::ShapeMismatch("empty or misaligned feature sequence".into()));
        }
        Ok(())
    }

    fn trace(&self, seq: &FeatureSequence) -> Trace {
        let (h, t_len) = (self.hidden, seq.frames());
        let p = &self.params;
        let mut tr = Trace {
            a: vec![0.0; t_len * self.audio_dim],
            v: seq.trajectory.clone(),
            za: vec![0.0; t_len * h],
            zv: vec![0.0; t_len * h],
            zf: vec![0.0; t_len * h],
            pooled: vec![0.0; h],
            logit: 0.0,
        };
        let mut u = vec![0.0; 2 * h];
        for t in 0..t_len {
            let d = self.audio_dim;
            self.norm.apply(seq.audio.frame(t), &mut tr.a[t * d..(t + 1) * d]);
            let (za, zv, zf) = (t * h..(t + 1) * h, t * h..(t + 1) * h, t * h..(t + 1) * h);
            affine(&p.audio_w, &p.audio_b, &tr.a[t * d..(t + 1) * d], &mut tr.za[za.clone()]);
            affine(&p.traj_w, &p.traj_b, &tr.v[t * TRAJ_DIM..(t + 1) * TRAJ_DIM], &mut tr.zv[zv.clone()]);
            tr.za[za.clone()].iter_mut().for_each(|x| *x = x.tanh());
            tr.zv[zv.clone()].iter_mut().for_each(|x| *x = x.tanh());
            u[..h].copy_from_slice(&tr.za[za]);
            u[h..].copy_from_slice(&tr.zv[zv]);
            affine(&p.fuse_w, &p.fuse_b, &u, &mut tr.zf[zf.clone()]);
            for (k, x) in tr.zf[zf].iter_mut().enumerate() {
                *x = x.tanh();
                tr.pooled[k] += *x;
            }
        }
        tr.pooled.iter_mut().for_each(|x| *x /= t_len as f64);
        tr.logit = p.head_b[0] + p.head_w.iter().zip(&tr.pooled).map(|(w, z)| w * z).sum::<f64>();
        tr
    }

    /// Log-odds that the pair is aligned.
    pub fn logit(&self, seq: &FeatureSequence) -> Result<f64> {
        self.check_input(seq)?;
        Ok(self.trace(seq).logit)
    }

    pub fn predict(&self, seq: &FeatureSequence) -> Result<f64> {
        Ok(sigmoid(self.logit(seq)?))
    }

    /// Mean clamped cross-entropy over a batch and its exact gradient.
    pub fn loss_and_grad(&self, batch: &[(&FeatureSequence, f64)]) -> Result<(f64, Params)> {
        let h = self.hidden;
        let d = self.audio_dim;
        let p = &self.params;
        let mut g = Params::zeros(d, h);
        let mut loss = 0.0;
        let scale = 1.0 / batch.len().max(1) as f64;
        let mut dpre_f = vec![0.0; h];
        let mut du = vec![0.0; 2 * h];
        let mut u = vec![0.0; 2 * h];
        for &(seq, y) in batch {
            self.check_input(seq)?;
            let tr = self.trace(seq);
            let prob = sigmoid(tr.logit);
            loss += bce_loss(prob, y) * scale;
            let dlogit = (prob - y) * scale;
            g.head_b[0] += dlogit;
            for k in 0..h {
                g.head_w[k] += dlogit * tr.pooled[k];
            }
            let t_len = seq.frames();
            for t in 0..t_len {
                let zf = &tr.zf[t * h..(t + 1) * h];
                let za = &tr.za[t * h..(t + 1) * h];
                let zv = &tr.zv[t * h..(t + 1) * h];
                u[..h].copy_from_slice(za);
                u[h..].copy_from_slice(zv);
                for k in 0..h {
                    dpre_f[k] = dlogit * p.head_w[k] / t_len as f64 * (1.0 - zf[k] * zf[k]);
                    g.fuse_b[k] += dpre_f[k];
                    let row = &mut g.fuse_w[k * 2 * h..(k + 1) * 2 * h];
                    for (j, r) in row.iter_mut().enumerate() {
                        *r += dpre_f[k] * u[j];
                    }
                }
                du.iter_mut().for_each(|x| *x = 0.0);
                for k in 0..h {
                    let row = &p.fuse_w[k * 2 * h..(k + 1) * 2 * h];
                    for j in 0..2 * h {
                        du[j] += row[j] * dpre_f[k];
                    }
                }
                let a = &tr.a[t * d..(t + 1) * d];
                let v = &tr.v[t * TRAJ_DIM..(t + 1) * TRAJ_DIM];
                for k in 0..h {
                    let da = du[k] * (1.0 - za[k] * za[k]);
                    g.audio_b[k] += da;
                    for (j, x) in a.iter().enumerate() {
                        g.audio_w[k * d + j] += da * x;
                    }
                    let dv = du[h + k] * (1.0 - zv[k] * zv[k]);
                    g.traj_b[k] += dv;
                    for (j, x) in v.iter().enumerate() {
                        g.traj_w[k * TRAJ_DIM + j] += dv * x;
                    }
                }
            }
        }
        Ok((loss, g))
    }

    /// Mean clamped cross-entropy without gradients.
    pub fn loss(&self, batch: &[(&FeatureSequence, f64)]) -> Result<f64> {
        let mut total = 0.0;
        for &(seq, y) in batch {
            total += bce_loss(self.predict(seq)?, y);
        }
        Ok(total / batch.len().max(1) as f64)
    }

    /// Audio-branch activations `tanh(Wa·â + ba)` per frame.
    pub fn embed(&self, audio: &AudioFeatures) -> Result<Vec<Vec<f64>>> {
        if audio.dim != self.audio_dim {
            return Err(Error::ShapeMismatch(format!("audio dim {} for model dim {}", audio.dim, self.audio_dim)));
        }
        let mut a = vec![0.0; self.audio_dim];
        Ok((0..audio.frames)
            .map(|t| {
                self.norm.apply(audio.frame(t), &mut a);
                let mut z = vec![0.0; self.hidden];
                affine(&self.params.audio_w, &self.params.audio_b, &a, &mut z);
                z.iter_mut().for_each(|x| *x = x.tanh());
                z
            })
            .collect())
    }
}
