use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::{assemble_features, FeatureMode, FeatureSequence, NormStats};
use super::network::{AlignmentModel, Hyper, Params, CHECKPOINT_VERSION};
use crate::audio::{load_trajectory, read_wav};
use crate::dsp::CueParams;
use crate::synth::{generate_example, Example, GenerationConfig};
use crate::{AlignmentLabel, AudioClip, DatasetManifest, Error, Layout, Result, Split};

/// A labeled, feature-extracted example.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub id: String,
    pub split: Split,
    pub label: AlignmentLabel,
    pub features: FeatureSequence,
}

/// Feature-extracted examples of a single layout.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub layout: Layout,
    pub mode: FeatureMode,
    pub samples: Vec<Sample>,
}

fn common_layout(layouts: impl Iterator<Item = Layout>) -> Result<Option<Layout>> {
    let mut found = None;
    for l in layouts {
        match found {
            None => found = Some(l),
            Some(f) if f != l => return Err(Error::Layout { expected: f, found: l }),
            _ => {}
        }
    }
    Ok(found)
}

impl Dataset {
    pub fn from_examples(examples: &[Example], mode: FeatureMode, params: &CueParams) -> Result<Self> {
        let layout = common_layout(examples.iter().map(|e| e.audio.layout()))?.unwrap_or(Layout::Stereo);
        let samples = examples
            .par_iter()
            .map(|e| {
                Ok(Sample {
                    id: e.id.clone(),
                    split: e.split,
                    label: e.label,
                    features: assemble_features(&e.trajectory, &e.audio, mode, params)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { layout, mode, samples })
    }

    /// Renders and featurizes `cfg.n` examples without keeping the audio.
    pub fn generate(cfg: &GenerationConfig, mode: FeatureMode, params: &CueParams) -> Result<Self> {
        Self::generate_with(cfg, mode, params, Ok)
    }

    /// As [`Self::generate`], passing each clip through `edit` before
    /// feature extraction.
    pub fn generate_with<F>(cfg: &GenerationConfig, mode: FeatureMode, params: &CueParams, edit: F) -> Result<Self>
    where
        F: Fn(AudioClip) -> Result<AudioClip> + Sync,
    {
        if cfg.n == 0 {
            return Err(Error::InvalidParams("n must be positive".into()));
        }
        let samples = (0..cfg.n)
            .into_par_iter()
            .map(|i| {
                let e = generate_example(cfg, i)?;
                let audio = edit(e.audio)?;
                let features = assemble_features(&e.trajectory, &audio, mode, params)?;
                Ok(Sample { id: e.id, split: e.split, label: e.label, features })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { layout: cfg.mode.layout(), mode, samples })
    }

    /// Loads and featurizes every manifest entry; paths resolve against `base`.
    pub fn from_manifest(manifest: &DatasetManifest, base: &Path, mode: FeatureMode, params: &CueParams) -> Result<Self> {
        let loaded = manifest
            .entries
            .par_iter()
            .map(|e| {
                let audio = read_wav(&e.audio_path(base))?;
                let traj = load_trajectory(&e.trajectory_path(base))?;
                let features = assemble_features(&traj, &audio, mode, params)?;
                Ok((audio.layout(), Sample { id: e.id.clone(), split: e.split, label: e.label, features }))
            })
            .collect::<Result<Vec<_>>>()?;
        let layout = common_layout(loaded.iter().map(|(l, _)| *l))?.unwrap_or(Layout::Stereo);
        Ok(Self { layout, mode, samples: loaded.into_iter().map(|(_, s)| s).collect() })
    }

    pub fn split(&self, split: Split) -> Vec<&Sample> {
        self.samples.iter().filter(|s| s.split == split).collect()
    }

    /// Normalization statistics of the training split.
    pub fn norm_stats(&self) -> Result<NormStats> {
        let train = self.split(Split::Train);
        if train.is_empty() {
            return Err(Error::EmptySplit(Split::Train));
        }
        NormStats::fit(train.iter().map(|s| &s.features.audio))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub seed: u64,
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_val_accuracy: f64,
    pub test_accuracy: Option<f64>,
    pub stopped_early: bool,
}

impl TrainReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,loss,val_loss,val_acc\n");
        for e in &self.epochs {
            let _ = writeln!(out, "{},{},{},{}", e.epoch, e.train_loss, e.val_loss, e.val_accuracy);
        }
        out
    }
}

/// Fraction of samples classified correctly at threshold 0.5.
pub fn evaluate_accuracy(model: &AlignmentModel, samples: &[&Sample], split: Split) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySplit(split));
    }
    let correct = samples
        .par_iter()
        .map(|s| Ok((model.logit(&s.features)? > 0.0) == s.label.aligned))
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .filter(|&c| c)
        .count();
    Ok(correct as f64 / samples.len() as f64)
}

/// Fresh model for `data` with normalization fitted on its training split.
pub fn init_model(data: &Dataset, hyper: Hyper) -> Result<AlignmentModel> {
    AlignmentModel::new(data.layout, data.mode, data.norm_stats()?, hyper)
}

/// Mini-batch SGD with momentum on the mean cross-entropy. The shuffling
/// order is drawn from `hyper.seed`; training stops once validation accuracy
/// has not improved for `hyper.patience` epochs. The returned weights are
/// those of the epoch with the best validation accuracy, ties going to the
/// lower validation loss.
pub fn train(mut model: AlignmentModel, data: &Dataset, hyper: Hyper) -> Result<(AlignmentModel, TrainReport)> {
    hyper.validate()?;
    let train = data.split(Split::Train);
    let val = data.split(Split::Val);
    if train.is_empty() {
        return Err(Error::EmptySplit(Split::Train));
    }
    if val.is_empty() {
        return Err(Error::EmptySplit(Split::Val));
    }
    model.hyper = hyper;
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed ^ 0x5348_5546_464c_4521);
    let mut velocity = Params::zeros(model.audio_dim, model.hidden);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut report = TrainReport {
        seed: hyper.seed,
        epochs: Vec::new(),
        best_epoch: 0,
        best_val_accuracy: f64::NEG_INFINITY,
        test_accuracy: None,
        stopped_early: false,
    };
    let mut best = model.params.clone();
    let mut best_val_loss = f64::INFINITY;
    let mut stale = 0;
    let val_batch: Vec<(&FeatureSequence, f64)> = val.iter().map(|s| (&s.features, s.label.target())).collect();
    for epoch in 1..=hyper.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(hyper.batch) {
            let batch: Vec<(&FeatureSequence, f64)> =
                chunk.iter().map(|&i| (&train[i].features, train[i].label.target())).collect();
            let (loss, grad) = model.loss_and_grad(&batch)?;
            total += loss * chunk.len() as f64;
            velocity.scale(hyper.momentum);
            velocity.add_scaled(-hyper.lr, &grad);
            model.params.add_scaled(1.0, &velocity);
        }
        let train_loss = total / train.len() as f64;
        if !train_loss.is_finite() || !model.params.is_finite() {
            log::error!("training diverged at epoch {epoch}");
            return Err(Error::Diverged { epoch });
        }
        let val_accuracy = evaluate_accuracy(&model, &val, Split::Val)?;
        let val_loss = model.loss(&val_batch)?;
        log::debug!("epoch {epoch}: loss {train_loss:.5} val_loss {val_loss:.5} val_acc {val_accuracy:.4}");
        report.epochs.push(EpochRecord { epoch, train_loss, val_loss, val_accuracy });
        let improved = val_accuracy > report.best_val_accuracy;
        if improved || (val_accuracy == report.best_val_accuracy && val_loss < best_val_loss) {
            report.best_val_accuracy = val_accuracy;
            report.best_epoch = epoch;
            best_val_loss = val_loss;
            best.clone_from(&model.params);
        }
        if improved {
            stale = 0;
        } else {
            stale += 1;
            if stale >= hyper.patience {
                report.stopped_early = true;
                break;
            }
        }
    }
    model.params = best;
    model.trained = true;
    let test = data.split(Split::Test);
    if !test.is_empty() {
        report.test_accuracy = Some(evaluate_accuracy(&model, &test, Split::Test)?);
    }
    Ok((model, report))
}

pub fn save_checkpoint(model: &AlignmentModel, path: &Path) -> Result<()> {
    let mut s = serde_json::to_string_pretty(model)?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<AlignmentModel> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => e.into(),
    })?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let found = value.get("format_version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
    if found != CHECKPOINT_VERSION {
        return Err(Error::Version { expected: CHECKPOINT_VERSION, found });
    }
    let model: AlignmentModel = serde_json::from_value(value)?;
    if !model.params.is_finite() {
        return Err(Error::Schema("checkpoint has non-finite parameters".into()));
    }
    Ok(model)
}
