use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::Serialize;
use serde_json::{json, Value};
use spatialign::downstream::{
    doa_from_gcc, doa_from_intensity, ideal_mask, rotation_alignment, separate_spatial, upmix_learned, upmix_oracle,
    LearnedUpmix,
};
use spatialign::model::{
    evaluate_accuracy, init_model, load_checkpoint, pca, save_checkpoint, train, Dataset,
};
use spatialign::metrics::{pearson, spearman};
use spatialign::synth::generate_dataset;
use spatialign::transforms::{downmix_to_mono, mix_clips};
use spatialign::audio::{load_manifest, load_trajectory, read_wav, write_wav, WavEncoding};
use spatialign::{AudioClip, DatasetManifest, Error, Layout, ManifestEntry, SourceTrajectory, Spectrogram, Split};

use crate::config::{write_json, RunConfig};
use crate::{Command, Common};

/// Metric files `report` collects, in the order they are listed.
const METRIC_FILES: [&str; 8] =
    ["gen.json", "train_report.json", "eval.json", "analyze.json", "doa.json", "align.json", "upmix.json", "separation.json"];

const ACTIVE_FRAME_REL: f64 = 1e-3;
const TRACK_BIN_DEG: f64 = 10.0;

pub fn run(common: &Common, cmd: Command) -> anyhow::Result<()> {
    let cfg = RunConfig::load(common.config.as_deref())?.resolve(common.seed, None);
    let out = common.out.clone().or_else(|| cfg.output_dir.clone());
    if let Some(dir) = &out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let out = out.as_deref();
    match cmd {
        Command::Gen { n, mode, snr_db } => gen(cfg, out, n, mode.map(Into::into), snr_db),
        Command::Train { manifest } => train_cmd(&cfg, out, &manifest),
        Command::Eval { checkpoint, manifest } => eval(&cfg, out, &checkpoint, &manifest),
        Command::Analyze { checkpoint, manifest, split, track_csv } => {
            analyze(&cfg, out, &checkpoint, &manifest, split.into(), track_csv)
        }
        Command::Doa { input } => doa(&cfg, out, &input),
        Command::Align { input, trajectory, checkpoint, grid_deg, truth_deg } => {
            align(cfg, out, &input, &trajectory, &checkpoint, grid_deg, truth_deg)
        }
        Command::Upmix { manifest, wav } => upmix(&cfg, out, &manifest, wav),
        Command::Separate { manifest, wav } => separate(&cfg, out, &manifest, wav),
        Command::Report { run_dir } => report(&run_dir),
    }
}

fn kind(e: &Error) -> &'static str {
    match e {
        Error::Io(_) | Error::MissingFile(_) => "io",
        Error::Json(_) | Error::Schema(_) | Error::DuplicateId(_) => "schema",
        Error::Version { .. } => "version",
        Error::EmptySplit(_) => "empty_split",
        Error::Untrained => "untrained",
        Error::Diverged { .. } => "diverged",
        Error::Degenerate(_) => "degenerate",
        Error::InvalidParams(_) => "invalid_params",
        Error::Layout { .. } => "layout",
        _ => "invalid_input",
    }
}

/// One-line JSON describing a failure.
pub fn error_json(e: &anyhow::Error) -> String {
    let kind = e.chain().find_map(|c| c.downcast_ref::<Error>()).map_or("other", kind);
    let causes: Vec<String> = e.chain().skip(1).map(ToString::to_string).collect();
    json!({ "error": e.to_string(), "kind": kind, "causes": causes }).to_string()
}

fn require_out(out: Option<&Path>) -> anyhow::Result<&Path> {
    out.ok_or_else(|| anyhow::anyhow!("--out is required for this command"))
}

/// Prints `value` and, with an output directory, writes it there as `file`.
fn emit<T: Serialize>(out: Option<&Path>, file: &str, value: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    if let Some(dir) = out {
        write_json(&dir.join(file), value)?;
    }
    Ok(())
}

fn write_text(out: Option<&Path>, file: &str, text: &str) -> anyhow::Result<()> {
    if let Some(dir) = out {
        let path = dir.join(file);
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn write_config(cfg: &RunConfig, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(dir) => cfg.write(dir),
        None => Ok(()),
    }
}

fn manifest_base(path: &Path) -> PathBuf {
    path.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf)
}

fn split_name(s: Split) -> &'static str {
    match s {
        Split::Train => "train",
        Split::Val => "val",
        Split::Test => "test",
    }
}

fn gen(
    mut cfg: RunConfig,
    out: Option<&Path>,
    n: Option<usize>,
    mode: Option<spatialign::PretextMode>,
    snr_db: Option<f64>,
) -> anyhow::Result<()> {
    let out = require_out(out)?;
    if let Some(n) = n {
        cfg.generation.n = n;
    }
    if let Some(m) = mode {
        cfg.generation.mode = m;
    }
    if snr_db.is_some() {
        cfg.generation.scene.snr_db = snr_db;
    }
    let manifest = generate_dataset(&cfg.generation, out)?;
    cfg.write(out)?;
    let [train, val, test] = manifest.split_counts();
    let summary = json!({
        "entries": manifest.entries.len(),
        "aligned": manifest.entries.iter().filter(|e| e.label.aligned).count(),
        "splits": { "train": train, "val": val, "test": test },
    });
    emit(Some(out), "gen.json", &summary)
}

fn load_dataset(manifest_path: &Path, model_mode: spatialign::FeatureMode, cfg: &RunConfig) -> anyhow::Result<Dataset> {
    let manifest = load_manifest(manifest_path)?;
    Ok(Dataset::from_manifest(&manifest, &manifest_base(manifest_path), model_mode, &cfg.cues)?)
}

fn train_cmd(cfg: &RunConfig, out: Option<&Path>, manifest: &Path) -> anyhow::Result<()> {
    let out = require_out(out)?;
    let data = load_dataset(manifest, cfg.feature_mode, cfg)?;
    let model = init_model(&data, cfg.hyper)?;
    let (model, report) = train(model, &data, cfg.hyper)?;
    save_checkpoint(&model, &out.join("checkpoint.json"))?;
    write_text(Some(out), "train_log.csv", &report.to_csv())?;
    cfg.write(out)?;
    emit(Some(out), "train_report.json", &report)
}

fn eval(cfg: &RunConfig, out: Option<&Path>, checkpoint: &Path, manifest: &Path) -> anyhow::Result<()> {
    let model = load_checkpoint(checkpoint)?;
    let data = load_dataset(manifest, model.feature_mode, cfg)?;
    let mut accuracy = BTreeMap::new();
    let mut counts = BTreeMap::new();
    for split in [Split::Train, Split::Val, Split::Test] {
        let samples = data.split(split);
        if !samples.is_empty() {
            accuracy.insert(split_name(split), evaluate_accuracy(&model, &samples, split)?);
            counts.insert(split_name(split), samples.len());
        }
    }
    if accuracy.is_empty() {
        return Err(Error::EmptySplit(Split::Test).into());
    }
    write_config(cfg, out)?;
    emit(out, "eval.json", &json!({ "accuracy": accuracy, "examples": counts }))
}

fn analyze(
    cfg: &RunConfig,
    out: Option<&Path>,
    checkpoint: &Path,
    manifest: &Path,
    split: Split,
    track_csv: bool,
) -> anyhow::Result<()> {
    let model = load_checkpoint(checkpoint)?;
    let data = load_dataset(manifest, model.feature_mode, cfg)?;
    // misaligned clips carry a trajectory that no longer describes the audio
    let samples: Vec<_> = data.split(split).into_iter().filter(|s| s.label.aligned).collect();
    if samples.is_empty() {
        return Err(Error::EmptySplit(split).into());
    }
    let mut rows = Vec::new();
    let mut azimuth = Vec::new();
    let mut owner = Vec::new();
    for (k, s) in samples.iter().enumerate() {
        let emb = model.embed(&s.features.audio)?;
        for t in s.features.audio.active_frames(ACTIVE_FRAME_REL) {
            rows.push(emb[t].clone());
            azimuth.push(s.features.azimuth_rad[t]);
            owner.push(k);
        }
    }
    let fit = pca(&rows, 2)?;
    let pc1: Vec<f64> = fit.projections.iter().map(|p| p[0]).collect();
    let summary = json!({
        "split": split_name(split),
        "clips": samples.len(),
        "frames": rows.len(),
        "explained_variance_ratio": fit.explained_variance_ratio,
        "spearman": spearman(&pc1, &azimuth)?,
        "pearson": pearson(&pc1, &azimuth)?,
    });
    if track_csv {
        let mut bins: BTreeMap<(usize, i64), (f64, usize)> = BTreeMap::new();
        for ((&k, &a), &p) in owner.iter().zip(&azimuth).zip(&pc1) {
            let bin = (a.to_degrees() / TRACK_BIN_DEG).floor() as i64;
            let e = bins.entry((k, bin)).or_insert((0.0, 0));
            e.0 += p;
            e.1 += 1;
        }
        let mut csv = String::from("id,azimuth_bin_deg,pc1_mean,frames\n");
        for ((k, bin), (sum, n)) in bins {
            let centre = (bin as f64 + 0.5) * TRACK_BIN_DEG;
            let _ = writeln!(csv, "{},{centre},{},{n}", samples[k].id, sum / n as f64);
        }
        write_text(out, "pc1_track.csv", &csv)?;
    }
    write_config(cfg, out)?;
    emit(out, "analyze.json", &summary)
}

fn doa(cfg: &RunConfig, out: Option<&Path>, input: &Path) -> anyhow::Result<()> {
    let clip = read_wav(input)?;
    let est = match clip.layout() {
        Layout::Stereo => doa_from_gcc(&clip, &cfg.generation.scene, &cfg.cues)?,
        Layout::Foa => doa_from_intensity(&clip, &cfg.cues)?,
        Layout::Mono => bail!(Error::InvalidParams("direction of arrival needs a stereo or FOA clip".into())),
    };
    let mut csv = String::from("frame,azimuth_deg,confidence,flagged\n");
    for t in 0..est.len() {
        let _ = writeln!(csv, "{t},{},{},{}", est.azimuth_rad[t].to_degrees(), est.confidence[t], est.flagged[t]);
    }
    write_text(out, "doa.csv", &csv)?;
    let summary = json!({
        "layout": clip.layout(),
        "frames": est.len(),
        "flagged": est.flagged.iter().filter(|&&f| f).count(),
        "median_deg": est.median_rad(0.0).map(f64::to_degrees),
        "circular_mean_deg": est.circular_mean_rad().map(f64::to_degrees),
    });
    write_config(cfg, out)?;
    emit(out, "doa.json", &summary)
}

fn align(
    mut cfg: RunConfig,
    out: Option<&Path>,
    input: &Path,
    trajectory: &Path,
    checkpoint: &Path,
    grid_deg: Option<f64>,
    truth_deg: Option<f64>,
) -> anyhow::Result<()> {
    if let Some(g) = grid_deg {
        cfg.align.grid_deg = g;
    }
    let clip = read_wav(input)?;
    let traj = load_trajectory(trajectory)?;
    let model = load_checkpoint(checkpoint)?;
    let est = rotation_alignment(&clip, &traj, &model, &cfg.align, truth_deg)?;
    let mut csv = String::from("theta_deg,score\n");
    for s in &est.scores {
        let _ = writeln!(csv, "{},{}", s.theta_deg, s.score);
    }
    write_text(out, "align_scores.csv", &csv)?;
    write_config(&cfg, out)?;
    emit(out, "align.json", &json!({
        "theta_hat_deg": est.theta_hat_deg,
        "confidence": est.confidence,
        "windows": est.windows,
        "error_deg": est.error_deg,
    }))
}

struct LoadedScene {
    id: String,
    audio: AudioClip,
    trajectory: SourceTrajectory,
}

/// Aligned stereo scenes of one split, with their audio and trajectories.
fn aligned_scenes(manifest: &DatasetManifest, base: &Path, split: Split) -> anyhow::Result<Vec<LoadedScene>> {
    manifest
        .split(split)
        .filter(|e| e.label.aligned)
        .map(|e: &ManifestEntry| {
            let audio = read_wav(&e.audio_path(base))?;
            if audio.layout() != Layout::Stereo {
                bail!(Error::Layout { expected: Layout::Stereo, found: audio.layout() });
            }
            Ok(LoadedScene { id: e.id.clone(), audio, trajectory: load_trajectory(&e.trajectory_path(base))? })
        })
        .collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn upmix(cfg: &RunConfig, out: Option<&Path>, manifest_path: &Path, wav: bool) -> anyhow::Result<()> {
    let manifest = load_manifest(manifest_path)?;
    let base = manifest_base(manifest_path);
    let train_scenes = aligned_scenes(&manifest, &base, Split::Train)?;
    let test_scenes = aligned_scenes(&manifest, &base, Split::Test)?;
    if train_scenes.is_empty() {
        return Err(Error::EmptySplit(Split::Train).into());
    }
    if test_scenes.is_empty() {
        return Err(Error::EmptySplit(Split::Test).into());
    }
    let pairs: Vec<(AudioClip, SourceTrajectory)> =
        train_scenes.into_iter().map(|s| (s.audio, s.trajectory)).collect();
    let model = LearnedUpmix::train(&pairs, &cfg.upmix)?;
    drop(pairs);

    let mut csv = String::from("id,learned_l1,baseline_l1,oracle_l1\n");
    let (mut learned, mut baseline, mut oracle) = (Vec::new(), Vec::new(), Vec::new());
    for s in &test_scenes {
        let mono = downmix_to_mono(&s.audio)?;
        let r = upmix_learned(&model, &mono, &s.trajectory, &s.audio)?;
        let o = upmix_oracle(&mono, &s.trajectory, &cfg.generation.scene, &s.audio, cfg.upmix.stft)?;
        let _ = writeln!(csv, "{},{},{},{}", s.id, r.l1_complex, r.baseline_l1, o.l1_complex);
        if wav {
            if let Some(dir) = out {
                write_wav(&r.predicted.to_clip()?, &dir.join(format!("upmix_{}.wav", s.id)), WavEncoding::Float32)?;
            }
        }
        learned.push(r.l1_complex);
        baseline.push(r.baseline_l1);
        oracle.push(o.l1_complex);
    }
    write_text(out, "upmix.csv", &csv)?;
    if let Some(dir) = out {
        write_json(&dir.join("upmix_model.json"), &model)?;
    }
    write_config(cfg, out)?;
    emit(out, "upmix.json", &json!({
        "test_scenes": test_scenes.len(),
        "learned_l1": mean(&learned),
        "baseline_l1": mean(&baseline),
        "oracle_l1": mean(&oracle),
        "learned_below_baseline": learned.iter().zip(&baseline).filter(|(l, b)| l < b).count(),
        "mask_weights": model.w,
        "mask_bias": model.b,
    }))
}

/// Mixture spectrogram scaled by a per-bin mask, back in the time domain.
fn masked_clip(mix: &Spectrogram, mask: &[f64]) -> anyhow::Result<AudioClip> {
    let channels = mix
        .channels()
        .iter()
        .map(|c| c.iter().zip(mask).map(|(x, m)| x * m).collect())
        .collect();
    let spec = Spectrogram::from_parts(mix.layout(), channels, mix.params(), mix.sample_rate_hz(), mix.n_samples())?;
    Ok(spec.to_clip()?)
}

fn separate(cfg: &RunConfig, out: Option<&Path>, manifest_path: &Path, wav: bool) -> anyhow::Result<()> {
    let manifest = load_manifest(manifest_path)?;
    let scenes = aligned_scenes(&manifest, &manifest_base(manifest_path), Split::Test)?;
    if scenes.len() < 2 {
        bail!(Error::EmptySplit(Split::Test));
    }
    let stft = cfg.cues.stft;
    let mut csv = String::from("id_a,id_b,spatial_l1_a,spatial_l1_b,baseline_l1_a,baseline_l1_b,ideal_l1,degenerate\n");
    let (mut spatial, mut baseline, mut ideal) = (Vec::new(), Vec::new(), Vec::new());
    let mut degenerate = 0;
    for pair in scenes.chunks_exact(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let mix = mix_clips(&a.audio, &b.audio)?;
        let r = separate_spatial(&mix, &a.trajectory, &b.trajectory, [&a.audio, &b.audio], &cfg.generation.scene, stft)?;
        let best = ideal_mask(&mix, [&a.audio, &b.audio], stft)?;
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            a.id, b.id, r.l1_magnitude[0], r.l1_magnitude[1], r.mixture_baseline_l1[0], r.mixture_baseline_l1[1], best.mean_l1, r.degenerate
        );
        if wav {
            if let Some(dir) = out {
                let spec = Spectrogram::from_clip(&mix, stft)?;
                let rest: Vec<f64> = r.mask.iter().map(|m| 1.0 - m).collect();
                write_wav(&masked_clip(&spec, &r.mask)?, &dir.join(format!("sep_{}.wav", a.id)), WavEncoding::Float32)?;
                write_wav(&masked_clip(&spec, &rest)?, &dir.join(format!("sep_{}.wav", b.id)), WavEncoding::Float32)?;
            }
        }
        degenerate += usize::from(r.degenerate);
        spatial.push(r.mean_l1);
        baseline.push(r.mean_baseline_l1);
        ideal.push(best.mean_l1);
    }
    write_text(out, "separation.csv", &csv)?;
    write_config(cfg, out)?;
    emit(out, "separation.json", &json!({
        "pairs": spatial.len(),
        "spatial_l1": mean(&spatial),
        "baseline_l1": mean(&baseline),
        "ideal_l1": mean(&ideal),
        "ratio_to_baseline": mean(&spatial) / mean(&baseline),
        "degenerate_pairs": degenerate,
    }))
}

/// Numeric leaves of a JSON object, keyed by dotted path. Arrays are skipped.
fn flatten(prefix: &str, v: &Value, into: &mut Vec<(String, f64)>) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, child, into);
            }
        }
        Value::Number(n) => {
            if let Some(x) = n.as_f64() {
                into.push((prefix.to_string(), x));
            }
        }
        Value::Bool(b) => into.push((prefix.to_string(), f64::from(u8::from(*b)))),
        _ => {}
    }
}

fn collect_metric_files(dir: &Path, found: &mut Vec<PathBuf>) -> anyhow::Result<()> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    entries.sort();
    for path in entries {
        if path.is_dir() {
            collect_metric_files(&path, found)?;
        } else if path.file_name().and_then(|n| n.to_str()).is_some_and(|n| METRIC_FILES.contains(&n)) {
            found.push(path);
        }
    }
    Ok(())
}

fn report(run_dir: &Path) -> anyhow::Result<()> {
    let mut files = Vec::new();
    collect_metric_files(run_dir, &mut files)?;
    if files.is_empty() {
        bail!(Error::InvalidParams(format!("no metric files under {}", run_dir.display())));
    }
    let mut rows = Vec::new();
    for path in &files {
        let text = std::fs::read_to_string(path)?;
        let value: Value = serde_json::from_str(&text).map_err(Error::from)?;
        let source = path.strip_prefix(run_dir).unwrap_or(path).to_string_lossy().replace('\\', "/");
        let mut leaves = Vec::new();
        flatten("", &value, &mut leaves);
        rows.extend(leaves.into_iter().map(|(k, v)| (source.clone(), k, v)));
    }
    let mut csv = String::from("source,metric,value\n");
    let mut md = String::from("| source | metric | value |\n|---|---|---|\n");
    for (source, metric, value) in &rows {
        let _ = writeln!(csv, "{source},{metric},{value}");
        let _ = writeln!(md, "| {source} | {metric} | {value:.6} |");
    }
    std::fs::write(run_dir.join("summary.csv"), csv)?;
    std::fs::write(run_dir.join("summary.md"), md)?;
    println!("{}", json!({ "files": files.len(), "metrics": rows.len() }));
    Ok(())
}
