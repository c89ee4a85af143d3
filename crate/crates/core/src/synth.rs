//! Synthetic scenes with exact ground truth: a source signal, an azimuth
//! track, and the binaural or first-order ambisonic audio they produce.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audio::{trajectory_grid, save_manifest, save_trajectory, wrap_pi, write_wav, AzimuthRange, WavEncoding};
use crate::transforms::{make_training_example, NegativeConfig};
use crate::{
    AlignmentLabel, AudioClip, DatasetManifest, Error, Layout, ManifestEntry, PretextMode, Result,
    SourceTrajectory, Split, SAMPLE_RATE_HZ,
};

pub const ALL_TRAJECTORY_KINDS: [TrajectoryKind; 3] =
    [TrajectoryKind::Static, TrajectoryKind::LinearSweep, TrajectoryKind::RandomWalk];

pub const ALL_SOURCE_KINDS: [SourceKind; 3] = [SourceKind::WhiteNoiseBursts, SourceKind::AmTone, SourceKind::ClickTrain];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    WhiteNoiseBursts,
    AmTone,
    ClickTrain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryKind {
    Static,
    LinearSweep,
    RandomWalk,
}

/// Random-walk step spread and clamp.
pub const WALK_STEP_SIGMA_RAD: f64 = 5.0 * PI / 180.0;
pub const WALK_STEP_CLAMP_RAD: f64 = 3.0 * WALK_STEP_SIGMA_RAD;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneParams {
    pub duration_s: f64,
    pub source_kind: SourceKind,
    pub trajectory_kind: TrajectoryKind,
    /// Signal-to-diffuse-noise ratio; `None` renders a clean scene.
    pub snr_db: Option<f64>,
    pub head_radius_m: f64,
    pub speed_of_sound_mps: f64,
    pub ild_max_db: f64,
    /// When false the binaural renderer applies level differences only.
    pub itd_enabled: bool,
}

impl Default for SceneParams {
    fn default() -> Self {
        Self {
            duration_s: 3.0,
            source_kind: SourceKind::WhiteNoiseBursts,
            trajectory_kind: TrajectoryKind::Static,
            snr_db: None,
            head_radius_m: 0.0875,
            speed_of_sound_mps: 343.0,
            ild_max_db: 10.0,
            itd_enabled: true,
        }
    }
}

impl SceneParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(Error::InvalidParams("duration_s must be positive".into()));
        }
        if let Some(snr) = self.snr_db {
            if !(snr >= 0.0) {
                return Err(Error::InvalidParams("snr_db must be >= 0".into()));
            }
        }
        if !(self.head_radius_m > 0.0 && self.speed_of_sound_mps > 0.0) {
            return Err(Error::InvalidParams("head radius and speed of sound must be positive".into()));
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        (self.duration_s * SAMPLE_RATE_HZ as f64).round() as usize
    }

    /// Spherical-head (Woodworth) interaural delay in seconds for azimuth φ.
    pub fn woodworth_itd_s(&self, azimuth_rad: f64) -> f64 {
        self.head_radius_m / self.speed_of_sound_mps * (azimuth_rad + azimuth_rad.sin())
    }

    /// Left and right amplitude gains; their ratio is `ild_max · sinφ` dB.
    pub fn ild_gains(&self, azimuth_rad: f64) -> (f64, f64) {
        let e = self.ild_max_db * azimuth_rad.sin() / 40.0;
        (10f64.powf(-e), 10f64.powf(e))
    }
}

/// Linear track between two azimuths on the 6 Hz grid; both endpoints are
/// reproduced exactly.
pub fn linear_sweep(start_rad: f64, end_rad: f64, duration_s: f64) -> SourceTrajectory {
    let times_s = trajectory_grid(duration_s);
    let last = (times_s.len() - 1).max(1) as f64;
    let azimuth_rad = (0..times_s.len())
        .map(|i| {
            let f = i as f64 / last;
            start_rad * (1.0 - f) + end_rad * f
        })
        .collect();
    let n = times_s.len();
    SourceTrajectory { times_s, azimuth_rad, elevation_rad: vec![0.0; n] }
}

fn uniform_azimuth<R: Rng + ?Sized>(rng: &mut R, range: AzimuthRange) -> f64 {
    match range {
        AzimuthRange::Frontal => rng.random_range(-FRAC_PI_2..=FRAC_PI_2),
        AzimuthRange::Full => rng.random_range(-PI..PI),
    }
}

pub fn sample_trajectory<R: Rng + ?Sized>(rng: &mut R, params: &SceneParams, range: AzimuthRange) -> SourceTrajectory {
    match params.trajectory_kind {
        TrajectoryKind::Static => SourceTrajectory::constant(uniform_azimuth(rng, range), params.duration_s),
        TrajectoryKind::LinearSweep => {
            let a = uniform_azimuth(rng, range);
            let b = uniform_azimuth(rng, range);
            linear_sweep(a, b, params.duration_s)
        }
        TrajectoryKind::RandomWalk => {
            let times_s = trajectory_grid(params.duration_s);
            let step = Normal::new(0.0, WALK_STEP_SIGMA_RAD).expect("valid sigma");
            let mut az = uniform_azimuth(rng, range);
            let mut azimuth_rad = Vec::with_capacity(times_s.len());
            for _ in 0..times_s.len() {
                azimuth_rad.push(az);
                let d = step.sample(rng).clamp(-WALK_STEP_CLAMP_RAD, WALK_STEP_CLAMP_RAD);
                az = match range {
                    AzimuthRange::Frontal => (az + d).clamp(-FRAC_PI_2, FRAC_PI_2),
                    AzimuthRange::Full => wrap_pi(az + d),
                };
            }
            let n = times_s.len();
            SourceTrajectory { times_s, azimuth_rad, elevation_rad: vec![0.0; n] }
        }
    }
}

/// What was drawn for a source signal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceDescriptor {
    WhiteNoiseBursts { duty: f64, bursts: usize },
    AmTone { carrier_hz: f64, am_hz: f64, depth: f64 },
    ClickTrain { rate_hz: f64, clicks: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SourceSignal {
    pub samples: Vec<f64>,
    pub descriptor: SourceDescriptor,
}

pub const SOURCE_PEAK: f64 = 0.5;
const RAMP_S: f64 = 0.010;
const CLICK_S: f64 = 0.002;

/// Raised-cosine onset/offset over `ramp` samples at each end.
fn ramped(len: usize, ramp: usize, i: usize) -> f64 {
    let r = ramp.min(len / 2).max(1);
    let edge = i.min(len - 1 - i);
    if edge >= r {
        1.0
    } else {
        0.5 - 0.5 * (PI * edge as f64 / r as f64).cos()
    }
}

pub fn sample_source_signal<R: Rng + ?Sized>(rng: &mut R, kind: SourceKind, duration_s: f64) -> SourceSignal {
    let sr = SAMPLE_RATE_HZ as f64;
    let n = (duration_s * sr).round() as usize;
    let mut samples = vec![0.0; n];
    let descriptor = match kind {
        SourceKind::WhiteNoiseBursts => {
            let duty = rng.random_range(0.3..=0.7);
            let ramp = (RAMP_S * sr) as usize;
            let mut bursts = 0;
            let first_len = rng.random_range(0.05..=0.3) * sr;
            let mut pos = (rng.random_range(0.0..1.0) * first_len * (1.0 - duty) / duty) as usize;
            while pos < n {
                let len = (rng.random_range(0.05..=0.3) * sr) as usize;
                let end = (pos + len).min(n);
                for i in pos..end {
                    let g: f64 = StandardNormal.sample(rng);
                    samples[i] = g * ramped(len, ramp, i - pos);
                }
                bursts += 1;
                pos += len + (len as f64 * (1.0 - duty) / duty) as usize;
            }
            SourceDescriptor::WhiteNoiseBursts { duty, bursts }
        }
        SourceKind::AmTone => {
            let carrier_hz = rng.random_range(300.0..=3000.0);
            let am_hz = rng.random_range(2.0..=8.0);
            let depth = rng.random_range(0.5..=1.0);
            let (p0, p1) = (rng.random_range(0.0..TAU), rng.random_range(0.0..TAU));
            for (i, s) in samples.iter_mut().enumerate() {
                let t = i as f64 / sr;
                let env = 1.0 + depth * (TAU * am_hz * t + p0).sin();
                *s = env * (TAU * carrier_hz * t + p1).sin();
            }
            SourceDescriptor::AmTone { carrier_hz, am_hz, depth }
        }
        SourceKind::ClickTrain => {
            let rate_hz = rng.random_range(8.0..=20.0);
            let period = sr / rate_hz;
            let click = (CLICK_S * sr) as usize;
            let mut onset = rng.random_range(0.0..period);
            let mut clicks = 0;
            while (onset as usize) < n {
                let start = onset as usize;
                for k in 0..click.min(n - start) {
                    let g: f64 = StandardNormal.sample(rng);
                    let w = 0.5 - 0.5 * (TAU * k as f64 / click as f64).cos();
                    samples[start + k] = g * w;
                }
                clicks += 1;
                onset += period;
            }
            SourceDescriptor::ClickTrain { rate_hz, clicks }
        }
    };
    let peak = samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if peak > 0.0 {
        samples.iter_mut().for_each(|s| *s *= SOURCE_PEAK / peak);
    }
    SourceSignal { samples, descriptor }
}

/// Linear-interpolated read at a fractional position; zero outside the signal.
fn read_fractional(x: &[f64], pos: f64) -> f64 {
    let i = pos.floor();
    let frac = pos - i;
    let at = |k: f64| -> f64 {
        if k < 0.0 || k >= x.len() as f64 {
            0.0
        } else {
            x[k as usize]
        }
    };
    if frac == 0.0 {
        at(i)
    } else {
        at(i) * (1.0 - frac) + at(i + 1.0) * frac
    }
}

fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }
}

fn add_noise<R: Rng + ?Sized>(rng: &mut R, channel: &mut [f64], std: f64) {
    for s in channel.iter_mut() {
        let g: f64 = StandardNormal.sample(rng);
        *s += g * std;
    }
}

/// Spherical-head binaural rendering: a Woodworth delay split ±τ/2 between
/// the ears (right ear leads for φ > 0) and frequency-independent level
/// gains, then optional independent white noise per ear.
pub fn render_binaural<R: Rng + ?Sized>(
    source: &[f64],
    traj: &SourceTrajectory,
    params: &SceneParams,
    rng: &mut R,
) -> Result<AudioClip> {
    traj.check_covers(source.len(), SAMPLE_RATE_HZ)?;
    let sr = SAMPLE_RATE_HZ as f64;
    let track = traj.azimuth_track(source.len(), SAMPLE_RATE_HZ);
    let mut left = Vec::with_capacity(source.len());
    let mut right = Vec::with_capacity(source.len());
    let (mut last, mut half_delay, mut gl, mut gr) = (f64::NAN, 0.0, 1.0, 1.0);
    for n in 0..source.len() {
        let phi = track[n].clamp(-FRAC_PI_2, FRAC_PI_2);
        if phi != last {
            half_delay = if params.itd_enabled { params.woodworth_itd_s(phi) * sr / 2.0 } else { 0.0 };
            (gl, gr) = params.ild_gains(phi);
            last = phi;
        }
        left.push(gl * read_fractional(source, n as f64 - half_delay));
        right.push(gr * read_fractional(source, n as f64 + half_delay));
    }
    if let Some(snr) = params.snr_db {
        let std = rms(source) * 10f64.powf(-snr / 20.0);
        add_noise(rng, &mut left, std);
        add_noise(rng, &mut right, std);
    }
    AudioClip::stereo(left, right)
}

/// First-order ambisonic encoding (ACN order, SN3D):
/// `w = s, y = s·sinφ·cosε, z = s·sinε, x = s·cosφ·cosε`.
///
/// Optional diffuse noise is independent per channel with the directional
/// channels scaled by 1/√3.
pub fn encode_foa<R: Rng + ?Sized>(
    source: &[f64],
    traj: &SourceTrajectory,
    params: &SceneParams,
    rng: &mut R,
) -> Result<AudioClip> {
    traj.check_covers(source.len(), SAMPLE_RATE_HZ)?;
    let sr = SAMPLE_RATE_HZ as f64;
    let n = source.len();
    let (mut w, mut y, mut z, mut x) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    let track = traj.azimuth_track(n, SAMPLE_RATE_HZ);
    let elevated = traj.has_elevation();
    for (i, &s) in source.iter().enumerate() {
        let (sa, ca) = track[i].sin_cos();
        let (se, ce) = if elevated { traj.elevation_at(i as f64 / sr).sin_cos() } else { (0.0, 1.0) };
        w.push(s);
        y.push(s * sa * ce);
        z.push(s * se);
        x.push(s * ca * ce);
    }
    if let Some(snr) = params.snr_db {
        let std = rms(source) * 10f64.powf(-snr / 20.0);
        add_noise(rng, &mut w, std);
        for c in [&mut y, &mut z, &mut x] {
            add_noise(rng, c, std / 3f64.sqrt());
        }
    }
    AudioClip::foa(w, y, z, x)
}

/// An aligned scene before any pretext transform.
#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub trajectory: SourceTrajectory,
    pub audio: AudioClip,
    pub source: SourceSignal,
}

/// Draws a trajectory and source and renders them for `layout`.
pub fn render_scene<R: Rng + ?Sized>(rng: &mut R, params: &SceneParams, layout: Layout) -> Result<Scene> {
    params.validate()?;
    let trajectory = sample_trajectory(rng, params, AzimuthRange::for_layout(layout));
    render_scene_with(rng, params, layout, trajectory)
}

/// Renders a scene along a given trajectory.
pub fn render_scene_with<R: Rng + ?Sized>(
    rng: &mut R,
    params: &SceneParams,
    layout: Layout,
    trajectory: SourceTrajectory,
) -> Result<Scene> {
    params.validate()?;
    let source = sample_source_signal(rng, params.source_kind, params.duration_s);
    let audio = match layout {
        Layout::Stereo => render_binaural(&source.samples, &trajectory, params, rng)?,
        Layout::Foa => encode_foa(&source.samples, &trajectory, params, rng)?,
        Layout::Mono => AudioClip::mono(source.samples.clone())?,
    };
    Ok(Scene { trajectory, audio, source })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self { train: 0.8, val: 0.1 }
    }
}

impl SplitRatios {
    /// Split of the `i`-th of `n` entries; train first, then val, then test.
    pub fn assign(&self, i: usize, n: usize) -> Split {
        let n_train = (self.train * n as f64).round() as usize;
        let n_val = (self.val * n as f64).round() as usize;
        if i < n_train {
            Split::Train
        } else if i < n_train + n_val {
            Split::Val
        } else {
            Split::Test
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationConfig {
    pub scene: SceneParams,
    pub n: usize,
    pub mode: PretextMode,
    pub master_seed: u64,
    pub negatives: NegativeConfig,
    pub split: SplitRatios,
    /// When non-empty, each scene draws its source kind uniformly from this
    /// list instead of using `scene.source_kind`.
    pub source_kinds: Vec<SourceKind>,
    /// Same for the trajectory kind.
    pub trajectory_kinds: Vec<TrajectoryKind>,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            scene: SceneParams::default(),
            n: 100,
            mode: PretextMode::Flip,
            master_seed: 0,
            negatives: NegativeConfig::default(),
            split: SplitRatios::default(),
            source_kinds: Vec::new(),
            trajectory_kinds: Vec::new(),
        }
    }
}

/// Stable per-entry seed from the master seed and the entry id.
pub fn entry_seed(master: u64, id: &str) -> u64 {
    // FNV-1a over the id, then a splitmix64 finalizer
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in id.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = master ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn entry_id(i: usize) -> String {
    format!("scene_{i:06}")
}

/// One generated pretext example, audio already snapped to the float32 grid
/// so that it matches what [`generate_dataset`] writes.
#[derive(Clone, Debug, PartialEq)]
pub struct Example {
    pub id: String,
    pub scene_seed: u64,
    pub split: Split,
    pub trajectory: SourceTrajectory,
    pub audio: AudioClip,
    pub label: AlignmentLabel,
}

pub fn generate_example(cfg: &GenerationConfig, i: usize) -> Result<Example> {
    let id = entry_id(i);
    let scene_seed = entry_seed(cfg.master_seed, &id);
    let mut rng = ChaCha8Rng::seed_from_u64(scene_seed);
    let mut params = cfg.scene;
    if !cfg.source_kinds.is_empty() {
        params.source_kind = cfg.source_kinds[rng.random_range(0..cfg.source_kinds.len())];
    }
    if !cfg.trajectory_kinds.is_empty() {
        params.trajectory_kind = cfg.trajectory_kinds[rng.random_range(0..cfg.trajectory_kinds.len())];
    }
    let scene = render_scene(&mut rng, &params, cfg.mode.layout())?;
    let ex = make_training_example(&scene.trajectory, &scene.audio, cfg.mode, &cfg.negatives, &mut rng)?;
    Ok(Example {
        split: cfg.split.assign(i, cfg.n),
        id,
        scene_seed,
        trajectory: ex.trajectory,
        audio: ex.audio.quantize_f32(),
        label: ex.label,
    })
}

/// Renders all `cfg.n` examples in memory (in parallel; output does not
/// depend on thread count).
pub fn generate_examples(cfg: &GenerationConfig) -> Result<Vec<Example>> {
    if cfg.n == 0 {
        return Err(Error::InvalidParams("n must be positive".into()));
    }
    cfg.scene.validate()?;
    (0..cfg.n).into_par_iter().map(|i| generate_example(cfg, i)).collect()
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Renders the dataset into `out_dir` as `audio/<id>.wav`,
/// `trajectories/<id>.json` and `manifest.json`.
pub fn generate_dataset(cfg: &GenerationConfig, out_dir: &Path) -> Result<DatasetManifest> {
    let examples = generate_examples(cfg)?;
    std::fs::create_dir_all(out_dir.join("audio"))?;
    std::fs::create_dir_all(out_dir.join("trajectories"))?;
    let entries = examples
        .par_iter()
        .map(|ex| {
            let audio_path = format!("audio/{}.wav", ex.id);
            let trajectory_path = format!("trajectories/{}.json", ex.id);
            write_wav(&ex.audio, &out_dir.join(&audio_path), WavEncoding::Float32)?;
            save_trajectory(&ex.trajectory, &out_dir.join(&trajectory_path))?;
            Ok(ManifestEntry {
                id: ex.id.clone(),
                audio_path,
                trajectory_path,
                label: ex.label,
                scene_seed: ex.scene_seed,
                split: ex.split,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = DatasetManifest { entries, ..Default::default() };
    save_manifest(&manifest, &out_dir.join(MANIFEST_FILE))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{gcc_phat, ild_db};
    use crate::transforms::{rotate_foa, RotationAngle};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn static_track_is_constant() {
        let p = SceneParams::default();
        let t = sample_trajectory(&mut rng(1), &p, AzimuthRange::Frontal);
        assert!(t.azimuth_rad.iter().all(|&a| a == t.azimuth_rad[0]));
        assert_eq!(t.len(), 19);
    }

    #[test]
    fn sweep_endpoints_exact() {
        let (a, b) = (-60f64.to_radians(), 60f64.to_radians());
        let t = linear_sweep(a, b, 3.0);
        assert_eq!(t.len(), 19);
        assert_eq!(t.azimuth_rad[0], a);
        assert_eq!(t.azimuth_rad[18], b);
    }

    #[test]
    fn random_walk_steps_clamped() {
        let p = SceneParams { trajectory_kind: TrajectoryKind::RandomWalk, duration_s: 30.0, ..Default::default() };
        for seed in 0..20 {
            let t = sample_trajectory(&mut rng(seed), &p, AzimuthRange::Frontal);
            for w in t.azimuth_rad.windows(2) {
                assert!((w[1] - w[0]).abs() <= WALK_STEP_CLAMP_RAD + 1e-12);
            }
            t.check_range(AzimuthRange::Frontal).unwrap();
        }
    }

    #[test]
    fn source_peaks_normalized() {
        for kind in [SourceKind::WhiteNoiseBursts, SourceKind::AmTone, SourceKind::ClickTrain] {
            for seed in 0..5 {
                let s = sample_source_signal(&mut rng(seed), kind, 3.0);
                let peak = s.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                assert!((peak - 0.5).abs() < 1e-6, "{kind:?}");
                assert_eq!(s.samples.len(), 48_000);
            }
        }
    }

    #[test]
    fn click_count_matches_rate() {
        for seed in 0..20 {
            let s = sample_source_signal(&mut rng(seed), SourceKind::ClickTrain, 3.0);
            let SourceDescriptor::ClickTrain { rate_hz, clicks } = s.descriptor else { panic!() };
            assert!((clicks as f64 - rate_hz * 3.0).abs() <= 1.0, "{clicks} vs {rate_hz}");
        }
    }

    #[test]
    fn different_seeds_differ() {
        let a = sample_source_signal(&mut rng(1), SourceKind::WhiteNoiseBursts, 1.0);
        let b = sample_source_signal(&mut rng(2), SourceKind::WhiteNoiseBursts, 1.0);
        let d = a.samples.iter().zip(&b.samples).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(d > 0.01);
    }

    #[test]
    fn centered_source_renders_identical_ears() {
        let p = SceneParams::default();
        let s = sample_source_signal(&mut rng(3), SourceKind::WhiteNoiseBursts, 3.0);
        let clip = render_binaural(&s.samples, &SourceTrajectory::constant(0.0, 3.0), &p, &mut rng(0)).unwrap();
        assert_eq!(clip.left(), clip.right());
    }

    #[test]
    fn hard_right_itd_and_ild() {
        let p = SceneParams::default();
        // Woodworth: (0.0875 / 343) * (π/2 + 1) ≈ 655.9 µs ≈ 10.49 samples
        let tau = p.woodworth_itd_s(FRAC_PI_2);
        assert!((tau * 1e6 - 655.9).abs() < 0.1);
        let mut r = rng(4);
        let noise: Vec<f64> = (0..48_000).map(|_| StandardNormal.sample(&mut r)).collect::<Vec<f64>>().iter().map(|v| v * 0.1).collect();
        let clip = render_binaural(&noise, &SourceTrajectory::constant(FRAC_PI_2, 3.0), &p, &mut r).unwrap();
        // the left ear lags the right
        let frame = 24_000..24_512;
        let g = gcc_phat(&clip.right()[frame.clone()], &clip.left()[frame], 16).unwrap();
        assert!(g.lag == 10 || g.lag == 11, "{}", g.lag);
        assert!((ild_db(clip.left(), clip.right()) - 10.0).abs() < 0.1);
    }

    #[test]
    fn foa_encoding_cases() {
        let p = SceneParams::default();
        let s = sample_source_signal(&mut rng(5), SourceKind::AmTone, 1.0).samples;
        let c = encode_foa(&s, &SourceTrajectory::constant(0.0, 1.0), &p, &mut rng(0)).unwrap();
        assert!(c.channel(AudioClip::Y).iter().all(|&v| v == 0.0));
        assert_eq!(c.channel(AudioClip::X), c.channel(AudioClip::W));
        assert_eq!(c.channel(AudioClip::W), &s[..]);
        let c = encode_foa(&s, &SourceTrajectory::constant(FRAC_PI_2, 1.0), &p, &mut rng(0)).unwrap();
        assert!(c.channel(AudioClip::X).iter().zip(&s).all(|(x, s)| x.abs() <= 1e-16 * s.abs().max(1.0)));
        assert_eq!(c.channel(AudioClip::Y), &s[..]);
    }

    #[test]
    fn rotation_matches_re_encoding() {
        let p = SceneParams::default();
        let s = sample_source_signal(&mut rng(6), SourceKind::WhiteNoiseBursts, 1.0).samples;
        let (phi, theta) = (0.4, 2.1);
        let a = encode_foa(&s, &SourceTrajectory::constant(phi, 1.0), &p, &mut rng(0)).unwrap();
        let rotated = rotate_foa(&a, RotationAngle::new(theta)).unwrap();
        let direct = encode_foa(&s, &SourceTrajectory::constant(phi + theta, 1.0), &p, &mut rng(0)).unwrap();
        for (u, v) in rotated.channels().iter().flatten().zip(direct.channels().iter().flatten()) {
            assert!((u - v).abs() <= 1e-9);
        }
    }

    #[test]
    fn short_trajectory_rejected() {
        let p = SceneParams::default();
        let s = vec![0.0; 48_000];
        let t = SourceTrajectory::constant(0.0, 1.0);
        assert!(matches!(render_binaural(&s, &t, &p, &mut rng(0)), Err(Error::Coverage { .. })));
        assert!(matches!(encode_foa(&s, &t, &p, &mut rng(0)), Err(Error::Coverage { .. })));
    }

    #[test]
    fn split_ratios() {
        let r = SplitRatios::default();
        let mut counts = [0; 3];
        for i in 0..100 {
            counts[r.assign(i, 100) as usize] += 1;
        }
        assert_eq!(counts, [80, 10, 10]);
    }

    #[test]
    fn entry_seed_is_stable_and_distinct() {
        assert_eq!(entry_seed(7, "scene_000001"), entry_seed(7, "scene_000001"));
        assert_ne!(entry_seed(7, "scene_000001"), entry_seed(7, "scene_000002"));
        assert_ne!(entry_seed(7, "scene_000001"), entry_seed(8, "scene_000001"));
    }
}
