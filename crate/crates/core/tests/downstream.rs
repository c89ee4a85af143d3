use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spatialign::downstream::*;
use spatialign::dsp::CueParams;
use spatialign::metrics::circular_error_deg;
use spatialign::model::{init_model, train, Dataset, NormStats};
use spatialign::synth::*;
use spatialign::transforms::*;
use spatialign::*;

/// A small rotation model shared by the alignment tests.
fn foa_model() -> &'static AlignmentModel {
    static MODEL: OnceLock<AlignmentModel> = OnceLock::new();
    MODEL.get_or_init(|| {
        let cfg = GenerationConfig {
            n: 600,
            mode: PretextMode::Rotation,
            master_seed: 21,
            trajectory_kinds: ALL_TRAJECTORY_KINDS.to_vec(),
            ..Default::default()
        };
        let data = Dataset::generate(&cfg, FeatureMode::Cues, &CueParams::default()).unwrap();
        let h = Hyper::default();
        train(init_model(&data, h).unwrap(), &data, h).unwrap().0
    })
}

fn misrotated(seed: u64, theta_deg: f64) -> (AudioClip, SourceTrajectory) {
    let p = SceneParams { duration_s: 9.0, trajectory_kind: ALL_TRAJECTORY_KINDS[seed as usize % 3], ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scene = render_scene(&mut rng, &p, Layout::Foa).unwrap();
    (rotate_foa(&scene.audio, RotationAngle::from_degrees(theta_deg)).unwrap(), scene.trajectory)
}

#[test]
fn untrained_model_is_rejected() {
    let model = AlignmentModel::new(Layout::Foa, FeatureMode::Cues, NormStats::identity(3), Hyper::default()).unwrap();
    let (clip, traj) = misrotated(1, 0.0);
    assert!(matches!(
        rotation_alignment(&clip, &traj, &model, &AlignOptions::default(), None),
        Err(Error::Untrained)
    ));
}

#[test]
fn zero_misrotation_is_recovered() {
    let model = foa_model();
    for seed in 0..6 {
        let (clip, traj) = misrotated(40 + seed, 0.0);
        let est = rotation_alignment(&clip, &traj, model, &AlignOptions::default(), Some(0.0)).unwrap();
        assert_eq!(est.windows, 3);
        assert!(est.error_deg.unwrap() <= 10.0, "seed {seed}: {}", est.theta_hat_deg);
    }
}

#[test]
fn halving_the_grid_does_not_hurt() {
    let model = foa_model();
    let (mut coarse, mut fine) = (0.0, 0.0);
    for seed in 0..12 {
        let theta = ChaCha8Rng::seed_from_u64(seed).random_range(0.0..360.0);
        let (clip, traj) = misrotated(60 + seed, theta);
        let at = |g: f64| {
            let opts = AlignOptions { grid_deg: g, ..Default::default() };
            rotation_alignment(&clip, &traj, model, &opts, Some(theta)).unwrap().error_deg.unwrap()
        };
        let (c, f) = (at(20.0), at(10.0));
        // half a coarse step plus the one-step estimator tolerance
        assert!(c <= 10.0 + 10.0, "seed {seed}: coarse error {c}");
        coarse += c;
        fine += f;
    }
    assert!(fine <= coarse, "fine {fine} vs coarse {coarse}");
}

#[test]
fn doa_commutes_with_flip_and_rotation() {
    let p = SceneParams::default();
    let cues = CueParams::default();
    for seed in 0..6 {
        let mut rng = ChaCha8Rng::seed_from_u64(300 + seed);
        let az: f64 = rng.random_range(-70.0..70.0);
        let traj = SourceTrajectory::constant(az.to_radians(), p.duration_s);
        let st = render_scene_with(&mut rng, &p, Layout::Stereo, traj.clone()).unwrap().audio;
        let a = doa_from_gcc(&st, &p, &cues).unwrap().median_rad(0.01).unwrap().to_degrees();
        let b = doa_from_gcc(&flip_stereo(&st).unwrap(), &p, &cues).unwrap().median_rad(0.01).unwrap().to_degrees();
        assert!((a + b).abs() <= 2.0, "seed {seed}: {a} vs {b}");

        let foa = render_scene_with(&mut rng, &p, Layout::Foa, traj).unwrap().audio;
        let theta: f64 = rng.random_range(0.0..360.0);
        let a = doa_from_intensity(&foa, &cues).unwrap().circular_mean_rad().unwrap().to_degrees();
        let rotated = rotate_foa(&foa, RotationAngle::from_degrees(theta)).unwrap();
        let b = doa_from_intensity(&rotated, &cues).unwrap().circular_mean_rad().unwrap().to_degrees();
        assert!(circular_error_deg(b, a + theta) <= 2.0, "seed {seed}: {a} + {theta} vs {b}");
    }
}

fn stereo_scene(seed: u64, p: &SceneParams) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = SceneParams { trajectory_kind: ALL_TRAJECTORY_KINDS[seed as usize % 3], ..*p };
    render_scene(&mut rng, &p, Layout::Stereo).unwrap()
}

#[test]
fn upmix_ordering_holds_per_scene() {
    let p = SceneParams::default();
    let pairs: Vec<(AudioClip, SourceTrajectory)> = (0..24)
        .map(|i| {
            let s = stereo_scene(2000 + i, &p);
            (s.audio, s.trajectory)
        })
        .collect();
    let model = LearnedUpmix::train(&pairs, &UpmixTrainConfig::default()).unwrap();
    let tests = 20;
    let mut ordered = 0;
    for i in 0..tests {
        let s = stereo_scene(3000 + i, &p);
        let mono = downmix_to_mono(&s.audio).unwrap();
        let learned = upmix_learned(&model, &mono, &s.trajectory, &s.audio).unwrap();
        let oracle = upmix_oracle(&mono, &s.trajectory, &p, &s.audio, StftParams::default()).unwrap();
        ordered += usize::from(oracle.l1_complex <= learned.l1_complex && learned.l1_complex <= learned.baseline_l1);
    }
    assert!(ordered * 10 >= tests as usize * 9, "{ordered}/{tests}");
}

#[test]
fn separation_ordering_holds_per_scene() {
    let p = SceneParams::default();
    let stft = StftParams::default();
    let pairs = 20;
    let mut ordered = 0;
    for i in 0..pairs {
        let (a, b) = (stereo_scene(4000 + 2 * i, &p), stereo_scene(4001 + 2 * i, &p));
        let mix = mix_clips(&a.audio, &b.audio).unwrap();
        let spatial = separate_spatial(&mix, &a.trajectory, &b.trajectory, [&a.audio, &b.audio], &p, stft).unwrap();
        let ideal = ideal_mask(&mix, [&a.audio, &b.audio], stft).unwrap();
        ordered += usize::from(ideal.mean_l1 <= spatial.mean_l1 && spatial.mean_l1 <= spatial.mean_baseline_l1);
    }
    assert!(ordered * 10 >= pairs as usize * 9, "{ordered}/{pairs}");
}

#[test]
fn one_shot_with_direction_coded_embeddings() {
    // embeddings that are exactly (cos, sin) of the class azimuth
    let code = |deg: f64| vec![deg.to_radians().cos(), deg.to_radians().sin()];
    let support: Vec<(usize, Vec<f64>)> = (0..ONE_SHOT_CLASSES).map(|c| (c, code(class_azimuth_deg(c)))).collect();
    let queries: Vec<(usize, Vec<f64>)> = (0..ONE_SHOT_CLASSES).map(|c| (c, code(class_azimuth_deg(c) + 3.0))).collect();
    let r = one_shot_doa(&support, &queries).unwrap();
    assert_eq!(r.mean_circular_error_deg, 0.0);
}
