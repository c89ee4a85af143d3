use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spatialign::dsp::{binaural_cues, CueParams, GccPhat, Stft};
use spatialign::model::{Dataset, FeatureSequence};
use spatialign::synth::{render_scene, GenerationConfig, SceneParams};
use spatialign::{AlignmentModel, FeatureMode, Hyper, Layout, PretextMode, StftParams};

fn noise(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-0.5..0.5)).collect()
}

fn dsp(c: &mut Criterion) {
    let x = noise(1, 16_000);
    let stft = Stft::new(StftParams::default()).unwrap();
    c.bench_function("stft_1s", |b| b.iter(|| stft.forward(black_box(&x)).unwrap()));

    let spec = stft.forward(&x).unwrap();
    c.bench_function("istft_1s", |b| b.iter(|| stft.inverse(black_box(&spec), x.len()).unwrap()));

    let gcc = GccPhat::new(512, 16).unwrap();
    let y = noise(2, 512);
    c.bench_function("gcc_phat_frame", |b| b.iter(|| gcc.process(black_box(&x[..512]), black_box(&y)).unwrap()));

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let scene = render_scene(&mut rng, &SceneParams::default(), Layout::Stereo).unwrap();
    c.bench_function("binaural_cues_scene", |b| {
        b.iter(|| binaural_cues(black_box(&scene.audio), &CueParams::default()).unwrap())
    });
}

fn synthesis(c: &mut Criterion) {
    let p = SceneParams::default();
    for layout in [Layout::Stereo, Layout::Foa] {
        c.bench_function(&format!("render_scene_{layout:?}").to_lowercase(), |b| {
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            b.iter(|| render_scene(&mut rng, &p, layout).unwrap())
        });
    }
}

fn network(c: &mut Criterion) {
    let cfg = GenerationConfig { n: 16, mode: PretextMode::Rotation, master_seed: 5, ..Default::default() };
    let data = Dataset::generate(&cfg, FeatureMode::Cues, &CueParams::default()).unwrap();
    let model = AlignmentModel::new(data.layout, FeatureMode::Cues, data.norm_stats().unwrap(), Hyper::default()).unwrap();
    let batch: Vec<(&FeatureSequence, f64)> =
        data.samples.iter().map(|s| (&s.features, if s.label.aligned { 1.0 } else { 0.0 })).collect();
    c.bench_function("forward_example", |b| b.iter(|| model.logit(black_box(batch[0].0)).unwrap()));
    c.bench_function("loss_and_grad_batch16", |b| b.iter(|| model.loss_and_grad(black_box(&batch)).unwrap()));
}

criterion_group!(benches, dsp, synthesis, network);
criterion_main!(benches);
