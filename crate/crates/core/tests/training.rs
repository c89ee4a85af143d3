use spatialign::dsp::CueParams;
use spatialign::model::{init_model, train, Dataset};
use spatialign::synth::GenerationConfig;
use spatialign::transforms::{NegativeConfig, PretextMode};
use spatialign::{FeatureMode, Hyper};

fn test_accuracy(cfg: &GenerationConfig) -> f64 {
    let data = Dataset::generate(cfg, FeatureMode::Cues, &CueParams::default()).unwrap();
    let h = Hyper::default();
    train(init_model(&data, h).unwrap(), &data, h).unwrap().1.test_accuracy.unwrap()
}

fn flip_config(seed: u64) -> GenerationConfig {
    GenerationConfig { n: 800, mode: PretextMode::Flip, master_seed: seed, ..Default::default() }
}

#[test]
fn noise_makes_the_pretext_harder() {
    let clean = flip_config(31);
    let mut mid = clean.clone();
    mid.scene.snr_db = Some(20.0);
    let mut loud = clean.clone();
    loud.scene.snr_db = Some(0.0);
    let (a0, a20, ac) = (test_accuracy(&loud), test_accuracy(&mid), test_accuracy(&clean));
    assert!(a0 <= a20 && a20 <= ac, "0 dB {a0}, 20 dB {a20}, clean {ac}");
}

#[test]
fn joint_mirror_keeps_the_task_learnable() {
    for p in [0.0, 0.5] {
        let mut cfg = flip_config(32);
        cfg.negatives = NegativeConfig { joint_augment_prob: p, ..Default::default() };
        let acc = test_accuracy(&cfg);
        assert!(acc >= 0.9, "augmentation {p}: {acc}");
    }
}
