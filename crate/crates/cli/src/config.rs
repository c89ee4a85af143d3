use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use spatialign::downstream::{AlignOptions, UpmixTrainConfig};
use spatialign::dsp::CueParams;
use spatialign::synth::GenerationConfig;
use spatialign::{FeatureMode, Hyper};

pub const CONFIG_VERSION: u32 = 1;
pub const CONFIG_FILE: &str = "config.json";

/// Everything a run depends on. Written beside every command's outputs;
/// feeding it back through `--config` reproduces the run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub format_version: u32,
    pub master_seed: u64,
    pub output_dir: Option<PathBuf>,
    pub generation: GenerationConfig,
    pub feature_mode: FeatureMode,
    pub cues: CueParams,
    pub hyper: Hyper,
    pub align: AlignOptions,
    pub upmix: UpmixTrainConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            format_version: CONFIG_VERSION,
            master_seed: 0,
            output_dir: None,
            generation: GenerationConfig::default(),
            feature_mode: FeatureMode::default(),
            cues: CueParams::default(),
            hyper: Hyper::default(),
            align: AlignOptions::default(),
            upmix: UpmixTrainConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: Self = serde_json::from_str(&text).map_err(spatialign::Error::from)?;
        if cfg.format_version != CONFIG_VERSION {
            return Err(spatialign::Error::Version { expected: CONFIG_VERSION, found: cfg.format_version }.into());
        }
        Ok(cfg)
    }

    /// Propagates the master seed into every seeded block.
    pub fn resolve(mut self, seed: Option<u64>, out: Option<&Path>) -> Self {
        if let Some(s) = seed {
            self.master_seed = s;
        }
        if let Some(o) = out {
            self.output_dir = Some(o.to_path_buf());
        }
        self.generation.master_seed = self.master_seed;
        self.hyper.seed = self.master_seed;
        self.upmix.seed = self.master_seed;
        self
    }

    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        write_json(&dir.join(CONFIG_FILE), self)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let cfg = RunConfig::default().resolve(Some(9), Some(Path::new("out")));
        let text = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.generation.master_seed, 9);
        assert_eq!(back.hyper.seed, 9);
    }

    #[test]
    fn resolving_twice_is_stable() {
        let once = RunConfig::default().resolve(Some(3), None);
        assert_eq!(once.clone().resolve(None, None), once);
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus": 1}"#).is_err());
    }
}
