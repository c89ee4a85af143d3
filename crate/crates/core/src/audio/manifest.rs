use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::wav::read_wav_layout;
use crate::{AlignmentLabel, Error, Layout, Misalignment, Result};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub id: String,
    /// Relative paths are resolved against the manifest's directory.
    pub audio_path: String,
    pub trajectory_path: String,
    pub label: AlignmentLabel,
    pub scene_seed: u64,
    pub split: Split,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub version: u32,
    pub entries: Vec<ManifestEntry>,
}

impl Default for DatasetManifest {
    fn default() -> Self {
        Self { version: MANIFEST_VERSION, entries: Vec::new() }
    }
}

impl DatasetManifest {
    pub fn split(&self, split: Split) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.split == split)
    }

    /// `[train, val, test]` entry counts.
    pub fn split_counts(&self) -> [usize; 3] {
        let mut counts = [0; 3];
        for e in &self.entries {
            counts[e.split as usize] += 1;
        }
        counts
    }

    /// Checks everything that does not need the filesystem.
    pub fn validate_structure(&self) -> Result<()> {
        if self.version != MANIFEST_VERSION {
            return Err(Error::Version { expected: MANIFEST_VERSION, found: self.version });
        }
        let mut seen = HashSet::new();
        for e in &self.entries {
            if !seen.insert(e.id.as_str()) {
                return Err(Error::DuplicateId(e.id.clone()));
            }
            if !e.label.is_consistent() {
                return Err(Error::Schema(format!("entry {}: aligned flag contradicts misalignment", e.id)));
            }
        }
        Ok(())
    }

    /// Checks referenced files exist and that labels fit the audio layout.
    pub fn validate_files(&self, base: &Path) -> Result<()> {
        for e in &self.entries {
            let audio = resolve(base, &e.audio_path);
            let traj = resolve(base, &e.trajectory_path);
            for p in [&audio, &traj] {
                if !p.is_file() {
                    return Err(Error::MissingFile(p.clone()));
                }
            }
            let layout = read_wav_layout(&audio)?;
            match (e.label.misalignment, layout) {
                (Misalignment::Rotation { .. }, Layout::Stereo) => {
                    return Err(Error::Schema(format!("entry {}: rotation label on a stereo clip", e.id)))
                }
                (Misalignment::ChannelFlip, Layout::Foa) => {
                    return Err(Error::Schema(format!("entry {}: flip label on an FOA clip", e.id)))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

pub(crate) fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Loads and fully validates a manifest.
pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = std::fs::read_to_string(path)?;
    let manifest: DatasetManifest =
        serde_json::from_str(&text).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
    manifest.validate_structure()?;
    manifest.validate_files(path.parent().unwrap_or(Path::new(".")))?;
    Ok(manifest)
}

pub fn save_manifest(manifest: &DatasetManifest, path: &Path) -> Result<()> {
    manifest.validate_structure()?;
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

impl ManifestEntry {
    pub fn audio_path(&self, base: &Path) -> PathBuf {
        resolve(base, &self.audio_path)
    }

    pub fn trajectory_path(&self, base: &Path) -> PathBuf {
        resolve(base, &self.trajectory_path)
    }
}
