//! Line-oriented corpus manifests.
//!
//! ```text
//! # comments start with '#'
//! n_speakers=50
//! n_utterances=50
//! seed=0
//!
//! 1272<TAB>feats/1272-128104-0000.saltfeat
//! 1272<TAB>feats/1272-128104-0001.saltfeat<TAB>wav/1272-128104-0001.wav
//! ```
//!
//! The optional `key=value` header comes before the first entry. Entries are
//! `speaker_id<TAB>feature_path`, with an optional third column naming the
//! source audio (used by pre-matching). Relative paths resolve against the
//! manifest's directory.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const DEFAULT_POOL_SPEAKERS: usize = 50;
pub const DEFAULT_POOL_UTTERANCES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sampling {
    pub n_speakers: usize,
    pub n_utterances: usize,
    pub seed: u64,
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            n_speakers: DEFAULT_POOL_SPEAKERS,
            n_utterances: DEFAULT_POOL_UTTERANCES,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub speaker: String,
    pub features: PathBuf,
    pub audio: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PoolManifest {
    pub entries: Vec<ManifestEntry>,
    pub sampling: Sampling,
}

impl PoolManifest {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut manifest = PoolManifest::default();
        let mut in_header = true;
        for (lineno, raw) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            if !line.contains('\t') {
                if !in_header {
                    return Err(Error::Manifest {
                        line: lineno,
                        reason: "expected speaker_id<TAB>path".into(),
                    });
                }
                let (key, value) = line.split_once('=').ok_or_else(|| Error::Manifest {
                    line: lineno,
                    reason: format!("expected key=value header or entry, got {line:?}"),
                })?;
                manifest.set_header(key.trim(), value.trim(), lineno)?;
                continue;
            }
            in_header = false;
            let mut cols = line.split('\t');
            let speaker = cols.next().unwrap_or_default().trim();
            let features = cols.next().unwrap_or_default().trim();
            let audio = cols.next().map(str::trim).filter(|s| !s.is_empty());
            if cols.next().is_some() {
                return Err(Error::Manifest {
                    line: lineno,
                    reason: "too many columns".into(),
                });
            }
            if speaker.is_empty() || features.is_empty() {
                return Err(Error::Manifest {
                    line: lineno,
                    reason: "empty speaker id or path".into(),
                });
            }
            manifest.entries.push(ManifestEntry {
                speaker: speaker.to_string(),
                features: base_dir.join(features),
                audio: audio.map(|a| base_dir.join(a)),
            });
        }
        Ok(manifest)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new("")))
    }

    fn set_header(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let bad = |reason: String| Error::Manifest { line, reason };
        match key {
            "n_speakers" => {
                self.sampling.n_speakers = value.parse().map_err(|e| bad(format!("{key}: {e}")))?
            }
            "n_utterances" => {
                self.sampling.n_utterances =
                    value.parse().map_err(|e| bad(format!("{key}: {e}")))?
            }
            "seed" => self.sampling.seed = value.parse().map_err(|e| bad(format!("{key}: {e}")))?,
            other => return Err(bad(format!("unknown header key {other:?}"))),
        }
        Ok(())
    }

    /// Feature paths grouped by speaker, speakers and paths in lexicographic order.
    pub fn by_speaker(&self) -> BTreeMap<String, Vec<PathBuf>> {
        let mut groups: BTreeMap<String, Vec<PathBuf>> = BTreeMap::new();
        for e in &self.entries {
            groups
                .entry(e.speaker.clone())
                .or_default()
                .push(e.features.clone());
        }
        for paths in groups.values_mut() {
            paths.sort();
            paths.dedup();
        }
        groups
    }
}

impl fmt::Display for PoolManifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n_speakers={}", self.sampling.n_speakers)?;
        writeln!(f, "n_utterances={}", self.sampling.n_utterances)?;
        writeln!(f, "seed={}", self.sampling.seed)?;
        writeln!(f)?;
        for e in &self.entries {
            write!(f, "{}\t{}", e.speaker, e.features.display())?;
            if let Some(a) = &e.audio {
                write!(f, "\t{}", a.display())?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
