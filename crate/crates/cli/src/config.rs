use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

/// How pseudo speakers are assigned to input utterances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// A fresh pseudo speaker for every utterance.
    #[default]
    Utterance,
    /// One pseudo speaker shared by all utterances of a source speaker.
    Speaker,
}

/// Settings that may come from a TOML file instead of flags.
///
/// Keys mirror the long flag names (`n-speakers`, `weights-file`, ...).
/// Flags given on the command line win over the file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunConfig {
    pub pool: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub utt2spk: Option<PathBuf>,
    pub weights_file: Option<PathBuf>,
    pub metric: Option<String>,
    pub n_speakers: Option<usize>,
    pub n_utts: Option<usize>,
    pub k: Option<usize>,
    pub m: Option<usize>,
    pub scale: Option<f64>,
    pub preserve: Option<f64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub mode: Option<Mode>,
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> anyhow::Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        toml::from_str(text).map_err(|e| crate::usage(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("plain fields always serialise")
    }

    /// Fill every field left empty in `self` from `fallback`.
    pub fn or(self, fallback: &RunConfig) -> RunConfig {
        let f = fallback.clone();
        RunConfig {
            pool: self.pool.or(f.pool),
            manifest: self.manifest.or(f.manifest),
            input: self.input.or(f.input),
            out: self.out.or(f.out),
            utt2spk: self.utt2spk.or(f.utt2spk),
            weights_file: self.weights_file.or(f.weights_file),
            metric: self.metric.or(f.metric),
            n_speakers: self.n_speakers.or(f.n_speakers),
            n_utts: self.n_utts.or(f.n_utts),
            k: self.k.or(f.k),
            m: self.m.or(f.m),
            scale: self.scale.or(f.scale),
            preserve: self.preserve.or(f.preserve),
            seed: self.seed.or(f.seed),
            workers: self.workers.or(f.workers),
            mode: self.mode.or(f.mode),
        }
    }

    pub fn require_path(value: &Option<PathBuf>, flag: &str) -> anyhow::Result<PathBuf> {
        value
            .clone()
            .ok_or_else(|| crate::usage(format!("--{flag} is required (flag or config key)")))
    }
}
