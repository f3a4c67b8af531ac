use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use rayon::prelude::*;
use voxblend_core::blender::{apply_pseudo_speaker, sample_pseudo_speaker, PseudoSpeaker};
use voxblend_core::featstore::{read_features, read_pool, write_features};
use voxblend_core::{anonymize, BlendConfig, FeatureMatrix, Provenance, SpeakerPool, SplitMix64};

use super::{create_dir, feature_files, stem, thread_pool};
use crate::{Mode, Outcome};

/// Stream domain of per-utterance pseudo speakers.
pub const UTTERANCE_DOMAIN: u64 = 0;
/// Stream domain of per-speaker pseudo speakers.
pub const SPEAKER_DOMAIN: u64 = 1;

pub const PROVENANCE_EXTENSION: &str = "prov";

#[derive(Debug, Clone)]
pub struct AnonymizeArgs {
    pub input: PathBuf,
    pub pool: PathBuf,
    pub out: PathBuf,
    pub blend: BlendConfig,
    pub workers: usize,
    pub mode: Mode,
    /// `utterance speaker` lines; without it the speaker is the file stem up
    /// to the first `-` or `_`.
    pub utt2spk: Option<PathBuf>,
}

/// Speaker id encoded in an utterance file stem such as `1272-128104-0000`.
pub fn speaker_from_stem(stem: &str) -> &str {
    stem.split(['-', '_']).next().unwrap_or(stem)
}

fn read_utt2spk(path: &Path) -> anyhow::Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        match (parts.next(), parts.next(), parts.next()) {
            (Some(utt), Some(spk), None) => {
                map.insert(utt.to_string(), spk.to_string());
            }
            _ => bail!("{}:{}: expected `utterance speaker`", path.display(), i + 1),
        }
    }
    Ok(map)
}

enum Assignment<'a> {
    Fresh(u64),
    Shared { speaker: &'a str, pseudo: &'a PseudoSpeaker },
}

/// Anonymize every `.saltfeat` file in `args.input` into `args.out`.
///
/// Each output is accompanied by a `.prov` record from which it can be
/// replayed. Files are processed in lexicographic order and utterance `i`
/// draws from its own stream, so the worker count never changes the result.
pub fn cmd_anonymize(args: &AnonymizeArgs) -> anyhow::Result<Outcome> {
    let pool: SpeakerPool = read_pool(&args.pool)?;
    args.blend.validate(pool.len())?;
    let inputs = feature_files(&args.input)?;
    if inputs.is_empty() {
        bail!("no .saltfeat files in {}", args.input.display());
    }
    create_dir(&args.out)?;
    let threads = thread_pool(args.workers)?;

    let utt2spk = args.utt2spk.as_deref().map(read_utt2spk).transpose()?;
    let stems: Vec<String> = inputs.iter().map(|p| stem(p)).collect();
    let speakers: Vec<Option<&str>> = stems
        .iter()
        .map(|s| match &utt2spk {
            Some(map) => map.get(s).map(String::as_str),
            None => Some(speaker_from_stem(s)),
        })
        .collect();

    let mut shared = BTreeMap::new();
    if args.mode == Mode::Speaker {
        let ids: BTreeSet<&str> = speakers.iter().flatten().copied().collect();
        for (j, id) in ids.into_iter().enumerate() {
            let mut rng = SplitMix64::for_stream(args.blend.seed, SPEAKER_DOMAIN, j as u64);
            shared.insert(id, sample_pseudo_speaker(&pool, &args.blend, &mut rng)?);
        }
        log::info!("{} source speakers", shared.len());
    }

    let results: Vec<anyhow::Result<()>> = threads.install(|| {
        inputs
            .par_iter()
            .enumerate()
            .map(|(i, path)| {
                let assignment = match args.mode {
                    Mode::Utterance => Assignment::Fresh(i as u64),
                    Mode::Speaker => {
                        let speaker = speakers[i]
                            .ok_or_else(|| anyhow!("{} has no speaker in utt2spk", stems[i]))?;
                        Assignment::Shared {
                            speaker,
                            pseudo: &shared[speaker],
                        }
                    }
                };
                process(path, &stems[i], &pool, args, assignment)
            })
            .collect()
    });

    let mut failed = 0;
    for (path, result) in inputs.iter().zip(results) {
        if let Err(e) = result {
            failed += 1;
            log::error!("{}: {e:#}", path.display());
        }
    }
    log::info!("anonymized {} of {} files", inputs.len() - failed, inputs.len());
    Ok(Outcome::from_failures(failed))
}

fn process(
    path: &Path,
    stem: &str,
    pool: &SpeakerPool,
    args: &AnonymizeArgs,
    assignment: Assignment<'_>,
) -> anyhow::Result<()> {
    let source: FeatureMatrix = read_features(path)?;
    let (output, provenance) = match assignment {
        Assignment::Fresh(index) => {
            let mut rng = SplitMix64::for_stream(args.blend.seed, UTTERANCE_DOMAIN, index);
            let (output, mut provenance) = anonymize(&source, pool, &args.blend, &mut rng)?;
            provenance.stream = Some(format!("utterance:{index}"));
            (output, provenance)
        }
        Assignment::Shared { speaker, pseudo } => {
            let output = apply_pseudo_speaker(&source, pool, pseudo, args.blend.k, args.blend.preserve)?;
            let mut provenance = Provenance::new(&args.blend, pseudo.clone());
            provenance.stream = Some(format!("speaker:{speaker}"));
            (output, provenance)
        }
    };
    let file_name = path.file_name().expect("listed files have names");
    write_features(&output, args.out.join(file_name))?;
    let record = args.out.join(format!("{stem}.{PROVENANCE_EXTENSION}"));
    std::fs::write(&record, provenance.to_string())
        .with_context(|| format!("writing {}", record.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn speaker_prefix() {
        assert_eq!(speaker_from_stem("1272-128104-0000"), "1272");
        assert_eq!(speaker_from_stem("p225_001"), "p225");
        assert_eq!(speaker_from_stem("solo"), "solo");
    }
}
