use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;
use rayon::prelude::*;
use voxblend_core::featstore::{read_features, read_pool, write_features, ManifestEntry, PoolManifest};
use voxblend_core::{knn_match, FeatureMatrix, SpeakerPool};

use super::{create_dir, thread_pool};
use crate::Outcome;

pub const PAIRS_FILE: &str = "pairs.tsv";

#[derive(Debug, Clone)]
pub struct PrematchArgs {
    /// Training utterances: `speaker<TAB>features[<TAB>audio]`.
    pub manifest: PathBuf,
    /// Archive holding one reference set per training speaker.
    pub pool: PathBuf,
    pub k: usize,
    pub out: PathBuf,
    pub workers: usize,
}

/// Replace every training utterance by its kNN match against its own
/// speaker's reference set, for vocoder training data.
///
/// Matched files go to `out/<speaker>/<file name>`. `out/pairs.tsv` lists
/// `matched<TAB>audio` per written file, the matched path relative to `out`
/// and the audio path as given in the manifest (the feature path when the
/// manifest has no audio column).
pub fn cmd_prematch(args: &PrematchArgs) -> anyhow::Result<Outcome> {
    if args.k == 0 {
        return Err(crate::usage("--k must be at least 1"));
    }
    let manifest = PoolManifest::read(&args.manifest)?;
    let pool: SpeakerPool = read_pool(&args.pool)?;
    create_dir(&args.out)?;
    let threads = thread_pool(args.workers)?;

    let missing: BTreeSet<&str> = manifest
        .entries
        .iter()
        .map(|e| e.speaker.as_str())
        .filter(|s| pool.position(s).is_none())
        .collect();
    if !missing.is_empty() {
        log::error!(
            "no reference set for {} speaker(s), their utterances are skipped: {}",
            missing.len(),
            missing.iter().copied().collect::<Vec<_>>().join(", ")
        );
    }

    let results: Vec<Option<anyhow::Result<PathBuf>>> = threads.install(|| {
        manifest
            .entries
            .par_iter()
            .map(|entry| {
                let index = pool.position(&entry.speaker)?;
                Some(match_one(entry, &pool, index, args))
            })
            .collect()
    });

    let mut pairs = String::new();
    let mut failed = 0;
    for (entry, result) in manifest.entries.iter().zip(results) {
        match result {
            None => failed += 1,
            Some(Err(e)) => {
                failed += 1;
                log::error!("{}: {e:#}", entry.features.display());
            }
            Some(Ok(relative)) => {
                let audio = entry.audio.as_ref().unwrap_or(&entry.features);
                let _ = writeln!(pairs, "{}\t{}", relative.display(), audio.display());
            }
        }
    }
    let pairs_path = args.out.join(PAIRS_FILE);
    std::fs::write(&pairs_path, pairs).with_context(|| format!("writing {}", pairs_path.display()))?;
    log::info!(
        "matched {} of {} utterances",
        manifest.entries.len() - failed,
        manifest.entries.len()
    );
    Ok(Outcome::from_failures(failed))
}

fn match_one(entry: &ManifestEntry, pool: &SpeakerPool, index: usize, args: &PrematchArgs) -> anyhow::Result<PathBuf> {
    let source: FeatureMatrix = read_features(&entry.features)?;
    let reference = &pool.speakers()[index].reference;
    let matched = knn_match(&source, reference, args.k)?.matched;
    let name = entry
        .features
        .file_name()
        .with_context(|| format!("{} is not a file path", entry.features.display()))?;
    let relative = Path::new(&entry.speaker).join(name);
    create_dir(&args.out.join(&entry.speaker))?;
    write_features(&matched, args.out.join(&relative))?;
    Ok(relative)
}
