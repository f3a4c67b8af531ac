use std::path::PathBuf;

use anyhow::Context;
use voxblend_core::featstore::{build_pool, write_pool, PoolManifest};
use voxblend_core::{SpeakerPool, SplitMix64};

use crate::Outcome;

#[derive(Debug, Clone)]
pub struct BuildPoolArgs {
    pub manifest: PathBuf,
    pub out: PathBuf,
    /// Overrides the manifest header when set.
    pub n_speakers: Option<usize>,
    pub n_utts: Option<usize>,
    pub seed: Option<u64>,
}

/// Sample a reference pool from a manifest and write it as one archive.
pub fn cmd_build_pool(args: &BuildPoolArgs) -> anyhow::Result<Outcome> {
    let mut manifest = PoolManifest::read(&args.manifest)?;
    let sampling = &mut manifest.sampling;
    if let Some(n) = args.n_speakers {
        sampling.n_speakers = n;
    }
    if let Some(n) = args.n_utts {
        sampling.n_utterances = n;
    }
    if let Some(seed) = args.seed {
        sampling.seed = seed;
    }
    log::info!(
        "sampling {} speakers x {} utterances with seed {}",
        sampling.n_speakers,
        sampling.n_utterances,
        sampling.seed
    );
    let pool: SpeakerPool = build_pool(&manifest, &mut SplitMix64::new(manifest.sampling.seed))
        .with_context(|| format!("building pool from {}", args.manifest.display()))?;
    write_pool(&pool, &args.out)?;
    log::info!(
        "wrote {} speakers ({} dims) to {}",
        pool.len(),
        pool.dims(),
        args.out.display()
    );
    Ok(Outcome::Complete)
}
