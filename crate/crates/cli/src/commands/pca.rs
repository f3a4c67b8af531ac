use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context};
use voxblend_core::featstore::read_features;
use voxblend_core::metrics::{pca_project, Projection};
use voxblend_core::{FeatureMatrix64, Matrix};

use super::{feature_files, stem};
use crate::Outcome;

#[derive(Debug, Clone)]
pub struct PcaArgs {
    /// Embedding files (one row per utterance, speaker = file stem) or
    /// directories of them.
    pub inputs: Vec<PathBuf>,
    pub out: PathBuf,
}

/// Project all embeddings onto their first two principal axes and write
/// `speaker<TAB>x<TAB>y` per embedding.
pub fn cmd_pca(args: &PcaArgs) -> anyhow::Result<(Outcome, Projection<f64>)> {
    let mut files = Vec::new();
    for input in &args.inputs {
        if input.is_dir() {
            files.extend(feature_files(input)?);
        } else {
            files.push(input.clone());
        }
    }
    if files.is_empty() {
        return Err(crate::usage("pca needs at least one embedding file"));
    }
    let mut labels = Vec::new();
    let mut parts = Vec::new();
    for path in &files {
        let m: FeatureMatrix64 = read_features(path)?;
        labels.extend(std::iter::repeat_n(stem(path), m.frames()));
        parts.push(m);
    }
    let points = Matrix::vstack(&parts).context("embeddings must share one dimension")?;
    if points.frames() == 0 {
        bail!("embedding files hold no rows");
    }
    let projection = pca_project(&points, 2).context("projecting embeddings")?;
    log::info!(
        "explained variance: {:.4} {:.4}",
        projection.explained_variance_ratio[0],
        projection.explained_variance_ratio[1]
    );
    let mut text = String::new();
    for (label, xy) in labels.iter().zip(projection.coords.rows()) {
        let _ = writeln!(text, "{label}\t{:?}\t{:?}", xy[0], xy[1]);
    }
    std::fs::write(&args.out, text).with_context(|| format!("writing {}", args.out.display()))?;
    Ok((Outcome::Complete, projection))
}
