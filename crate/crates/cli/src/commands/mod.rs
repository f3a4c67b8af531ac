pub mod anonymize;
pub mod build_pool;
pub mod eval;
pub mod pca;
pub mod prematch;

use std::path::{Path, PathBuf};

use anyhow::Context;
use voxblend_core::featstore::FEATURE_EXTENSION;

/// `.saltfeat` files directly inside `dir`, in lexicographic path order.
pub(crate) fn feature_files(dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry.with_context(|| format!("listing {}", dir.display()))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == FEATURE_EXTENSION) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

pub(crate) fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub(crate) fn create_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub(crate) fn thread_pool(workers: usize) -> anyhow::Result<rayon::ThreadPool> {
    if workers == 0 {
        return Err(crate::usage("--workers must be at least 1"));
    }
    Ok(rayon::ThreadPoolBuilder::new().num_threads(workers).build()?)
}
