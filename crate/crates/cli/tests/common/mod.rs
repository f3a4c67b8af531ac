#![allow(dead_code)]

use std::path::{Path, PathBuf};

use voxblend_core::featstore::{write_features, write_pool};
use voxblend_core::{FeatureMatrix, SpeakerPool, SplitMix64};

/// `frames × dims` Gaussian noise around `center` on every axis.
pub fn noise(rng: &mut SplitMix64, frames: usize, dims: usize, center: f64) -> FeatureMatrix {
    let data = (0..frames * dims).map(|_| (center + rng.next_normal()) as f32).collect();
    FeatureMatrix::new(frames, dims, data).unwrap()
}

pub fn toy_pool(speakers: usize, frames: usize, dims: usize, seed: u64) -> SpeakerPool {
    let mut rng = SplitMix64::new(seed);
    SpeakerPool::new(
        (0..speakers)
            .map(|s| (format!("ref{s:02}"), noise(&mut rng, frames, dims, s as f64)))
            .collect(),
    )
    .unwrap()
}

pub fn write_toy_pool(dir: &Path, speakers: usize, frames: usize, dims: usize, seed: u64) -> PathBuf {
    let path = dir.join("pool.saltpool");
    write_pool(&toy_pool(speakers, frames, dims, seed), &path).unwrap();
    path
}

/// Writes `names` as random utterances into `dir` and returns their paths.
pub fn write_utterances(dir: &Path, names: &[&str], frames: usize, dims: usize, seed: u64) -> Vec<PathBuf> {
    std::fs::create_dir_all(dir).unwrap();
    let mut rng = SplitMix64::new(seed);
    names
        .iter()
        .map(|n| {
            let path = dir.join(format!("{n}.saltfeat"));
            write_features(&noise(&mut rng, frames, dims, 0.5), &path).unwrap();
            path
        })
        .collect()
}

/// Every file in `dir` with its bytes, sorted by name.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}
