use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use super::format::{decode_features, encode_features, read_features};
use super::manifest::PoolManifest;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::SplitMix64;
use crate::scalar::Scalar;

/// A speaker's reference frames together with their Euclidean row norms.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSet<T> {
    features: Matrix<T>,
    row_norms: Vec<f64>,
}

impl<T: Scalar> ReferenceSet<T> {
    pub fn new(features: Matrix<T>) -> Self {
        let row_norms = features.row_norms();
        Self {
            features,
            row_norms,
        }
    }

    #[inline]
    pub fn features(&self) -> &Matrix<T> {
        &self.features
    }

    #[inline]
    pub fn row_norms(&self) -> &[f64] {
        &self.row_norms
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.features.frames()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.features.frames() == 0
    }

    #[inline]
    pub fn dims(&self) -> usize {
        self.features.dims()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoolSpeaker<T> {
    pub id: String,
    pub reference: ReferenceSet<T>,
}

/// Ordered, immutable set of reference speakers sharing one feature dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeakerPool<T> {
    dims: usize,
    speakers: Vec<PoolSpeaker<T>>,
}

impl<T: Scalar> SpeakerPool<T> {
    pub fn new(members: Vec<(String, Matrix<T>)>) -> Result<Self> {
        let dims = members
            .first()
            .map(|(_, m)| m.dims())
            .ok_or_else(|| Error::Insufficient("a pool needs at least one speaker".into()))?;
        let mut seen = HashSet::new();
        let mut speakers = Vec::with_capacity(members.len());
        for (id, features) in members {
            if id.is_empty() || id.contains([',', '\t', '\n', '\r']) {
                return Err(Error::Invalid(format!(
                    "speaker id {id:?} must be non-empty without commas, tabs or newlines"
                )));
            }
            if !seen.insert(id.clone()) {
                return Err(Error::Invalid(format!("duplicate speaker id {id:?}")));
            }
            if features.dims() != dims {
                return Err(Error::Shape(format!(
                    "speaker {id:?} has {} dims, pool has {dims}",
                    features.dims()
                )));
            }
            if features.frames() == 0 {
                return Err(Error::Insufficient(format!("speaker {id:?} has no frames")));
            }
            speakers.push(PoolSpeaker {
                id,
                reference: ReferenceSet::new(features),
            });
        }
        Ok(Self { dims, speakers })
    }

    #[inline]
    pub fn dims(&self) -> usize {
        self.dims
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.speakers.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.speakers.is_empty()
    }

    pub fn speakers(&self) -> &[PoolSpeaker<T>] {
        &self.speakers
    }

    pub fn get(&self, index: usize) -> Option<&PoolSpeaker<T>> {
        self.speakers.get(index)
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.speakers.iter().position(|s| s.id == id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.speakers.iter().map(|s| s.id.as_str())
    }

    /// Smallest reference set in the pool, in frames.
    pub fn min_frames(&self) -> usize {
        self.speakers.iter().map(|s| s.reference.len()).min().unwrap_or(0)
    }
}

/// Choose which speakers and which of their files go into a pool.
///
/// Speakers with fewer than `n_utterances` files are not eligible. From the
/// eligible ids (lexicographic order) `n_speakers` are drawn without
/// replacement; then, visiting the chosen speakers in id order, `n_utterances`
/// paths (lexicographic order) are drawn for each from the same stream.
pub fn plan_pool(
    groups: &BTreeMap<String, Vec<PathBuf>>,
    n_speakers: usize,
    n_utterances: usize,
    rng: &mut SplitMix64,
) -> Result<Vec<(String, Vec<PathBuf>)>> {
    if n_speakers == 0 || n_utterances == 0 {
        return Err(Error::Config(
            "n_speakers and n_utterances must both be at least 1".into(),
        ));
    }
    let eligible: Vec<(&String, &Vec<PathBuf>)> = groups
        .iter()
        .filter(|(_, paths)| paths.len() >= n_utterances)
        .collect();
    if eligible.len() < n_speakers {
        let short = groups.len() - eligible.len();
        return Err(Error::Insufficient(format!(
            "need {n_speakers} speakers with at least {n_utterances} utterances, \
             found {} ({} speakers total, {short} with too few utterances); short by {}",
            eligible.len(),
            groups.len(),
            n_speakers - eligible.len()
        )));
    }
    if eligible.len() < groups.len() {
        log::info!(
            "{} of {} speakers have fewer than {n_utterances} utterances and are not eligible",
            groups.len() - eligible.len(),
            groups.len()
        );
    }
    let mut chosen = rng.choose(eligible.len(), n_speakers);
    chosen.sort_unstable();
    Ok(chosen
        .into_iter()
        .map(|i| {
            let (id, paths) = eligible[i];
            let picks = rng.choose(paths.len(), n_utterances);
            (id.clone(), picks.into_iter().map(|j| paths[j].clone()).collect())
        })
        .collect())
}

/// Sample and load a reference pool from a manifest.
///
/// `rng` drives all sampling; the manifest's own `seed` is only a default
/// that callers may use to construct it.
pub fn build_pool<T: Scalar>(manifest: &PoolManifest, rng: &mut SplitMix64) -> Result<SpeakerPool<T>> {
    let plan = plan_pool(
        &manifest.by_speaker(),
        manifest.sampling.n_speakers,
        manifest.sampling.n_utterances,
        rng,
    )?;
    let mut dims_origin: Option<(PathBuf, usize)> = None;
    let mut members = Vec::with_capacity(plan.len());
    for (id, paths) in plan {
        let mut parts = Vec::with_capacity(paths.len());
        for path in paths {
            let m: Matrix<T> = read_features(&path)?;
            match &dims_origin {
                None => dims_origin = Some((path.clone(), m.dims())),
                Some((first, d)) if *d != m.dims() => {
                    return Err(Error::DimsMismatch {
                        first: first.clone(),
                        first_dims: *d,
                        second: path,
                        second_dims: m.dims(),
                    })
                }
                Some(_) => {}
            }
            parts.push(m);
        }
        members.push((id, Matrix::vstack(&parts)?));
    }
    SpeakerPool::new(members)
}

pub const POOL_MAGIC: &[u8; 8] = b"SALTPOOL";
pub const POOL_VERSION: u32 = 1;

/// Pool archive: an index followed by one `.saltfeat` image per speaker.
///
/// ```text
/// magic "SALTPOOL" | version u32 | dims u32 | count u32
/// count × { id_len u32 | id utf-8 | offset u64 | length u64 }
/// member images, in index order (offsets are from the start of the archive)
/// ```
pub fn encode_pool<T: Scalar>(pool: &SpeakerPool<T>) -> Result<Vec<u8>> {
    let images = pool
        .speakers
        .iter()
        .map(|s| encode_features(s.reference.features()))
        .collect::<Result<Vec<_>>>()?;
    let index_len: usize = pool.speakers.iter().map(|s| 4 + s.id.len() + 16).sum();
    let mut offset = (8 + 4 + 4 + 4 + index_len) as u64;
    let mut out = Vec::new();
    out.extend_from_slice(POOL_MAGIC);
    out.extend_from_slice(&POOL_VERSION.to_le_bytes());
    out.extend_from_slice(&(pool.dims as u32).to_le_bytes());
    out.extend_from_slice(&(pool.speakers.len() as u32).to_le_bytes());
    for (s, img) in pool.speakers.iter().zip(&images) {
        out.extend_from_slice(&(s.id.len() as u32).to_le_bytes());
        out.extend_from_slice(s.id.as_bytes());
        out.extend_from_slice(&offset.to_le_bytes());
        out.extend_from_slice(&(img.len() as u64).to_le_bytes());
        offset += img.len() as u64;
    }
    for img in images {
        out.extend_from_slice(&img);
    }
    Ok(out)
}

pub fn decode_pool<T: Scalar>(bytes: &[u8], origin: &Path) -> Result<SpeakerPool<T>> {
    let corrupt = |what: &str| Error::Invalid(format!("{}: corrupt pool archive ({what})", origin.display()));
    if bytes.len() < 20 || &bytes[..8] != POOL_MAGIC {
        return Err(Error::Invalid(format!("{}: not a pool archive", origin.display())));
    }
    let u32_at = |at: usize| -> Result<u32> {
        bytes
            .get(at..at + 4)
            .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
            .ok_or_else(|| corrupt("truncated index"))
    };
    let u64_at = |at: usize| -> Result<u64> {
        bytes
            .get(at..at + 8)
            .map(|b| u64::from_le_bytes(b.try_into().unwrap()))
            .ok_or_else(|| corrupt("truncated index"))
    };
    let version = u32_at(8)?;
    if version != POOL_VERSION {
        return Err(Error::VersionMismatch {
            path: origin.to_path_buf(),
            found: version,
            supported: POOL_VERSION,
        });
    }
    let dims = u32_at(12)? as usize;
    let count = u32_at(16)? as usize;
    let mut at = 20;
    let mut members = Vec::with_capacity(count);
    for _ in 0..count {
        let id_len = u32_at(at)? as usize;
        at += 4;
        let id = bytes
            .get(at..at + id_len)
            .ok_or_else(|| corrupt("truncated id"))
            .and_then(|b| std::str::from_utf8(b).map_err(|_| corrupt("id is not utf-8")))?
            .to_string();
        at += id_len;
        let offset = u64_at(at)? as usize;
        let len = u64_at(at + 8)? as usize;
        at += 16;
        let image = bytes
            .get(offset..offset.saturating_add(len))
            .ok_or_else(|| corrupt("member out of range"))?;
        let m: Matrix<T> = decode_features(image, &origin.join(&id))?;
        if m.dims() != dims {
            return Err(corrupt("member dims differ from header"));
        }
        members.push((id, m));
    }
    SpeakerPool::new(members)
}

pub fn write_pool<T: Scalar>(pool: &SpeakerPool<T>, destination: impl AsRef<Path>) -> Result<()> {
    let destination = destination.as_ref();
    let bytes = encode_pool(pool)?;
    let file = File::create(destination).map_err(|e| Error::io(destination, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&bytes)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(destination, e))
}

pub fn read_pool<T: Scalar>(source: impl AsRef<Path>) -> Result<SpeakerPool<T>> {
    let source = source.as_ref();
    let mut bytes = Vec::new();
    File::open(source)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(source, e))?;
    decode_pool(&bytes, source)
}
