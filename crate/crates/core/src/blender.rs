//! Pseudo-speaker generation by random blending of reference speakers.
//!
//! A pseudo speaker is a random subset of `m` pool speakers with softmax
//! weights over standard-normal logits. The weights may be pushed outwards
//! (extrapolated) by a scale factor `s`, which keeps their sum at one but
//! lets them go negative. The source utterance is kNN-matched against each
//! chosen speaker, the matches are combined with the weights, and a fraction
//! `p` of the raw source features can be mixed back in.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::featstore::SpeakerPool;
use crate::matcher::knn_match;
use crate::matrix::Matrix;
use crate::rng::SplitMix64;
use crate::scalar::Scalar;

pub const DEFAULT_SPEAKERS_PER_BLEND: usize = 4;
pub const DEFAULT_NEIGHBORS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlendConfig {
    /// Reference speakers per pseudo speaker.
    pub m: usize,
    /// Neighbours averaged per matched frame.
    pub k: usize,
    /// Extrapolation scale; 0 disables extrapolation.
    pub scale: f64,
    /// Share of the raw source features kept in the output.
    pub preserve: f64,
    pub seed: u64,
}

impl Default for BlendConfig {
    fn default() -> Self {
        Self {
            m: DEFAULT_SPEAKERS_PER_BLEND,
            k: DEFAULT_NEIGHBORS,
            scale: 0.0,
            preserve: 0.0,
            seed: 0,
        }
    }
}

impl BlendConfig {
    pub fn validate(&self, pool_size: usize) -> Result<()> {
        if self.m == 0 || self.m > pool_size {
            return Err(Error::Config(format!(
                "m={} must be between 1 and the pool size {pool_size}",
                self.m
            )));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if !(self.scale.is_finite() && self.scale >= 0.0) {
            return Err(Error::Config(format!("scale {} must be >= 0", self.scale)));
        }
        if !(0.0..=1.0).contains(&self.preserve) {
            return Err(Error::Config(format!(
                "preserve {} must lie in [0, 1]",
                self.preserve
            )));
        }
        Ok(())
    }
}

/// Weights paired with the pool speakers they apply to.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    pub speaker_ids: Vec<String>,
    pub weights: Vec<f64>,
}

/// `m` distinct pool indices drawn uniformly without replacement.
pub fn sample_subset<T: Scalar>(pool: &SpeakerPool<T>, m: usize, rng: &mut SplitMix64) -> Result<Vec<usize>> {
    if m == 0 || m > pool.len() {
        return Err(Error::Config(format!(
            "cannot choose {m} speakers from a pool of {}",
            pool.len()
        )));
    }
    Ok(rng.choose(pool.len(), m))
}

/// Max-subtracted softmax, renormalised so the weights sum to one.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Softmax over `m` standard-normal logits.
///
/// Only members of the subset get a logit; excluded speakers would have
/// weight exactly zero anyway.
pub fn sample_weights(m: usize, rng: &mut SplitMix64) -> Vec<f64> {
    let logits: Vec<f64> = (0..m).map(|_| rng.next_normal()).collect();
    softmax(&logits)
}

/// `w' = w (s + 1) - s / m`. Preserves the sum; uniform weights are a fixed point.
///
/// Evaluated as `w + s (w - 1/m)`, which keeps both fixed points exact in
/// floating point.
pub fn extrapolate_weights(weights: &[f64], scale: f64) -> Vec<f64> {
    let uniform = 1.0 / weights.len() as f64;
    weights.iter().map(|&w| w + scale * (w - uniform)).collect()
}

fn same_shape<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!(
            "{:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

/// Affine combination `Σ wᵢ·Dᵢ`, accumulated in `f64`.
pub fn blend<T: Scalar>(matched: &[Matrix<T>], weights: &[f64]) -> Result<Matrix<T>> {
    let first = matched
        .first()
        .ok_or_else(|| Error::Shape("nothing to blend".into()))?;
    if matched.len() != weights.len() {
        return Err(Error::Shape(format!(
            "{} matrices but {} weights",
            matched.len(),
            weights.len()
        )));
    }
    for m in &matched[1..] {
        same_shape(first, m)?;
    }
    let mut acc = vec![0.0f64; first.as_slice().len()];
    for (m, &w) in matched.iter().zip(weights) {
        for (a, &v) in acc.iter_mut().zip(m.as_slice()) {
            *a += w * v.as_f64();
        }
    }
    let (frames, dims) = first.shape();
    Matrix::new(frames, dims, acc.into_iter().map(T::of).collect())
}

/// `p·source + (1 − p)·blended`.
pub fn preserve<T: Scalar>(source: &Matrix<T>, blended: &Matrix<T>, p: f64) -> Result<Matrix<T>> {
    same_shape(source, blended)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Config(format!("preserve {p} must lie in [0, 1]")));
    }
    let data = source
        .as_slice()
        .iter()
        .zip(blended.as_slice())
        .map(|(&s, &d)| T::of(p * s.as_f64() + (1.0 - p) * d.as_f64()))
        .collect();
    let (frames, dims) = source.shape();
    Matrix::new(frames, dims, data)
}

/// The random choices that define one pseudo speaker.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoSpeaker {
    pub speakers: Vec<String>,
    pub raw_weights: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PseudoSpeaker {
    pub fn weight_vector(&self) -> WeightVector {
        WeightVector {
            speaker_ids: self.speakers.clone(),
            weights: self.weights.clone(),
        }
    }
}

/// Draw a subset, then its weights, from `rng`, and extrapolate by `cfg.scale`.
pub fn sample_pseudo_speaker<T: Scalar>(
    pool: &SpeakerPool<T>,
    cfg: &BlendConfig,
    rng: &mut SplitMix64,
) -> Result<PseudoSpeaker> {
    cfg.validate(pool.len())?;
    let subset = sample_subset(pool, cfg.m, rng)?;
    let raw_weights = sample_weights(cfg.m, rng);
    let weights = extrapolate_weights(&raw_weights, cfg.scale);
    Ok(PseudoSpeaker {
        speakers: subset
            .into_iter()
            .map(|i| pool.speakers()[i].id.clone())
            .collect(),
        raw_weights,
        weights,
    })
}

/// Render `source` in the voice of `pseudo`.
pub fn apply_pseudo_speaker<T: Scalar>(
    source: &Matrix<T>,
    pool: &SpeakerPool<T>,
    pseudo: &PseudoSpeaker,
    k: usize,
    p: f64,
) -> Result<Matrix<T>> {
    if source.dims() != pool.dims() {
        return Err(Error::Shape(format!(
            "source has {} dims, pool has {}",
            source.dims(),
            pool.dims()
        )));
    }
    let matched = pseudo
        .speakers
        .iter()
        .map(|id| {
            let i = pool
                .position(id)
                .ok_or_else(|| Error::Invalid(format!("speaker {id:?} is not in the pool")))?;
            Ok(knn_match(source, &pool.speakers()[i].reference, k)?.matched)
        })
        .collect::<Result<Vec<_>>>()?;
    let blended = blend(&matched, &pseudo.weights)?;
    preserve(source, &blended, p)
}

/// Everything needed to replay one anonymization exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub seed: u64,
    /// Which derived stream produced the pseudo speaker, e.g. `utterance:3`.
    pub stream: Option<String>,
    pub k: usize,
    pub scale: f64,
    pub preserve: f64,
    pub pseudo: PseudoSpeaker,
}

impl Provenance {
    pub fn new(cfg: &BlendConfig, pseudo: PseudoSpeaker) -> Self {
        Self {
            seed: cfg.seed,
            stream: None,
            k: cfg.k,
            scale: cfg.scale,
            preserve: cfg.preserve,
            pseudo,
        }
    }

    /// Re-run the recorded anonymization without drawing any random numbers.
    pub fn replay<T: Scalar>(&self, source: &Matrix<T>, pool: &SpeakerPool<T>) -> Result<Matrix<T>> {
        apply_pseudo_speaker(source, pool, &self.pseudo, self.k, self.preserve)
    }
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:?}"))
        .collect::<Vec<_>>()
        .join(",")
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "seed\t{}", self.seed)?;
        writeln!(f, "stream\t{}", self.stream.as_deref().unwrap_or("-"))?;
        writeln!(f, "k\t{}", self.k)?;
        writeln!(f, "m\t{}", self.pseudo.speakers.len())?;
        writeln!(f, "scale\t{:?}", self.scale)?;
        writeln!(f, "preserve\t{:?}", self.preserve)?;
        writeln!(f, "speakers\t{}", self.pseudo.speakers.join(","))?;
        writeln!(f, "weights\t{}", join(&self.pseudo.raw_weights))?;
        writeln!(f, "extrapolated\t{}", join(&self.pseudo.weights))
    }
}

impl FromStr for Provenance {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut fields = std::collections::HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (key, value) = line.split_once('\t').ok_or_else(|| Error::Manifest {
                line: i + 1,
                reason: "expected key<TAB>value".into(),
            })?;
            fields.insert(key, value);
        }
        let get = |key: &str| {
            fields
                .get(key)
                .copied()
                .ok_or_else(|| Error::Invalid(format!("provenance lacks {key:?}")))
        };
        let bad = |key: &str| Error::Invalid(format!("provenance field {key:?} is malformed"));
        let floats = |key: &str| -> Result<Vec<f64>> {
            let v = get(key)?;
            if v.is_empty() {
                return Ok(Vec::new());
            }
            v.split(',').map(|x| x.parse().map_err(|_| bad(key))).collect()
        };
        let stream = get("stream")?;
        let speakers: Vec<String> = get("speakers")?.split(',').map(str::to_string).collect();
        let m: usize = get("m")?.parse().map_err(|_| bad("m"))?;
        let pseudo = PseudoSpeaker {
            raw_weights: floats("weights")?,
            weights: floats("extrapolated")?,
            speakers,
        };
        if pseudo.speakers.len() != m || pseudo.raw_weights.len() != m || pseudo.weights.len() != m {
            return Err(Error::Invalid("provenance lists disagree with m".into()));
        }
        Ok(Self {
            seed: get("seed")?.parse().map_err(|_| bad("seed"))?,
            stream: (stream != "-").then(|| stream.to_string()),
            k: get("k")?.parse().map_err(|_| bad("k"))?,
            scale: get("scale")?.parse().map_err(|_| bad("scale"))?,
            preserve: get("preserve")?.parse().map_err(|_| bad("preserve"))?,
            pseudo,
        })
    }
}

/// Full pipeline: subset, per-speaker matching, weights, extrapolation, blend, preservation.
pub fn anonymize<T: Scalar>(
    source: &Matrix<T>,
    pool: &SpeakerPool<T>,
    cfg: &BlendConfig,
    rng: &mut SplitMix64,
) -> Result<(Matrix<T>, Provenance)> {
    let pseudo = sample_pseudo_speaker(pool, cfg, rng)?;
    let out = apply_pseudo_speaker(source, pool, &pseudo, cfg.k, cfg.preserve)?;
    Ok((out, Provenance::new(cfg, pseudo)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy_pool(n: usize, frames: usize, dims: usize, seed: u64) -> SpeakerPool<f32> {
        let mut rng = SplitMix64::new(seed);
        SpeakerPool::new(
            (0..n)
                .map(|s| {
                    let data = (0..frames * dims)
                        .map(|_| (rng.next_normal() + s as f64) as f32)
                        .collect();
                    (format!("s{s}"), Matrix::new(frames, dims, data).unwrap())
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn subset_exhaustive_and_bounded() {
        let pool = toy_pool(4, 5, 2, 0);
        for seed in 0..10 {
            let mut s = sample_subset(&pool, 4, &mut SplitMix64::new(seed)).unwrap();
            s.sort_unstable();
            assert_eq!(s, vec![0, 1, 2, 3]);
        }
        assert!(sample_subset(&pool, 5, &mut SplitMix64::new(0)).is_err());
        assert!(sample_subset(&pool, 0, &mut SplitMix64::new(0)).is_err());
    }

    #[test]
    fn singleton_and_equal_logits() {
        assert_eq!(sample_weights(1, &mut SplitMix64::new(9)), vec![1.0]);
        assert_eq!(softmax(&[0.3; 4]), vec![0.25; 4]);
    }

    #[test]
    fn softmax_survives_large_logits() {
        let w = softmax(&[1000.0, 1000.0, -1000.0]);
        assert_eq!(w, vec![0.5, 0.5, 0.0]);
    }

    #[test]
    fn extrapolation_examples() {
        let w = [0.1, 0.2, 0.3, 0.4];
        assert_eq!(extrapolate_weights(&w, 0.0), w.to_vec());
        assert_eq!(extrapolate_weights(&[0.25; 4], 3.0), vec![0.25; 4]);
        assert_eq!(
            extrapolate_weights(&[1.0, 0.0, 0.0, 0.0], 1.0),
            vec![1.75, -0.25, -0.25, -0.25]
        );
    }

    #[test]
    fn blend_examples() {
        let a = Matrix::from_rows(&[[1.0f32, 2.0]]).unwrap();
        let b = Matrix::from_rows(&[[3.0f32, 6.0]]).unwrap();
        assert_eq!(blend(std::slice::from_ref(&a), &[1.0]).unwrap(), a);
        assert_eq!(
            blend(&[a.clone(), b], &[0.25, 0.75]).unwrap(),
            Matrix::from_rows(&[[2.5f32, 5.0]]).unwrap()
        );
        let same = blend(&[a.clone(), a.clone(), a.clone()], &[0.2, 0.3, 0.5]).unwrap();
        for (x, y) in same.as_slice().iter().zip(a.as_slice()) {
            assert!((x - y).abs() < 1e-6);
        }
        let c = Matrix::from_rows(&[[1.0f32]]).unwrap();
        assert!(blend(&[a.clone(), c], &[0.5, 0.5]).is_err());
        assert!(blend(&[a], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn preserve_examples() {
        let s = Matrix::from_rows(&[[1.0f64, 1.0]]).unwrap();
        let d = Matrix::from_rows(&[[0.0f64, 2.0]]).unwrap();
        assert_eq!(preserve(&s, &d, 0.0).unwrap(), d);
        assert_eq!(preserve(&s, &d, 1.0).unwrap(), s);
        let out = preserve(&s, &d, 0.2).unwrap();
        assert!((out.row(0)[0] - 0.2).abs() < 1e-15);
        assert!((out.row(0)[1] - 1.8).abs() < 1e-15);
        assert!(preserve(&s, &Matrix::from_rows(&[[0.0f64]]).unwrap(), 0.5).is_err());
    }

    #[test]
    fn config_validation() {
        let cfg = BlendConfig::default();
        assert!(cfg.validate(4).is_ok());
        assert!(cfg.validate(3).is_err());
        assert!(BlendConfig { preserve: 1.5, ..cfg }.validate(4).is_err());
        assert!(BlendConfig { scale: -0.1, ..cfg }.validate(4).is_err());
        assert!(BlendConfig { k: 0, ..cfg }.validate(4).is_err());
    }

    #[test]
    fn anonymize_is_deterministic_and_replayable() {
        let pool = toy_pool(6, 20, 3, 1);
        let source = toy_pool(1, 7, 3, 2).speakers()[0].reference.features().clone();
        let cfg = BlendConfig {
            scale: 1.0,
            preserve: 0.2,
            seed: 77,
            ..BlendConfig::default()
        };
        let (a, pa) = anonymize(&source, &pool, &cfg, &mut SplitMix64::new(cfg.seed)).unwrap();
        let (b, pb) = anonymize(&source, &pool, &cfg, &mut SplitMix64::new(cfg.seed)).unwrap();
        assert_eq!(a, b);
        assert_eq!(pa, pb);
        assert_eq!(a.shape(), source.shape());
        let parsed: Provenance = pa.to_string().parse().unwrap();
        assert_eq!(parsed, pa);
        assert_eq!(parsed.replay(&source, &pool).unwrap(), a);
    }

    #[test]
    fn anonymize_rejects_dims_mismatch() {
        let pool = toy_pool(4, 5, 3, 1);
        let source = Matrix::<f32>::zeros(2, 4);
        let err = anonymize(&source, &pool, &BlendConfig::default(), &mut SplitMix64::new(0));
        assert!(matches!(err, Err(Error::Shape(_))));
    }

    #[test]
    fn convex_output_without_extrapolation() {
        let pool = toy_pool(8, 16, 4, 3);
        let source = toy_pool(1, 5, 4, 4).speakers()[0].reference.features().clone();
        let cfg = BlendConfig::default();
        let (out, prov) = anonymize(&source, &pool, &cfg, &mut SplitMix64::new(5)).unwrap();
        assert!(prov.pseudo.weights.iter().all(|&w| w > 0.0 && w < 1.0));
        let matched: Vec<Matrix<f32>> = prov
            .pseudo
            .speakers
            .iter()
            .map(|id| {
                let r = &pool.speakers()[pool.position(id).unwrap()].reference;
                knn_match(&source, r, cfg.k).unwrap().matched
            })
            .collect();
        for (i, &v) in out.as_slice().iter().enumerate() {
            let lo = matched.iter().map(|m| m.as_slice()[i]).fold(f32::INFINITY, f32::min);
            let hi = matched.iter().map(|m| m.as_slice()[i]).fold(f32::NEG_INFINITY, f32::max);
            assert!(v >= lo - 1e-5 && v <= hi + 1e-5);
        }
    }

    proptest! {
        #[test]
        fn weights_sum_to_one(seed in any::<u64>(), m in 1usize..=16, s in 0.0f64..4.0) {
            let w = sample_weights(m, &mut SplitMix64::new(seed));
            let e = extrapolate_weights(&w, s);
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-6);
            prop_assert!((e.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        }

        #[test]
        fn blend_is_linear(seed in any::<u64>(), exp in -4i32..4) {
            let c = 2f64.powi(exp);
            let pool = toy_pool(3, 4, 3, seed);
            let mats: Vec<Matrix<f64>> = pool.speakers().iter().map(|s| s.reference.features().cast().unwrap()).collect();
            let scaled: Vec<Matrix<f64>> = mats.iter().map(|m| {
                Matrix::new(m.frames(), m.dims(), m.as_slice().iter().map(|v| v * c).collect()).unwrap()
            }).collect();
            let w = extrapolate_weights(&sample_weights(3, &mut SplitMix64::new(seed)), 1.0);
            let a = blend(&mats, &w).unwrap();
            let b = blend(&scaled, &w).unwrap();
            for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
                prop_assert_eq!(x * c, *y);
            }
        }
    }
}
