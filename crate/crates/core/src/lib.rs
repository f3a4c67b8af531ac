//! Speaker anonymization in a self-supervised latent space.
//!
//! Source features are kNN-matched against a handful of randomly chosen
//! reference speakers and the matches are blended with random (optionally
//! extrapolated) weights, producing a pseudo speaker that no enrolled speaker
//! owns. The crate also carries the evaluation metrics used to judge the
//! privacy/utility trade-off.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`). The aliases
//! below fix `f32`, matching the on-disk feature format.

pub mod blender;
pub mod error;
pub mod featstore;
pub mod matcher;
pub mod matrix;
pub mod metrics;
pub mod rng;
pub mod scalar;

pub use blender::{anonymize, BlendConfig, Provenance, PseudoSpeaker, WeightVector};
pub use error::{Error, Result};
pub use matcher::{cosine_topk, knn_match};
pub use matrix::Matrix;
pub use rng::SplitMix64;
pub use scalar::Scalar;

pub type FeatureMatrix = Matrix<f32>;
pub type FeatureMatrix64 = Matrix<f64>;
pub type SpeakerPool = featstore::SpeakerPool<f32>;
pub type SpeakerPool64 = featstore::SpeakerPool<f64>;
pub type ReferenceSet = featstore::ReferenceSet<f32>;
pub type MatchResult = matcher::MatchResult<f32>;
pub type ScoreSet = metrics::ScoreSet<f64>;
pub type PitchTrack = metrics::PitchTrack<f64>;
pub type SimilarityMatrix = metrics::SimilarityMatrix<f64>;
