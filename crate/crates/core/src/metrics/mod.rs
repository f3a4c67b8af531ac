//! Privacy and utility metrics: equal error rate, pitch correlation, voice
//! distinctiveness, subset-weighted averaging and PCA projection.
//!
//! Everything here consumes externally produced scores, pitch tracks or
//! embeddings; no verification or recognition model is involved.

mod aggregate;
mod distinctiveness;
mod eer;
mod pca;
mod pitch;

pub use aggregate::{weighted_average, MetricReport, VPC_SUBSET_WEIGHTS};
pub use distinctiveness::{diag_dominance, gain_vd, similarity_matrix, SimilarityMatrix};
pub use eer::{compute_eer, EerResult, ScoreSet};
pub use pca::{pca_project, symmetric_eigen, Projection};
pub use pitch::{estimate_f0, pearson, pitch_correlation, F0Params, PitchTrack, MIN_COMMON_VOICED};
