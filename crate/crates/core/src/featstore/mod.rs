//! Feature files, corpus manifests and reference speaker pools.
//!
//! This is the boundary to the neural side of the system: the encoder and
//! vocoder only ever exchange `.saltfeat` files with the engine.

mod format;
mod manifest;
mod pool;

pub use format::{
    decode_features, encode_features, read_features, write_features, FEATURE_EXTENSION,
    FEATURE_MAGIC, FEATURE_VERSION, HEADER_LEN,
};
pub use manifest::{
    ManifestEntry, PoolManifest, Sampling, DEFAULT_POOL_SPEAKERS, DEFAULT_POOL_UTTERANCES,
};
pub use pool::{
    build_pool, decode_pool, encode_pool, plan_pool, read_pool, write_pool, PoolSpeaker,
    ReferenceSet, SpeakerPool, POOL_MAGIC, POOL_VERSION,
};
