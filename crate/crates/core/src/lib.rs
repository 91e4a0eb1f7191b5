//! Task-aware adaptive prompt compression.
//!
//! The pipeline lexes a prompt into categorized tokens, scores every token
//! with a perplexity provider, classifies the prompt as code, reasoning or
//! hybrid, and prunes it toward a task-specific keep-ratio while a quality
//! predictor gates each step. [`statkit`] and [`eval_harness`] reproduce
//! the statistics used to calibrate those thresholds from recorded trials.

pub mod compressor;
pub mod error;
pub mod eval_harness;
pub mod perplexity;
pub mod scoring;
pub mod statkit;
pub mod taac_engine;
pub mod task_classifier;
pub mod token_model;

pub use compressor::{CompressionResult, CompressionStrategy, SignatureSet};
pub use error::{Error, Result};
pub use perplexity::{NGramModel, PerplexityProvider};
pub use scoring::{DensityEstimate, WeightMatrix};
pub use taac_engine::{QualityCurve, TaacConfig};
pub use task_classifier::{TaskProfile, TaskType};
pub use token_model::{ClassifiedToken, TokenCategory};

/// Directory holding the bundled fixture corpus, word lists and golden trials.
pub fn fixtures_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}
