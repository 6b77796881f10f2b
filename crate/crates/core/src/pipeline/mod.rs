//! Seeded, manifest-tracked experiment driver.
//!
//! Output tree under `out_dir`:
//!
//! ```text
//! preprocess/{train.csv,test.csv,meta.txt}
//! baseline/<model>.{model,report.txt,report.kv,confusion.csv}, comparison.txt
//! small_sample/{subset_train.csv,subset_test.csv}, <model>.{...}, comparison.txt
//! quantum/{weights.txt,embeddings_train.csv,embeddings_test.csv}, svm.{...}
//! report/{comparison.txt,comparison.kv}
//! manifest.txt
//! ```

mod config;
mod manifest;
mod report;
mod seeds;
mod stages;

use std::io;
use std::path::Path;

use thiserror::Error;

use crate::classical::ClassicalError;
use crate::data::DataError;
use crate::metrics::MetricsError;
use crate::quantum::QuantumError;

pub use config::{ExperimentConfig, GammaMode, ModelKind, QuantumKernel};
pub use manifest::{RunManifest, MANIFEST_FILE};
pub use report::{parse_comparison, render_comparison_kv, render_comparison_text, ComparisonRow, Experiment};
pub use seeds::{derive_seed, Stage};
pub use stages::{
    cmd_baseline, cmd_preprocess, cmd_quantum, cmd_report, cmd_small_sample, cmd_verify_manifest,
    small_sample_split, ComparisonOutcome, ExperimentOutcome, PreprocessSummary,
};

pub const PREPROCESS_DIR: &str = "preprocess";
pub const BASELINE_DIR: &str = "baseline";
pub const SMALL_SAMPLE_DIR: &str = "small_sample";
pub const QUANTUM_DIR: &str = "quantum";
pub const REPORT_DIR: &str = "report";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{0}")]
    Quantum(#[from] QuantumError),
    #[error("{0}")]
    Model(#[from] ClassicalError),
    #[error("{0}")]
    Metrics(#[from] MetricsError),
    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<PipelineError>,
    },
    #[error("{} model(s) failed: {}", .0.len(), .0.join("; "))]
    ModelsFailed(Vec<String>),
    #[error(
        "training split has a single class (benign={benign}, attack={attack}); \
         choose a different seed or set stratified=true"
    )]
    SingleClassSubset { benign: usize, attack: usize },
    #[error("missing {0}; run the `preprocess` command first")]
    NotPreprocessed(String),
    #[error("no experiment outputs found; expected any of: {}", .0.join(", "))]
    MissingInputs(Vec<String>),
    #[error("manifest verification failed: {}", .0.join("; "))]
    ManifestMismatch(Vec<String>),
}

impl PipelineError {
    /// Process exit status: 1 config, 2 data, 3 model.
    pub fn exit_code(&self) -> u8 {
        match self {
            PipelineError::Config(_) => 1,
            PipelineError::Data(_)
            | PipelineError::Io { .. }
            | PipelineError::SingleClassSubset { .. }
            | PipelineError::MissingInputs(_)
            | PipelineError::NotPreprocessed(_)
            | PipelineError::ManifestMismatch(_) => 2,
            PipelineError::Quantum(_)
            | PipelineError::Model(_)
            | PipelineError::Metrics(_)
            | PipelineError::ModelsFailed(_) => 3,
            PipelineError::Stage { source, .. } => source.exit_code(),
        }
    }

    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        PipelineError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub(crate) fn in_stage(self, stage: impl Into<String>) -> Self {
        PipelineError::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, PipelineError>;
