//! Iterative dense-cluster extraction for mixed tabular data.
//!
//! The pipeline: load a schema'd CSV, impute and one-hot encode it, select
//! features by combining ANOVA and ablation rankings, then repeatedly
//! cluster with HDBSCAN, score each cluster's density around its medoid,
//! extract the dense clusters, and re-cluster the remainder until no dense
//! cluster is left. Per iteration, principal features distinguishing each
//! cluster pair are identified with the exact 1-D Wasserstein distance.
//!
//! Every stage is pure and deterministic given its inputs and seed, and
//! persists to plain CSV/JSON so runs are reproducible and diffable.

pub mod clif;
pub mod cluster;
pub mod density;
pub mod error;
pub mod featsel;
pub mod matrix;
pub mod metrics;
pub mod pfi;
pub mod report;
pub mod synth;
pub mod tabular;

pub use clif::{run_clif, ClifConfig, ClifResult, IterationRecord, TerminalReason};
pub use cluster::{hdbscan, ClusterLabels, Clusterer, Hdbscan, HdbscanParams};
pub use density::{cluster_density, density_ranking, medoid, ClusterInfo};
pub use error::{ClifError, Result};
pub use featsel::{
    ablation_rank, anova_f, combine_select, rank_anova, FeatureRanking, SelectionResult,
    SelectionSource,
};
pub use matrix::FeatureMatrix;
pub use metrics::adjusted_rand_index;
pub use pfi::{
    pfi_report, principal_features, wasserstein_1d, PfiThresholds, PrincipalFeatureFinding,
};
pub use synth::{generate_blobs, BlobSpec, GeneratedData};
pub use tabular::{
    impute, load_csv, one_hot_encode, parse_schema_file, parse_schema_text, preprocess,
    scale_minmax, unscale, ColumnKind, ColumnSchema, Dataset, PreprocessReport, Value,
};
