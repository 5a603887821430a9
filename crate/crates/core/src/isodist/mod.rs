//! Isoperimetric covariate samplers, noisy label models and the empirical
//! checks that go with them.

mod checks;
mod dataset;
mod distribution;
mod labels;

pub use checks::{
    isoperimetric_bound, isoperimetry_tail_check, isoperimetry_tail_check_batch, noise_moment_checks, sample_component,
    NoiseReport, TailReport, TailRow, MIN_TAIL_SAMPLES,
};
pub use dataset::{distance, min_pairwise_distance, sample_dataset, sidecar_path, Dataset, DatasetSidecar};
pub use distribution::{Component, ComponentKind, DistributionSpec};
pub use labels::{LabelKind, LabelModel, Target};
