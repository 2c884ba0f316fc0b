//! Embedding aggregation, dimensionality reduction, near-duplicate
//! clustering and cluster-respecting train/validation/test assignment.

mod assign;
mod cluster;
mod hdbscan;
mod reduce;
mod rng;

use alloc::vec::Vec;
use core::fmt;

pub use assign::{assign_splits, dedup_one_per_cluster, largest_remainder, Split, SplitRatios};
pub use cluster::{cluster_sizes, threshold_clusters, ThresholdParams};
pub use hdbscan::{hdbscan, HdbscanParams};
pub use reduce::{mean_embedding, random_projection};

#[derive(Debug, Clone, PartialEq)]
pub enum SplitError {
    /// Vector `index` has `found` components where `expected` were seen first.
    DimensionMismatch { index: usize, expected: usize, found: usize },
    /// Fewer vectors than target dimensions. `fallback` holds the inputs
    /// truncated to the target dimension.
    DegenerateInput { vectors: usize, target_dim: usize, fallback: Vec<Vec<f32>> },
    EmptyInput,
}

impl fmt::Display for SplitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplitError::DimensionMismatch { index, expected, found } => {
                write!(f, "vector {index} has dimension {found}, expected {expected}")
            }
            SplitError::DegenerateInput { vectors, target_dim, .. } => {
                write!(f, "{vectors} vectors cannot be reduced to {target_dim} dimensions")
            }
            SplitError::EmptyInput => f.write_str("no input vectors"),
        }
    }
}

impl core::error::Error for SplitError {}
