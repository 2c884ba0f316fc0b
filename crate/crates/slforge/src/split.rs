//! Near-duplicate clustering and cluster-respecting splits of a dataset.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use slforge_core::split::{
    assign_splits, cluster_sizes, dedup_one_per_cluster, hdbscan, random_projection, threshold_clusters,
    HdbscanParams, Split, SplitError, ThresholdParams,
};

use crate::config::SplitConfig;
use crate::curate::DatasetPair;
use crate::records::{AtomicFile, RecordError};

#[derive(Debug, Clone, PartialEq)]
pub struct SplitResult {
    /// Dense cluster id per vector; outliers have their own ids.
    pub cluster_ids: Vec<usize>,
    pub splits: Vec<Split>,
    pub coords: Vec<[f32; 2]>,
    /// Indices of one member per cluster, ascending.
    pub dedup: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SplitSummary {
    pub pairs: usize,
    pub clusters: usize,
    pub largest_cluster: usize,
    pub train: usize,
    pub validation: usize,
    pub test: usize,
    pub dedup: usize,
}

impl SplitResult {
    pub fn summary(&self) -> SplitSummary {
        let sizes = cluster_sizes(&self.cluster_ids);
        let count = |s: Split| self.splits.iter().filter(|x| **x == s).count();
        SplitSummary {
            pairs: self.cluster_ids.len(),
            clusters: sizes.len(),
            largest_cluster: sizes.iter().copied().max().unwrap_or(0),
            train: count(Split::Train),
            validation: count(Split::Validation),
            test: count(Split::Test),
            dedup: self.dedup.len(),
        }
    }
}

/// Seeded projection; too few vectors fall back to truncation.
pub fn reduce(vectors: &[Vec<f32>], target_dim: usize, seed: u64) -> Result<Vec<Vec<f32>>, SplitError> {
    match random_projection(vectors, target_dim, seed) {
        Err(SplitError::DegenerateInput { vectors: n, target_dim, fallback }) => {
            log::warn!("{n} vectors cannot be projected to {target_dim} dimensions; truncating instead");
            Ok(fallback)
        }
        other => other,
    }
}

/// Reduces, clusters, assigns splits per cluster and picks one member per
/// cluster, all from `cfg.seed`.
pub fn cluster_and_split(vectors: &[Vec<f32>], cfg: &SplitConfig) -> Result<SplitResult, SplitError> {
    let reduced = reduce(vectors, cfg.cluster_dim, cfg.seed)?;
    let viz = reduce(vectors, cfg.viz_dim.max(1), cfg.seed.wrapping_add(1))?;
    let cluster_ids = match cfg.clustering.as_str() {
        "hdbscan" => hdbscan(
            &reduced,
            HdbscanParams { min_cluster_size: cfg.min_cluster_size, min_samples: cfg.min_samples, allow_single_cluster: false },
        ),
        _ => threshold_clusters(&reduced, ThresholdParams { min_cluster_size: cfg.min_cluster_size, similarity: cfg.similarity }),
    };
    let per_cluster = assign_splits(&cluster_sizes(&cluster_ids), cfg.ratios, cfg.seed);
    let splits = cluster_ids.iter().map(|c| per_cluster[*c]).collect();
    let coords = viz.iter().map(|v| [v.first().copied().unwrap_or(0.0), v.get(1).copied().unwrap_or(0.0)]).collect();
    let dedup = dedup_one_per_cluster(&cluster_ids, cfg.seed);
    Ok(SplitResult { cluster_ids, splits, coords, dedup })
}

/// Writes cluster ids, splits and 2-D coordinates into `pairs`.
pub fn apply(pairs: &mut [DatasetPair], r: &SplitResult) {
    for (i, p) in pairs.iter_mut().enumerate() {
        p.cluster_id = Some(r.cluster_ids[i] as u64);
        p.split = Some(r.splits[i]);
        p.embedding_2d = Some(r.coords[i]);
    }
}

/// CSV of `id,x,y,cluster_id,split` for pairs that have coordinates.
pub fn write_coords(pairs: &[DatasetPair], path: &Path) -> Result<usize, RecordError> {
    let mut f = AtomicFile::create(path)?;
    let io = |e| RecordError::Io { path: path.into(), source: e };
    writeln!(f.writer(), "id,x,y,cluster_id,split").map_err(io)?;
    let mut n = 0;
    for p in pairs {
        let Some([x, y]) = p.embedding_2d else { continue };
        let cluster = p.cluster_id.map(|c| c.to_string()).unwrap_or_default();
        let split = p.split.map(|s| s.name()).unwrap_or("");
        writeln!(f.writer(), "{},{x},{y},{cluster},{split}", p.id).map_err(io)?;
        n += 1;
    }
    f.commit()?;
    Ok(n)
}
