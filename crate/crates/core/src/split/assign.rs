use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios { train: 0.8, validation: 0.1, test: 0.1 }
    }
}

impl SplitRatios {
    pub fn as_array(&self) -> [f64; 3] {
        [self.train, self.validation, self.test]
    }

    pub fn is_valid(&self) -> bool {
        let a = self.as_array();
        a.iter().all(|r| *r >= 0.0) && libm::fabs(a.iter().sum::<f64>() - 1.0) < 1e-9
    }
}

/// Integer shares of `total` proportional to `ratios`, rounding by largest
/// remainder; equal remainders go to the earlier entry.
pub fn largest_remainder(total: usize, ratios: [f64; 3]) -> [usize; 3] {
    let exact: Vec<f64> = ratios.iter().map(|r| r * total as f64).collect();
    let mut out = [0usize; 3];
    for i in 0..3 {
        out[i] = libm::floor(exact[i] + 1e-9) as usize;
    }
    let mut left = total.saturating_sub(out.iter().sum());
    let mut order = [0usize, 1, 2];
    order.sort_by(|a, b| {
        let ra = exact[*a] - out[*a] as f64;
        let rb = exact[*b] - out[*b] as f64;
        rb.total_cmp(&ra).then(a.cmp(b))
    });
    for i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        out[*i] += 1;
        left -= 1;
    }
    out
}

/// Assigns each cluster (given by its size) to a split.
///
/// Pair-level targets come from [`largest_remainder`]. Clusters are visited
/// in seeded random order and each goes to the split with the largest
/// remaining deficit, preferring train, then validation, then test.
pub fn assign_splits(sizes: &[usize], ratios: SplitRatios, seed: u64) -> Vec<Split> {
    let total: usize = sizes.iter().sum();
    let targets = largest_remainder(total, ratios.as_array());
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    let mut r = rng::seeded(seed);
    rng::shuffle(&mut r, &mut order);
    let mut filled = [0usize; 3];
    let mut out = vec![Split::Train; sizes.len()];
    for c in order {
        let mut pick = 0;
        for s in 1..3 {
            let deficit = |i: usize| targets[i] as i64 - filled[i] as i64;
            if deficit(s) > deficit(pick) {
                pick = s;
            }
        }
        filled[pick] += sizes[c];
        out[c] = Split::ALL[pick];
    }
    out
}

/// One uniformly drawn member index per cluster, in ascending index order.
pub fn dedup_one_per_cluster(cluster_ids: &[usize], seed: u64) -> Vec<usize> {
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, c) in cluster_ids.iter().enumerate() {
        members.entry(*c).or_default().push(i);
    }
    let mut r = rng::seeded(seed);
    let mut out: Vec<usize> = members.values().map(|m| m[rng::below(&mut r, m.len())]).collect();
    out.sort_unstable();
    out
}
