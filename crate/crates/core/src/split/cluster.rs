use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdParams {
    pub min_cluster_size: usize,
    /// Cosine similarity at or above which two vectors are linked.
    pub similarity: f64,
}

impl Default for ThresholdParams {
    fn default() -> Self {
        ThresholdParams { min_cluster_size: 2, similarity: 0.95 }
    }
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            core::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}

fn unit(v: &[f32]) -> Vec<f64> {
    let norm = libm::sqrt(v.iter().map(|x| (*x as f64) * (*x as f64)).sum::<f64>());
    if norm == 0.0 {
        v.iter().map(|_| 0.0).collect()
    } else {
        v.iter().map(|x| *x as f64 / norm).collect()
    }
}

/// Single-linkage clustering under a cosine-similarity threshold.
///
/// Connected components with at least `min_cluster_size` members form
/// clusters; every other vector gets a cluster of its own. Ids are dense and
/// numbered by the smallest member index. Zero vectors are identical to each
/// other and unlike anything else.
pub fn threshold_clusters(vectors: &[Vec<f32>], params: ThresholdParams) -> Vec<usize> {
    let n = vectors.len();
    let units: Vec<Vec<f64>> = vectors.iter().map(|v| unit(v)).collect();
    let zero: Vec<bool> = units.iter().map(|u| u.iter().all(|x| *x == 0.0)).collect();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in i + 1..n {
            let linked = if zero[i] || zero[j] {
                zero[i] && zero[j]
            } else {
                let dot: f64 = units[i].iter().zip(&units[j]).map(|(a, b)| a * b).sum();
                dot >= params.similarity
            };
            if linked {
                uf.union(i, j);
            }
        }
    }
    let roots: Vec<usize> = (0..n).map(|i| uf.find(i)).collect();
    let mut size = vec![0usize; n];
    for r in &roots {
        size[*r] += 1;
    }
    let min = params.min_cluster_size.max(1);
    relabel(n, |i| if size[roots[i]] >= min { Some(roots[i]) } else { None })
}

/// Dense ids in order of first appearance; `None` members become singletons.
pub(crate) fn relabel(n: usize, group: impl Fn(usize) -> Option<usize>) -> Vec<usize> {
    let mut ids = vec![usize::MAX; n];
    let mut by_group = alloc::collections::BTreeMap::new();
    let mut next = 0;
    for (i, id) in ids.iter_mut().enumerate() {
        *id = match group(i) {
            Some(g) => *by_group.entry(g).or_insert_with(|| {
                next += 1;
                next - 1
            }),
            None => {
                next += 1;
                next - 1
            }
        };
    }
    ids
}

/// Member count per cluster id.
pub fn cluster_sizes(ids: &[usize]) -> Vec<usize> {
    let k = ids.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0; k];
    for id in ids {
        sizes[*id] += 1;
    }
    sizes
}
