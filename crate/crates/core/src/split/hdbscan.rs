//! HDBSCAN over Euclidean distance, with excess-of-mass cluster selection.

use alloc::vec;
use alloc::vec::Vec;

use super::cluster::relabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HdbscanParams {
    pub min_cluster_size: usize,
    /// Neighbourhood size for core distances, counting the point itself.
    pub min_samples: usize,
    /// Whether the root (everything in one cluster) may be selected.
    pub allow_single_cluster: bool,
}

impl Default for HdbscanParams {
    fn default() -> Self {
        HdbscanParams { min_cluster_size: 2, min_samples: 2, allow_single_cluster: false }
    }
}

const MIN_DIST: f64 = 1e-12;

fn dist(a: &[f32], b: &[f32]) -> f64 {
    libm::sqrt(
        a.iter()
            .zip(b)
            .map(|(x, y)| {
                let d = *x as f64 - *y as f64;
                d * d
            })
            .sum(),
    )
}

struct Cluster {
    parent: Option<usize>,
    birth: f64,
    stability: f64,
    children: Vec<usize>,
}

/// Cluster ids per vector; points labelled noise get singleton ids. Ids are
/// dense and numbered by smallest member index.
pub fn hdbscan(vectors: &[Vec<f32>], params: HdbscanParams) -> Vec<usize> {
    let n = vectors.len();
    let m = params.min_cluster_size.max(2);
    if n < m {
        return (0..n).collect();
    }

    let k = params.min_samples.max(1).min(n);
    let core: Vec<f64> = (0..n)
        .map(|i| {
            let mut d: Vec<f64> = (0..n).map(|j| dist(&vectors[i], &vectors[j])).collect();
            d.sort_by(f64::total_cmp);
            d[k - 1]
        })
        .collect();
    let mreach = |i: usize, j: usize| dist(&vectors[i], &vectors[j]).max(core[i]).max(core[j]);

    // Prim's algorithm on the complete mutual-reachability graph.
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut from = vec![0usize; n];
    let mut edges: Vec<(f64, usize, usize)> = Vec::with_capacity(n - 1);
    let mut cur = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let mut next = usize::MAX;
        for j in 0..n {
            if in_tree[j] {
                continue;
            }
            let d = mreach(cur, j);
            if d < best[j] {
                best[j] = d;
                from[j] = cur;
            }
            if next == usize::MAX || best[j] < best[next] {
                next = j;
            }
        }
        in_tree[next] = true;
        edges.push((best[next], from[next], next));
        cur = next;
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    // Single-linkage dendrogram: node n + t is created by edge t.
    let mut uf_parent: Vec<usize> = (0..2 * n - 1).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut children = vec![(0usize, 0usize); n - 1];
    let mut height = vec![0f64; n - 1];
    let mut size = vec![1usize; 2 * n - 1];
    for (t, (w, a, b)) in edges.iter().enumerate() {
        let (ra, rb) = (find(&mut uf_parent, *a), find(&mut uf_parent, *b));
        let node = n + t;
        uf_parent[ra] = node;
        uf_parent[rb] = node;
        children[t] = (ra, rb);
        height[t] = *w;
        size[node] = size[ra] + size[rb];
    }

    // Condense the dendrogram.
    let lambda = |d: f64| 1.0 / d.max(MIN_DIST);
    let mut clusters = vec![Cluster { parent: None, birth: 0.0, stability: 0.0, children: Vec::new() }];
    let mut point_cluster = vec![0usize; n];
    let mut stack = vec![(2 * n - 2, 0usize)];
    let mut leaves = Vec::new();
    while let Some((node, c)) = stack.pop() {
        if node < n {
            // Reached only as a lone point; it leaves at the deepest level.
            point_cluster[node] = c;
            let l = lambda(0.0);
            clusters[c].stability += l - clusters[c].birth;
            continue;
        }
        let (l, r) = children[node - n];
        let lam = lambda(height[node - n]);
        let (big_l, big_r) = (size[l] >= m, size[r] >= m);
        if big_l && big_r {
            for child in [l, r] {
                let id = clusters.len();
                clusters.push(Cluster { parent: Some(c), birth: lam, stability: 0.0, children: Vec::new() });
                clusters[c].children.push(id);
                clusters[c].stability += size[child] as f64 * (lam - clusters[c].birth);
                stack.push((child, id));
            }
            continue;
        }
        for (child, big) in [(l, big_l), (r, big_r)] {
            if big {
                stack.push((child, c));
            } else {
                leaves.clear();
                collect_leaves(child, n, &children, &mut leaves);
                for p in &leaves {
                    point_cluster[*p] = c;
                    clusters[c].stability += lam - clusters[c].birth;
                }
            }
        }
    }

    // Excess-of-mass selection, children before parents.
    let mut selected = vec![false; clusters.len()];
    let mut subtree = vec![0f64; clusters.len()];
    for c in (0..clusters.len()).rev() {
        let child_sum: f64 = clusters[c].children.iter().map(|ch| subtree[*ch]).sum();
        let is_root = c == 0;
        if clusters[c].children.is_empty() {
            subtree[c] = clusters[c].stability;
            selected[c] = !is_root || params.allow_single_cluster;
        } else if (!is_root || params.allow_single_cluster) && clusters[c].stability >= child_sum {
            subtree[c] = clusters[c].stability;
            selected[c] = true;
            deselect_below(c, &clusters, &mut selected);
        } else {
            subtree[c] = child_sum;
        }
    }

    let owner = |p: usize| {
        let mut c = Some(point_cluster[p]);
        while let Some(id) = c {
            if selected[id] {
                return Some(id);
            }
            c = clusters[id].parent;
        }
        None
    };
    relabel(n, owner)
}

fn collect_leaves(node: usize, n: usize, children: &[(usize, usize)], out: &mut Vec<usize>) {
    let mut stack = vec![node];
    while let Some(x) = stack.pop() {
        if x < n {
            out.push(x);
        } else {
            let (l, r) = children[x - n];
            stack.push(l);
            stack.push(r);
        }
    }
}

fn deselect_below(c: usize, clusters: &[Cluster], selected: &mut [bool]) {
    let mut stack = clusters[c].children.clone();
    while let Some(x) = stack.pop() {
        selected[x] = false;
        stack.extend_from_slice(&clusters[x].children);
    }
}
