mod support;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use slforge::config::SplitConfig;
use slforge::curate::{DatasetPair, Provenance};
use slforge::embed::embed_pairs;
use slforge::split::{apply, cluster_and_split, write_coords, SplitResult};
use slforge_core::split::{cluster_sizes, Split};
use support::planted;

fn run(p: &support::Planted, cfg: &SplitConfig, workers: usize) -> SplitResult {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().unwrap();
    pool.install(|| {
        let v = embed_pairs(&p.questions, p, 64).unwrap();
        cluster_and_split(&v, cfg).unwrap()
    })
}

/// Same-cluster relation as a set of (first member, member) edges.
fn partition(ids: &[usize]) -> BTreeSet<Vec<usize>> {
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, c) in ids.iter().enumerate() {
        groups.entry(*c).or_default().push(i);
    }
    groups.into_values().collect()
}

#[test]
fn ten_thousand_planted_pairs() {
    let p = planted(10_000, 128, 7);
    let cfg = SplitConfig::default();
    let r = run(&p, &cfg, 4);

    assert_eq!(partition(&r.cluster_ids), partition(&p.cluster));

    let mut split_of: BTreeMap<usize, Split> = BTreeMap::new();
    for (c, s) in r.cluster_ids.iter().zip(&r.splits) {
        assert_eq!(*split_of.entry(*c).or_insert(*s), *s, "cluster {c} spans splits");
    }

    let n = r.splits.len() as f64;
    for (s, target) in Split::ALL.iter().zip([0.8, 0.1, 0.1]) {
        let share = r.splits.iter().filter(|x| *x == s).count() as f64 / n;
        assert!((share - target).abs() <= 0.01, "{s:?}: {share}");
    }

    assert_eq!(r.dedup.len(), cluster_sizes(&r.cluster_ids).len());
    let picked: BTreeSet<usize> = r.dedup.iter().map(|i| r.cluster_ids[*i]).collect();
    assert_eq!(picked.len(), r.dedup.len());

    for workers in [1, 2, 8] {
        assert_eq!(run(&p, &cfg, workers), r, "{workers} workers");
    }
    let other = run(&p, &SplitConfig { seed: 43, ..cfg.clone() }, 4);
    assert_eq!(partition(&other.cluster_ids), partition(&r.cluster_ids));
    assert_ne!(other.splits, r.splits);
}

#[test]
fn hdbscan_recovers_planted_clusters() {
    let p = planted(600, 64, 11);
    let cfg = SplitConfig { clustering: "hdbscan".into(), ..SplitConfig::default() };
    let r = run(&p, &cfg, 2);
    // Isolated points may attach to the nearest cluster; planted groups
    // must stay whole and apart.
    let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
    for g in partition(&p.cluster).into_iter().filter(|g| g.len() >= 2) {
        let found: BTreeSet<usize> = g.iter().map(|i| r.cluster_ids[*i]).collect();
        assert_eq!(found.len(), 1, "{g:?} split up");
        let c = *found.iter().next().unwrap();
        assert!(owner.insert(c, g[0]).is_none(), "cluster {c} merges two planted groups");
    }
    assert_eq!(run(&p, &cfg, 1), r);
}

#[test]
fn coordinates_file() {
    let p = planted(50, 16, 3);
    let r = run(&p, &SplitConfig::default(), 1);
    let mut pairs: Vec<DatasetPair> = p
        .questions
        .iter()
        .enumerate()
        .map(|(i, q)| {
            DatasetPair::new(q.clone(), format!("ASK {{ wd:Q{i} ?p ?o }}"), Provenance {
                interval: "I1".into(),
                raw_hash: format!("{i:064x}"),
                model: "m".into(),
            })
        })
        .collect();
    apply(&mut pairs, &r);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("coords.csv");
    assert_eq!(write_coords(&pairs, &path).unwrap(), 50);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("id,x,y,cluster_id,split"));
    for (line, pair) in lines.zip(&pairs) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 5);
        assert_eq!(cols[0], pair.id);
        assert_eq!(cols[1].parse::<f32>().unwrap(), pair.embedding_2d.unwrap()[0]);
        assert_eq!(cols[3].parse::<u64>().unwrap(), pair.cluster_id.unwrap());
        assert_eq!(cols[4], pair.split.unwrap().name());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn clusters_never_span_splits(n in 1usize..300, seed in any::<u64>(), data_seed in any::<u64>()) {
        let p = planted(n, 32, data_seed);
        let cfg = SplitConfig { seed, ..SplitConfig::default() };
        let r = run(&p, &cfg, 2);
        let mut split_of: BTreeMap<usize, Split> = BTreeMap::new();
        for (c, s) in r.cluster_ids.iter().zip(&r.splits) {
            prop_assert_eq!(*split_of.entry(*c).or_insert(*s), *s);
        }
        prop_assert_eq!(r.dedup.len(), split_of.len());
        prop_assert_eq!(r.coords.len(), n);
    }
}
