use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use slforge_core::split::*;

fn near(a: &[f32], b: &[f32]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-6)
}

#[test]
fn mean_of_questions() {
    assert!(near(&mean_embedding(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(), &[0.5, 0.5]));
    assert_eq!(mean_embedding(&[vec![0.25, -3.0, 7.0]]).unwrap(), vec![0.25, -3.0, 7.0]);
    assert_eq!(
        mean_embedding(&[vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0, 4.0]]),
        Err(SplitError::DimensionMismatch { index: 1, expected: 3, found: 4 })
    );
    assert_eq!(mean_embedding(&[]), Err(SplitError::EmptyInput));
}

fn random_vectors(n: usize, dim: usize, seed: u64) -> Vec<Vec<f32>> {
    let mut r = ChaCha20Rng::seed_from_u64(seed);
    (0..n).map(|_| (0..dim).map(|_| r.gen_range(-1.0..1.0)).collect()).collect()
}

#[test]
fn projection_is_deterministic() {
    let v = random_vectors(100, 64, 1);
    let a = random_projection(&v, 2, 9).unwrap();
    let b = random_projection(&v, 2, 9).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().all(|x| x.len() == 2));
    assert_ne!(a, random_projection(&v, 2, 10).unwrap());
}

#[test]
fn projection_identity_and_degenerate() {
    let v = random_vectors(10, 2, 2);
    assert_eq!(random_projection(&v, 2, 0).unwrap(), v);
    let wide = random_vectors(10, 64, 3);
    match random_projection(&wide, 50, 0) {
        Err(SplitError::DegenerateInput { vectors: 10, target_dim: 50, fallback }) => {
            assert_eq!(fallback.len(), 10);
            assert_eq!(fallback[3], wide[3][..50].to_vec());
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn projection_keeps_duplicates_together() {
    let mut v = random_vectors(60, 32, 4);
    v[17] = v[5].clone();
    let out = random_projection(&v, 8, 1).unwrap();
    assert_eq!(out[17], out[5]);
}

#[test]
fn projection_roughly_preserves_distances() {
    // Johnson-Lindenstrauss: squared norms are preserved in expectation.
    let v = random_vectors(200, 256, 5);
    let out = random_projection(&v, 64, 3).unwrap();
    let ratio: f64 = v
        .iter()
        .zip(&out)
        .map(|(a, b)| {
            let na: f64 = a.iter().map(|x| (*x as f64).powi(2)).sum();
            let nb: f64 = b.iter().map(|x| (*x as f64).powi(2)).sum();
            nb / na
        })
        .sum::<f64>()
        / 200.0;
    assert!((ratio - 1.0).abs() < 0.1, "{ratio}");
}

/// Two tight blobs, four scattered points.
fn planted() -> (Vec<Vec<f32>>, Vec<usize>) {
    let mut r = ChaCha20Rng::seed_from_u64(11);
    let mut v = Vec::new();
    let mut truth = Vec::new();
    for (label, centre) in [(0usize, [10.0f32, 0.0, 0.0]), (1, [0.0, 10.0, 0.0])] {
        for _ in 0..8 {
            v.push(centre.iter().map(|c| c + r.gen_range(-0.05..0.05)).collect());
            truth.push(label);
        }
    }
    for (i, p) in [[0.0f32, 0.0, 10.0], [-10.0, 0.0, 0.0], [0.0, -10.0, 0.0], [0.0, 0.0, -10.0]].iter().enumerate() {
        v.push(p.to_vec());
        truth.push(2 + i);
    }
    (v, truth)
}

/// Same-cluster relation as a set of index pairs.
fn together(ids: &[usize]) -> BTreeSet<(usize, usize)> {
    let mut s = BTreeSet::new();
    for i in 0..ids.len() {
        for j in i + 1..ids.len() {
            if ids[i] == ids[j] {
                s.insert((i, j));
            }
        }
    }
    s
}

/// Oracle: link points closer than `eps`, take connected components by
/// flood fill, then keep only components with at least `min` points.
fn brute_components(v: &[Vec<f32>], eps: f32, min: usize) -> Vec<usize> {
    let n = v.len();
    let d = |a: &[f32], b: &[f32]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f32>().sqrt();
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let mut stack = vec![s];
        comp[s] = next;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if comp[j] == usize::MAX && d(&v[i], &v[j]) < eps {
                    comp[j] = next;
                    stack.push(j);
                }
            }
        }
        next += 1;
    }
    let sizes = comp.iter().fold(BTreeMap::new(), |mut m, c| {
        *m.entry(*c).or_insert(0) += 1;
        m
    });
    comp.iter().enumerate().map(|(i, c)| if sizes[c] >= min { *c } else { next + i }).collect()
}

#[test]
fn identical_vectors_form_one_cluster() {
    let v = vec![vec![0.3f32, -0.2, 0.9]; 5];
    assert_eq!(threshold_clusters(&v, ThresholdParams::default()), vec![0; 5]);
    let p = HdbscanParams { allow_single_cluster: true, ..HdbscanParams::default() };
    assert_eq!(hdbscan(&v, p), vec![0; 5]);
}

#[test]
fn far_apart_vectors_are_singletons() {
    let v = vec![vec![1.0f32, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
    assert_eq!(threshold_clusters(&v, ThresholdParams::default()), vec![0, 1, 2]);
    assert_eq!(hdbscan(&v, HdbscanParams::default()), vec![0, 1, 2]);
}

#[test]
fn planted_blobs_threshold() {
    let (v, truth) = planted();
    let ids = threshold_clusters(&v, ThresholdParams::default());
    assert_eq!(together(&ids), together(&truth));
    assert_eq!(together(&ids), together(&brute_components(&v, 1.0, 2)));
    assert_eq!(cluster_sizes(&ids).iter().filter(|s| **s > 1).count(), 2);
    assert_eq!(cluster_sizes(&ids).iter().filter(|s| **s == 1).count(), 4);
}

#[test]
fn planted_blobs_hdbscan() {
    let (v, truth) = planted();
    let ids = hdbscan(&v, HdbscanParams { min_cluster_size: 3, min_samples: 3, allow_single_cluster: false });
    assert_eq!(together(&ids), together(&truth));
    assert_eq!(together(&ids), together(&brute_components(&v, 1.0, 3)));
}

#[test]
fn hdbscan_many_blobs() {
    let mut r = ChaCha20Rng::seed_from_u64(21);
    let mut v = Vec::new();
    let mut truth = Vec::new();
    for c in 0..6 {
        let centre: Vec<f32> = (0..5).map(|k| if k == c % 5 { 20.0 * (1 + c / 5) as f32 } else { 0.0 }).collect();
        for _ in 0..(4 + c) {
            v.push(centre.iter().map(|x| x + r.gen_range(-0.2..0.2)).collect());
            truth.push(c);
        }
    }
    let ids = hdbscan(&v, HdbscanParams { min_cluster_size: 4, min_samples: 2, allow_single_cluster: false });
    assert_eq!(together(&ids), together(&truth));
}

#[test]
fn ten_singletons_split_eight_one_one() {
    let splits = assign_splits(&[1; 10], SplitRatios::default(), 3);
    let count = |s: Split| splits.iter().filter(|x| **x == s).count();
    assert_eq!((count(Split::Train), count(Split::Validation), count(Split::Test)), (8, 1, 1));
}

#[test]
fn largest_remainder_ties_go_to_train() {
    assert_eq!(largest_remainder(10, [0.8, 0.1, 0.1]), [8, 1, 1]);
    assert_eq!(largest_remainder(5, [0.8, 0.1, 0.1]), [4, 1, 0]);
    assert_eq!(largest_remainder(3, [1.0 / 3.0; 3]), [1, 1, 1]);
    assert_eq!(largest_remainder(1, [0.5, 0.25, 0.25]), [1, 0, 0]);
    assert_eq!(largest_remainder(0, [0.8, 0.1, 0.1]), [0, 0, 0]);
}

#[test]
fn big_cluster_stays_whole() {
    // A 146-pair cluster plus 1,854 singletons.
    let mut sizes = vec![146];
    sizes.extend(std::iter::repeat(1).take(1854));
    let splits = assign_splits(&sizes, SplitRatios::default(), 5);
    let mut per_pair = Vec::new();
    for (c, n) in sizes.iter().enumerate() {
        per_pair.extend(std::iter::repeat(splits[c]).take(*n));
    }
    assert!(per_pair[..146].iter().all(|s| *s == per_pair[0]));
    assert_eq!(per_pair.len(), 2000);
    let train = per_pair.iter().filter(|s| **s == Split::Train).count();
    assert!((train as f64 / 2000.0 - 0.8).abs() <= 0.01, "{train}");
}

#[test]
fn one_per_cluster() {
    let ids = [0, 0, 0, 0, 0, 1, 2, 2];
    let pick = dedup_one_per_cluster(&ids, 4);
    assert_eq!(pick.len(), 3);
    assert_eq!(pick.iter().map(|i| ids[*i]).collect::<BTreeSet<_>>(), BTreeSet::from([0, 1, 2]));
    assert_eq!(dedup_one_per_cluster(&[0, 1, 2, 3], 9), vec![0, 1, 2, 3]);
}

#[test]
fn halving_clusters_halve_the_export() {
    let ids: Vec<usize> = (0..1000).map(|i| i / 2).collect();
    assert_eq!(dedup_one_per_cluster(&ids, 1).len(), 500);
}

#[test]
fn one_per_cluster_is_uniform() {
    let ids = [0usize; 4];
    let mut hits = [0u32; 4];
    for seed in 0..4000 {
        hits[dedup_one_per_cluster(&ids, seed)[0]] += 1;
    }
    assert!(hits.iter().all(|h| (850..1150).contains(h)), "{hits:?}");
}

fn sizes_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(prop_oneof![8 => Just(1usize), 3 => 2usize..6, 1 => 6usize..15], 1..600)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn splits_are_deterministic_and_cover_every_cluster(sizes in sizes_strategy(), seed in any::<u64>()) {
        let a = assign_splits(&sizes, SplitRatios::default(), seed);
        prop_assert_eq!(a.len(), sizes.len());
        prop_assert_eq!(&a, &assign_splits(&sizes, SplitRatios::default(), seed));
    }

    #[test]
    fn proportions_within_one_point(
        sizes in prop::collection::vec(prop_oneof![8 => Just(1usize), 3 => 2usize..6, 1 => 6usize..15], 1500..3000),
        seed in any::<u64>(),
    ) {
        let total: usize = sizes.iter().sum();
        let largest = *sizes.iter().max().unwrap();
        prop_assert!((largest as f64) < 0.01 * total as f64);
        let a = assign_splits(&sizes, SplitRatios::default(), seed);
        let mut pairs = [0usize; 3];
        for (c, s) in a.iter().enumerate() {
            pairs[Split::ALL.iter().position(|x| x == s).unwrap()] += sizes[c];
        }
        for (got, want) in pairs.iter().zip([0.8, 0.1, 0.1]) {
            prop_assert!((*got as f64 / total as f64 - want).abs() <= 0.01, "{:?} of {}", pairs, total);
        }
    }

    #[test]
    fn dedup_takes_one_member_each(ids in prop::collection::vec(0usize..50, 1..300), seed in any::<u64>()) {
        let pick = dedup_one_per_cluster(&ids, seed);
        let clusters: BTreeSet<usize> = ids.iter().copied().collect();
        prop_assert_eq!(pick.len(), clusters.len());
        prop_assert_eq!(pick.iter().map(|i| ids[*i]).collect::<BTreeSet<_>>(), clusters);
        prop_assert_eq!(pick, dedup_one_per_cluster(&ids, seed));
    }

    #[test]
    fn mean_ignores_question_order(
        qs in prop::collection::vec(prop::collection::vec(-10.0f32..10.0, 4), 1..6),
        rot in 0usize..6,
    ) {
        let mut other = qs.clone();
        other.rotate_left(rot % qs.len());
        other.reverse();
        prop_assert!(near(&mean_embedding(&qs).unwrap(), &mean_embedding(&other).unwrap()));
    }

    #[test]
    fn threshold_ids_are_dense(v in prop::collection::vec(prop::collection::vec(-1.0f32..1.0, 3), 1..40)) {
        let ids = threshold_clusters(&v, ThresholdParams { min_cluster_size: 2, similarity: 0.9 });
        let max = *ids.iter().max().unwrap();
        prop_assert_eq!(ids.iter().copied().collect::<BTreeSet<_>>().len(), max + 1);
        prop_assert_eq!(ids[0], 0);
    }
}
