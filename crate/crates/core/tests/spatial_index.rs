mod common;

use graphforge::index::{brute_force_knn, build_index};
use graphforge::{euclidean_distance, PointSet};
use proptest::prelude::*;

#[test]
fn knn_matches_brute_force_on_thousand_points() {
    for (d, seed) in [(2, 1), (6, 2)] {
        let ps = common::uniform(1000, d, seed);
        let idx = build_index(&ps).unwrap();
        for q in 0..ps.len() {
            for k in [1, 3, 10] {
                assert_eq!(idx.knn_query(q, k).unwrap(), brute_force_knn(&ps, q, k).unwrap(), "q={q} k={k} d={d}");
            }
        }
    }
}

#[test]
fn knn_matches_brute_force_on_ten_thousand_points() {
    let ps = common::uniform(10_000, 6, 3);
    let idx = build_index(&ps).unwrap();
    for q in 0..ps.len() {
        assert_eq!(idx.knn_query(q, 3).unwrap(), brute_force_knn(&ps, q, 3).unwrap());
    }
}

#[test]
fn knn_matches_brute_force_with_heavy_ties() {
    let ps = graphforge::ingest::dedup(&common::lattice(400, 2, 4));
    let idx = build_index(&ps).unwrap();
    for q in 0..ps.len() {
        for k in [1, 3, 10] {
            assert_eq!(idx.knn_query(q, k).unwrap(), brute_force_knn(&ps, q, k).unwrap());
        }
    }
}

#[test]
fn two_points_have_one_neighbour() {
    let ps = PointSet::from_rows(vec![vec![0.0], vec![2.0]]).unwrap();
    assert_eq!(brute_force_knn(&ps, 0, 3).unwrap().neighbors, vec![(1, 2.0)]);
}

fn point_sets() -> impl Strategy<Value = PointSet> {
    (prop_oneof![Just(2usize), Just(6usize)], 1usize..300).prop_flat_map(|(d, n)| {
        prop::collection::vec(-5.0f64..5.0, n * d).prop_map(move |v| PointSet::from_flat(v, d).unwrap())
    })
}

fn vec3() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3f64..1e3, 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn oracle_equivalence(ps in point_sets(), k in prop_oneof![Just(1usize), Just(3), Just(10)]) {
        let idx = build_index(&ps).unwrap();
        for q in 0..ps.len() {
            let list = idx.knn_query(q, k).unwrap();
            prop_assert_eq!(list.neighbors.len(), k.min(ps.len() - 1));
            prop_assert!(!list.contains(q));
            prop_assert_eq!(list, brute_force_knn(&ps, q, k).unwrap());
        }
    }

    #[test]
    fn range_is_monotone(ps in point_sets(), r1 in 0.01f64..4.0, extra in 0.0f64..4.0) {
        let idx = build_index(&ps).unwrap();
        let q = ps.len() / 2;
        let small = idx.range_query(q, r1).unwrap();
        let large = idx.range_query(q, r1 + extra).unwrap();
        prop_assert!(small.iter().all(|j| large.binary_search(j).is_ok()));
    }

    #[test]
    fn distance_is_symmetric(x in vec3(), y in vec3()) {
        prop_assert_eq!(
            euclidean_distance(&x, &y).unwrap().to_bits(),
            euclidean_distance(&y, &x).unwrap().to_bits()
        );
    }

    #[test]
    fn triangle_inequality(a in vec3(), b in vec3(), c in vec3()) {
        let d = |x: &[f64], y: &[f64]| euclidean_distance(x, y).unwrap();
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-9);
    }
}
