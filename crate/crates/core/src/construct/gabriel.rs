//! Gabriel graph: `{A, B}` is an edge when no third point `C` lies inside the
//! sphere with diameter `AB`, i.e. `‖C − (A+B)/2‖² ≥ ‖A − B‖²/4` for every
//! `C`. Everything is evaluated on squared distances.
//!
//! A blocker must lie inside that sphere, so each pair is settled by one
//! early-exit ball query around the midpoint rather than a scan of all
//! points.

use rayon::prelude::*;

use super::knn::reverse_lists;
use super::{all_knn, check_node, concat_sorted, finish, neighbor_ids, require_pairs, ConstructError};
use crate::index::{squared_distance, IndexHandle};
use crate::{ConstructionConfig, GabrielBoundary, GabrielMode, Graph, Method, PointSet};

/// Midpoint of `a` and `b` and the squared radius of their diametral sphere.
#[inline]
pub(crate) fn diametral_sphere(a: &[f64], b: &[f64]) -> (Vec<f64>, f64) {
    let mid = a.iter().zip(b).map(|(x, y)| (x + y) / 2.0).collect();
    (mid, squared_distance(a, b) / 4.0)
}

/// Whether `c` blocks the pair with the given diametral sphere.
#[inline]
pub fn blocks(c: &[f64], mid: &[f64], radius2: f64, boundary: GabrielBoundary) -> bool {
    let d2 = squared_distance(c, mid);
    match boundary {
        GabrielBoundary::Open => d2 < radius2,
        GabrielBoundary::Closed => d2 <= radius2,
    }
}

/// Tests one pair against every other point.
pub fn gabriel_pair_test(ps: &PointSet, a: usize, b: usize, boundary: GabrielBoundary) -> Result<bool, ConstructError> {
    check_node(ps, a)?;
    check_node(ps, b)?;
    if a == b {
        return Err(ConstructError::SameNode(a));
    }
    if ps.row(a) == ps.row(b) {
        return Err(ConstructError::CoincidentPoints { a: a.min(b), b: a.max(b) });
    }
    let (mid, r2) = diametral_sphere(ps.row(a), ps.row(b));
    Ok((0..ps.len()).filter(|&c| c != a && c != b).all(|c| !blocks(ps.row(c), &mid, r2, boundary)))
}

fn pair_is_edge(index: &IndexHandle, a: usize, b: usize, boundary: GabrielBoundary) -> bool {
    let (mid, r2) = diametral_sphere(index.point(a), index.point(b));
    !index.any_within(&mid, r2, boundary == GabrielBoundary::Closed, [a, b])
}

/// Builds the Gabriel graph. Coincident points are rejected.
///
/// [`GabrielMode::Exact`] tests every pair. [`GabrielMode::Candidate`] tests
/// only pairs where one endpoint is among the other's `K` nearest neighbours;
/// each tested pair is still decided exactly, so its edges are a subset of
/// the exact graph.
pub fn gabriel_graph(ps: &PointSet, mode: GabrielMode, boundary: GabrielBoundary) -> Result<Graph, ConstructError> {
    require_pairs(ps)?;
    let cfg = ConstructionConfig::new(Method::Gabriel).with_gabriel_mode(mode).with_gabriel_boundary(boundary);
    cfg.validate()?;
    let index = IndexHandle::build(ps)?;

    let nearest = all_knn(&index, 1)?;
    if let Some(l) = nearest.iter().find(|l| l.neighbors[0].1 == 0.0) {
        let (a, b) = (l.query_id, l.neighbors[0].0);
        return Err(ConstructError::CoincidentPoints { a: a.min(b), b: a.max(b) });
    }

    let n = ps.len();
    let per_node: Vec<Vec<(u32, u32)>> = match mode {
        GabrielMode::Exact => (0..n)
            .into_par_iter()
            .map(|a| {
                (a + 1..n).filter(|&b| pair_is_edge(&index, a, b, boundary)).map(|b| (a as u32, b as u32)).collect()
            })
            .collect(),
        GabrielMode::Candidate(k) => {
            let lists = neighbor_ids(&all_knn(&index, k)?);
            let reverse = reverse_lists(&lists);
            (0..n)
                .into_par_iter()
                .map(|a| {
                    let mut cands: Vec<u32> =
                        lists[a].iter().chain(&reverse[a]).copied().filter(|&b| b as usize > a).collect();
                    cands.sort_unstable();
                    cands.dedup();
                    cands
                        .into_iter()
                        .filter(|&b| pair_is_edge(&index, a, b as usize, boundary))
                        .map(|b| (a as u32, b))
                        .collect()
                })
                .collect()
        }
    };
    finish(ps, cfg, concat_sorted(per_node), false, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(rows: &[[f64; 2]]) -> PointSet {
        PointSet::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn pair_test_examples() {
        let open = GabrielBoundary::Open;
        assert!(!gabriel_pair_test(&pts(&[[0.0, 0.0], [2.0, 0.0], [1.0, 0.0]]), 0, 1, open).unwrap());
        assert!(gabriel_pair_test(&pts(&[[0.0, 0.0], [2.0, 0.0], [1.0, 1.0]]), 0, 1, open).unwrap());
        assert!(gabriel_pair_test(&pts(&[[0.0, 0.0], [2.0, 0.0], [5.0, 5.0]]), 0, 1, open).unwrap());
    }

    #[test]
    fn closed_boundary_blocks_on_sphere() {
        let ps = pts(&[[0.0, 0.0], [2.0, 0.0], [1.0, 1.0]]);
        assert!(!gabriel_pair_test(&ps, 0, 1, GabrielBoundary::Closed).unwrap());
        let g = gabriel_graph(&ps, GabrielMode::Exact, GabrielBoundary::Closed).unwrap();
        assert!(!g.contains_edge(0, 1));
        let g = gabriel_graph(&ps, GabrielMode::Exact, GabrielBoundary::Open).unwrap();
        assert!(g.contains_edge(0, 1));
    }

    #[test]
    fn collinear_middle_point_blocks() {
        let ps = pts(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]);
        let g = gabriel_graph(&ps, GabrielMode::Exact, GabrielBoundary::Open).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn unit_square_keeps_diagonals_under_open_boundary() {
        let ps = pts(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]);
        let g = gabriel_graph(&ps, GabrielMode::Exact, GabrielBoundary::Open).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let g = gabriel_graph(&ps, GabrielMode::Exact, GabrielBoundary::Closed).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn coincident_points_are_an_error() {
        let ps = pts(&[[0.0, 0.0], [3.0, 0.0], [0.0, 0.0]]);
        assert_eq!(
            gabriel_graph(&ps, GabrielMode::Exact, GabrielBoundary::Open).unwrap_err(),
            ConstructError::CoincidentPoints { a: 0, b: 2 }
        );
        assert_eq!(
            gabriel_pair_test(&ps, 2, 0, GabrielBoundary::Open).unwrap_err(),
            ConstructError::CoincidentPoints { a: 0, b: 2 }
        );
    }
}
