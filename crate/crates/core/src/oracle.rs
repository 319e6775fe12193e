//! Direct evaluations of each builder's defining condition.
//!
//! Nothing here touches the k-d tree: neighbour sets come from sorting all
//! distances, and every pair or triple is checked exhaustively. These are
//! O(n² log n) to O(n³) and meant for validation on small inputs.

use std::collections::BTreeSet;

use crate::construct::gabriel;
use crate::index::{cmp_candidate, euclidean_distance, squared_distance};
use crate::{ConstructionConfig, GabrielBoundary, GabrielMode, Method, PointSet, Symmetrize};

/// Edge set produced by an oracle, canonical like [`crate::Graph`].
#[derive(Debug, Clone, PartialEq)]
pub struct OracleEdges {
    pub directed: bool,
    pub edges: Vec<(u32, u32)>,
    pub weights: Option<Vec<f64>>,
}

/// k nearest neighbours of every node by exhaustive sort.
pub fn knn_sets(ps: &PointSet, k: usize) -> Vec<Vec<u32>> {
    (0..ps.len())
        .map(|i| {
            let mut all: Vec<(f64, u32)> =
                (0..ps.len()).filter(|&j| j != i).map(|j| (squared_distance(ps.row(i), ps.row(j)), j as u32)).collect();
            all.sort_by(|&a, &b| cmp_candidate(a, b));
            all.into_iter().take(k).map(|(_, j)| j).collect()
        })
        .collect()
}

fn undirected(pairs: impl IntoIterator<Item = (u32, u32)>) -> Vec<(u32, u32)> {
    let set: BTreeSet<(u32, u32)> = pairs.into_iter().map(|(u, v)| (u.min(v), u.max(v))).collect();
    set.into_iter().collect()
}

pub fn knn(ps: &PointSet, k: usize, symmetrize: Symmetrize) -> OracleEdges {
    let sets = knn_sets(ps, k);
    let directed: BTreeSet<(u32, u32)> =
        sets.iter().enumerate().flat_map(|(i, s)| s.iter().map(move |&j| (i as u32, j))).collect();
    match symmetrize {
        Symmetrize::None => OracleEdges { directed: true, edges: directed.into_iter().collect(), weights: None },
        Symmetrize::Union => OracleEdges { directed: false, edges: undirected(directed), weights: None },
    }
}

pub fn mnn(ps: &PointSet, k: usize) -> OracleEdges {
    let sets = knn_sets(ps, k);
    let mut edges = Vec::new();
    for i in 0..ps.len() {
        for j in i + 1..ps.len() {
            if sets[i].contains(&(j as u32)) && sets[j].contains(&(i as u32)) {
                edges.push((i as u32, j as u32));
            }
        }
    }
    OracleEdges { directed: false, edges, weights: None }
}

/// Every pair's shared-neighbour count, compared against `theta`.
pub fn snn(ps: &PointSet, k: usize, theta: usize, weighted: bool) -> OracleEdges {
    let sets = knn_sets(ps, k);
    let mut edges = Vec::new();
    let mut weights = Vec::new();
    for a in 0..ps.len() {
        for b in a + 1..ps.len() {
            let shared = sets[a].iter().filter(|c| sets[b].contains(c)).count();
            if shared >= theta {
                edges.push((a as u32, b as u32));
                weights.push(shared as f64);
            }
        }
    }
    OracleEdges { directed: false, edges, weights: weighted.then_some(weights) }
}

pub fn epsilon(ps: &PointSet, eps: f64) -> OracleEdges {
    let mut edges = Vec::new();
    for i in 0..ps.len() {
        for j in i + 1..ps.len() {
            if euclidean_distance(ps.row(i), ps.row(j)).expect("same dimension") < eps {
                edges.push((i as u32, j as u32));
            }
        }
    }
    OracleEdges { directed: false, edges, weights: None }
}

fn gabriel_pair(ps: &PointSet, a: usize, b: usize, boundary: GabrielBoundary) -> bool {
    let (mid, r2) = gabriel::diametral_sphere(ps.row(a), ps.row(b));
    (0..ps.len()).all(|c| c == a || c == b || !gabriel::blocks(ps.row(c), &mid, r2, boundary))
}

/// Gabriel condition over all pairs (or the candidate pairs) and all points.
pub fn gabriel(ps: &PointSet, mode: GabrielMode, boundary: GabrielBoundary) -> OracleEdges {
    let pairs: Vec<(usize, usize)> = match mode {
        GabrielMode::Exact => (0..ps.len()).flat_map(|a| (a + 1..ps.len()).map(move |b| (a, b))).collect(),
        GabrielMode::Candidate(k) => {
            let sets = knn_sets(ps, k);
            undirected(sets.iter().enumerate().flat_map(|(i, s)| s.iter().map(move |&j| (i as u32, j))))
                .into_iter()
                .map(|(a, b)| (a as usize, b as usize))
                .collect()
        }
    };
    let edges = pairs
        .into_iter()
        .filter(|&(a, b)| gabriel_pair(ps, a, b, boundary))
        .map(|(a, b)| (a as u32, b as u32))
        .collect();
    OracleEdges { directed: false, edges, weights: None }
}

/// Dispatches on `cfg.method`.
pub fn build(ps: &PointSet, cfg: &ConstructionConfig) -> OracleEdges {
    match cfg.method {
        Method::Knn => knn(ps, cfg.k, cfg.symmetrize),
        Method::Mnn => mnn(ps, cfg.k),
        Method::Snn => snn(ps, cfg.k, cfg.theta, cfg.snn_weighted),
        Method::Epsilon => epsilon(ps, cfg.epsilon),
        Method::Gabriel => gabriel(ps, cfg.gabriel_mode, cfg.gabriel_boundary),
    }
}

/// Compares a built graph with the oracle's edge set. Returns a short
/// description of the first difference, if any.
pub fn compare(graph: &crate::Graph, expected: &OracleEdges) -> Result<(), String> {
    if graph.is_directed() != expected.directed {
        return Err(format!("directedness differs: graph {} vs oracle {}", graph.is_directed(), expected.directed));
    }
    if graph.edges() != expected.edges.as_slice() {
        let got: BTreeSet<_> = graph.edges().iter().copied().collect();
        let want: BTreeSet<_> = expected.edges.iter().copied().collect();
        let missing = want.difference(&got).next();
        let extra = got.difference(&want).next();
        return Err(format!(
            "{} edges vs oracle {}; first missing {:?}, first extra {:?}",
            got.len(),
            want.len(),
            missing,
            extra
        ));
    }
    if graph.weights() != expected.weights.as_deref() {
        return Err("edge weights differ".to_string());
    }
    Ok(())
}
