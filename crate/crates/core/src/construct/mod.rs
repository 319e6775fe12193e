//! The five proximity-graph builders.
//!
//! Each builder is a pure function of its point set and parameters. Per-node
//! work runs on the current rayon pool and is gathered in node order, so the
//! resulting [`Graph`] does not depend on the number of worker threads.

mod epsilon;
pub(crate) mod gabriel;
mod knn;
mod snn;

use rayon::prelude::*;
use thiserror::Error;

use crate::config::ConfigError;
use crate::graph::GraphError;
use crate::index::{IndexError, IndexHandle, NeighborList};
use crate::{ConstructionConfig, Graph, Method, PointSet, Provenance};

pub use epsilon::epsilon_graph;
pub use gabriel::{gabriel_graph, gabriel_pair_test};
pub use knn::{knn_graph, mnn_graph};
pub use snn::{snn_graph, snn_similarity};

#[derive(Debug, Error, PartialEq)]
pub enum ConstructError {
    #[error("need at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("points {a} and {b} coincide; run dedup before building a Gabriel graph")]
    CoincidentPoints { a: usize, b: usize },
    #[error("node pair ({0}, {0}) is not a pair of distinct nodes")]
    SameNode(usize),
    #[error("node {node} out of range for {n} points")]
    NodeOutOfRange { node: usize, n: usize },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Builds the graph selected by `cfg.method`.
pub fn build(ps: &PointSet, cfg: &ConstructionConfig) -> Result<Graph, ConstructError> {
    cfg.validate()?;
    let graph = match cfg.method {
        Method::Knn => knn_graph(ps, cfg.k, cfg.symmetrize)?,
        Method::Mnn => mnn_graph(ps, cfg.k)?,
        Method::Snn => snn_graph(ps, cfg.k, cfg.theta, cfg.snn_weighted)?,
        Method::Epsilon => epsilon_graph(ps, cfg.epsilon)?,
        Method::Gabriel => gabriel_graph(ps, cfg.gabriel_mode, cfg.gabriel_boundary)?,
    };
    // record the full config, including parameters the method ignores
    let mut graph = graph;
    graph.set_config(*cfg);
    Ok(graph)
}

fn require_pairs(ps: &PointSet) -> Result<(), ConstructError> {
    if ps.len() < 2 {
        return Err(ConstructError::TooFewPoints(ps.len()));
    }
    Ok(())
}

fn check_node(ps: &PointSet, node: usize) -> Result<(), ConstructError> {
    if node >= ps.len() {
        return Err(ConstructError::NodeOutOfRange { node, n: ps.len() });
    }
    Ok(())
}

/// k-nearest-neighbour lists for every node, in node order.
pub fn all_knn(index: &IndexHandle, k: usize) -> Result<Vec<NeighborList>, IndexError> {
    (0..index.len()).into_par_iter().map(|i| index.knn_query(i, k)).collect()
}

/// Neighbour ids only, as `u32`, for every node.
fn neighbor_ids(lists: &[NeighborList]) -> Vec<Vec<u32>> {
    lists.iter().map(|l| l.ids().map(|j| j as u32).collect()).collect()
}

/// Concatenates per-node edge lists produced in node order; each list must
/// already be sorted and hold only edges whose first endpoint is that node.
fn concat_sorted<T: Send>(per_node: Vec<Vec<T>>) -> Vec<T> {
    let total = per_node.iter().map(Vec::len).sum();
    let mut out = Vec::with_capacity(total);
    for part in per_node {
        out.extend(part);
    }
    out
}

fn finish(
    ps: &PointSet,
    config: ConstructionConfig,
    edges: Vec<(u32, u32)>,
    directed: bool,
    weights: Option<Vec<f64>>,
) -> Result<Graph, ConstructError> {
    let provenance = Provenance::for_points(ps, Some(config));
    Ok(Graph::from_canonical(ps.len(), edges, directed, weights, provenance)?)
}
