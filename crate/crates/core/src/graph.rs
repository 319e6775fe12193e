use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::{ConstructionConfig, PointSet};

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("edge {index} ({u}, {v}) references a node >= {n}")]
    OutOfRange { index: usize, u: u32, v: u32, n: usize },
    #[error("edge {index} ({u}, {u}) is a self-loop")]
    SelfLoop { index: usize, u: u32 },
    #[error("edge {index} ({u}, {v}) is not stored as u < v in an undirected graph")]
    NotNormalized { index: usize, u: u32, v: u32 },
    #[error("edge {index} ({u}, {v}) is out of order or duplicated")]
    NotSorted { index: usize, u: u32, v: u32 },
    #[error("{weights} weights for {edges} edges")]
    WeightCount { weights: usize, edges: usize },
    #[error("edge weight {0} is negative or not finite")]
    BadWeight(f64),
}

/// Where a graph came from: the builder configuration and the SHA-256 of the
/// point set's canonical feature encoding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config: Option<ConstructionConfig>,
    pub dataset_checksum: String,
}

impl Provenance {
    pub fn for_points(ps: &PointSet, config: Option<ConstructionConfig>) -> Self {
        Self { config, dataset_checksum: ps.checksum() }
    }
}

/// Edge set over nodes `0..n_nodes`, kept sorted by `(u, v)`.
///
/// Undirected edges are stored once with `u < v`. There are no self-loops or
/// duplicates. Weights, when present, are parallel to `edges`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n_nodes: usize,
    edges: Vec<(u32, u32)>,
    directed: bool,
    weights: Option<Vec<f64>>,
    provenance: Provenance,
}

impl Graph {
    /// Normalizes, sorts and de-duplicates `edges`. Self-loops and
    /// out-of-range indices are rejected. For duplicate edges the first
    /// weight wins.
    pub fn new(
        n_nodes: usize,
        edges: impl IntoIterator<Item = (u32, u32)>,
        directed: bool,
        weights: Option<Vec<f64>>,
        provenance: Provenance,
    ) -> Result<Self, GraphError> {
        let mut edges: Vec<(u32, u32)> = edges.into_iter().collect();
        if let Some(w) = &weights {
            if w.len() != edges.len() {
                return Err(GraphError::WeightCount { weights: w.len(), edges: edges.len() });
            }
        }
        for (index, e) in edges.iter_mut().enumerate() {
            let (u, v) = *e;
            if u as usize >= n_nodes || v as usize >= n_nodes {
                return Err(GraphError::OutOfRange { index, u, v, n: n_nodes });
            }
            if u == v {
                return Err(GraphError::SelfLoop { index, u });
            }
            if !directed && u > v {
                *e = (v, u);
            }
        }
        let weights = match weights {
            None => {
                edges.sort_unstable();
                edges.dedup();
                None
            }
            Some(w) => {
                let mut paired: Vec<((u32, u32), f64)> = edges.into_iter().zip(w).collect();
                paired.sort_by_key(|&(e, _)| e);
                paired.dedup_by_key(|&mut (e, _)| e);
                let (e, w): (Vec<_>, Vec<_>) = paired.into_iter().unzip();
                edges = e;
                Some(w)
            }
        };
        Self::from_canonical(n_nodes, edges, directed, weights, provenance)
    }

    /// Accepts edges that are already canonical and rejects anything else.
    pub fn from_canonical(
        n_nodes: usize,
        edges: Vec<(u32, u32)>,
        directed: bool,
        weights: Option<Vec<f64>>,
        provenance: Provenance,
    ) -> Result<Self, GraphError> {
        for (index, &(u, v)) in edges.iter().enumerate() {
            if u as usize >= n_nodes || v as usize >= n_nodes {
                return Err(GraphError::OutOfRange { index, u, v, n: n_nodes });
            }
            if u == v {
                return Err(GraphError::SelfLoop { index, u });
            }
            if !directed && u > v {
                return Err(GraphError::NotNormalized { index, u, v });
            }
            if index > 0 && edges[index - 1] >= (u, v) {
                return Err(GraphError::NotSorted { index, u, v });
            }
        }
        if let Some(w) = &weights {
            if w.len() != edges.len() {
                return Err(GraphError::WeightCount { weights: w.len(), edges: edges.len() });
            }
            if let Some(&bad) = w.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
                return Err(GraphError::BadWeight(bad));
            }
        }
        Ok(Self { n_nodes, edges, directed, weights, provenance })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub(crate) fn set_config(&mut self, config: ConstructionConfig) {
        self.provenance.config = Some(config);
    }

    pub fn contains_edge(&self, u: u32, v: u32) -> bool {
        let key = if self.directed || u < v { (u, v) } else { (v, u) };
        self.edges.binary_search(&key).is_ok()
    }

    /// The underlying undirected edge set (identity for undirected graphs).
    pub fn undirected_edges(&self) -> Vec<(u32, u32)> {
        if !self.directed {
            return self.edges.clone();
        }
        let mut out: Vec<(u32, u32)> = self.edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}
