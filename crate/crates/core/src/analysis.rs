//! Topology diagnostics: degrees, isolation, fragmentation and label
//! homophily.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Graph;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("{labels} labels for {nodes} nodes")]
    LabelCount { labels: usize, nodes: usize },
}

/// Union-find with path compression and union by rank.
#[derive(Clone, Debug)]
pub struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), rank: vec![0; n] }
    }

    pub fn find(&mut self, mut node: usize) -> usize {
        let mut root = node;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[node] != node {
            let parent = self.parent[node];
            self.parent[node] = root;
            node = parent;
        }
        root
    }

    pub fn union(&mut self, left: usize, right: usize) -> usize {
        let mut left = self.find(left);
        let mut right = self.find(right);
        if left == right {
            return left;
        }
        if self.rank[left] < self.rank[right] {
            std::mem::swap(&mut left, &mut right);
        }
        self.parent[right] = left;
        if self.rank[left] == self.rank[right] {
            self.rank[left] = self.rank[left].saturating_add(1);
        }
        left
    }
}

/// Weakly connected components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    pub count: usize,
    /// Component id per node; ids are dense and numbered in order of each
    /// component's smallest node.
    pub ids: Vec<usize>,
}

impl Components {
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.count];
        for &c in &self.ids {
            sizes[c] += 1;
        }
        sizes
    }
}

pub fn connected_components(g: &Graph) -> Components {
    let mut dsu = DisjointSet::new(g.n_nodes());
    for &(u, v) in g.edges() {
        dsu.union(u as usize, v as usize);
    }
    let mut root_id: Vec<Option<usize>> = vec![None; g.n_nodes()];
    let mut ids = Vec::with_capacity(g.n_nodes());
    let mut count = 0;
    for node in 0..g.n_nodes() {
        let root = dsu.find(node);
        let id = *root_id[root].get_or_insert_with(|| {
            count += 1;
            count - 1
        });
        ids.push(id);
    }
    Components { count, ids }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyReport {
    pub n_nodes: usize,
    pub n_edges: usize,
    pub directed: bool,
    /// Out-degree for directed graphs.
    pub min_degree: f64,
    pub max_degree: f64,
    pub mean_degree: f64,
    /// Nodes with no incident edge in either direction.
    pub isolated_count: usize,
    pub n_components: usize,
    pub largest_component_fraction: f64,
    /// Fraction of edges whose endpoints share a label; `None` without
    /// labels or edges.
    pub edge_homophily: Option<f64>,
    /// Per class: fraction of edges touching that class whose endpoints are
    /// both in it.
    pub class_homophily: BTreeMap<String, f64>,
}

pub fn topology_report(g: &Graph, labels: Option<&[String]>) -> Result<TopologyReport, AnalysisError> {
    let n = g.n_nodes();
    if let Some(l) = labels {
        if l.len() != n {
            return Err(AnalysisError::LabelCount { labels: l.len(), nodes: n });
        }
    }
    let mut degree = vec![0usize; n];
    let mut touched = vec![false; n];
    for &(u, v) in g.edges() {
        degree[u as usize] += 1;
        if !g.is_directed() {
            degree[v as usize] += 1;
        }
        touched[u as usize] = true;
        touched[v as usize] = true;
    }
    let components = connected_components(g);
    let largest = components.sizes().into_iter().max().unwrap_or(0);

    let mut edge_homophily = None;
    let mut class_homophily = BTreeMap::new();
    if let Some(labels) = labels {
        if g.n_edges() > 0 {
            let mut same = 0usize;
            let mut per_class: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
            for &(u, v) in g.edges() {
                let (lu, lv) = (labels[u as usize].as_str(), labels[v as usize].as_str());
                if lu == lv {
                    same += 1;
                    per_class.entry(lu).or_default().0 += 1;
                    per_class.entry(lu).or_default().1 += 1;
                } else {
                    per_class.entry(lu).or_default().1 += 1;
                    per_class.entry(lv).or_default().1 += 1;
                }
            }
            edge_homophily = Some(same as f64 / g.n_edges() as f64);
            class_homophily = per_class.into_iter().map(|(c, (s, t))| (c.to_string(), s as f64 / t as f64)).collect();
        }
    }

    Ok(TopologyReport {
        n_nodes: n,
        n_edges: g.n_edges(),
        directed: g.is_directed(),
        min_degree: degree.iter().copied().min().unwrap_or(0) as f64,
        max_degree: degree.iter().copied().max().unwrap_or(0) as f64,
        mean_degree: if n == 0 { 0.0 } else { degree.iter().sum::<usize>() as f64 / n as f64 },
        isolated_count: touched.iter().filter(|t| !**t).count(),
        n_components: components.count,
        largest_component_fraction: if n == 0 { 0.0 } else { largest as f64 / n as f64 },
        edge_homophily,
        class_homophily,
    })
}

impl fmt::Display for TopologyReport {
    /// Aligned two-column table.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
        let mut rows = vec![
            ("nodes", self.n_nodes.to_string()),
            ("edges", self.n_edges.to_string()),
            ("directed", self.directed.to_string()),
            ("min degree", format!("{}", self.min_degree)),
            ("max degree", format!("{}", self.max_degree)),
            ("mean degree", format!("{:.4}", self.mean_degree)),
            ("isolated nodes", self.isolated_count.to_string()),
            ("components", self.n_components.to_string()),
            ("largest component", format!("{:.4}", self.largest_component_fraction)),
            ("edge homophily", opt(self.edge_homophily)),
        ];
        for (class, h) in &self.class_homophily {
            rows.push(("", format!("{class}: {h:.4}")));
        }
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in rows {
            writeln!(f, "{k:<width$}  {v}")?;
        }
        Ok(())
    }
}
