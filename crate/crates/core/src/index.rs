//! Exact nearest-neighbour and radius search.
//!
//! [`IndexHandle`] is a bucketed k-d tree with per-node bounding boxes. It
//! copies the coordinates at build time, so it is an immutable snapshot that
//! can be shared between threads. All comparisons use the same
//! [`squared_distance`] routine as the brute-force path, and pruning only
//! discards a subtree when its box lower bound strictly exceeds the current
//! bound, so results agree bit-for-bit with a full scan, tie order included.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::PointSet;

const LEAF_SIZE: usize = 16;

#[derive(Debug, Error, PartialEq)]
pub enum IndexError {
    #[error("cannot index an empty point set")]
    Empty,
    #[error("query node {query} out of range for {n} points")]
    OutOfRange { query: usize, n: usize },
    #[error("k must be at least 1")]
    ZeroK,
    #[error("radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

/// Σ (xₗ − yₗ)², accumulated in dimension order.
#[inline]
pub fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = 0.0;
    for (a, b) in x.iter().zip(y) {
        let diff = a - b;
        acc += diff * diff;
    }
    acc
}

/// Euclidean distance between two vectors of equal dimension.
pub fn euclidean_distance(x: &[f64], y: &[f64]) -> Result<f64, IndexError> {
    if x.len() != y.len() {
        return Err(IndexError::DimensionMismatch(x.len(), y.len()));
    }
    Ok(squared_distance(x, y).sqrt())
}

/// Total order on candidates: distance, then node index.
#[inline]
pub(crate) fn cmp_candidate(a: (f64, u32), b: (f64, u32)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// k nearest neighbours of one node, ascending by distance then index.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborList {
    pub query_id: usize,
    pub k: usize,
    /// `(node, distance)` pairs; distances are true (rooted) Euclidean values.
    pub neighbors: Vec<(usize, f64)>,
}

impl NeighborList {
    pub fn ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.neighbors.iter().map(|&(j, _)| j)
    }

    pub fn contains(&self, node: usize) -> bool {
        self.neighbors.iter().any(|&(j, _)| j == node)
    }
}

#[derive(Debug, Clone, Copy)]
enum Node {
    Leaf { start: u32, end: u32 },
    Split { left: u32, right: u32 },
}

/// Immutable k-d tree over a snapshot of a [`PointSet`].
#[derive(Debug, Clone)]
pub struct IndexHandle {
    dim: usize,
    /// Coordinates in tree order.
    points: Vec<f64>,
    /// Original node index of each tree slot.
    ids: Vec<u32>,
    /// Tree slot of each original node.
    slot: Vec<u32>,
    nodes: Vec<Node>,
    /// Per-node bounding box, `[lo₀..lo_d, hi₀..hi_d]`.
    bounds: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq)]
struct HeapItem(f64, u32);

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_candidate((self.0, self.1), (other.0, other.1))
    }
}

/// Builds a k-d tree; points must be non-empty.
pub fn build_index(ps: &PointSet) -> Result<IndexHandle, IndexError> {
    IndexHandle::build(ps)
}

impl IndexHandle {
    pub fn build(ps: &PointSet) -> Result<Self, IndexError> {
        if ps.is_empty() {
            return Err(IndexError::Empty);
        }
        let dim = ps.dim();
        let mut order: Vec<u32> = (0..ps.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * ps.len() / LEAF_SIZE + 1);
        let mut bounds = Vec::new();
        build_node(ps, &mut order, 0, &mut nodes, &mut bounds);

        let mut points = Vec::with_capacity(ps.features().len());
        let mut slot = vec![0u32; ps.len()];
        for (s, &i) in order.iter().enumerate() {
            points.extend_from_slice(ps.row(i as usize));
            slot[i as usize] = s as u32;
        }
        Ok(Self { dim, points, ids: order, slot, nodes, bounds })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coordinates of an original node.
    pub fn point(&self, node: usize) -> &[f64] {
        self.slot_point(self.slot[node] as usize)
    }

    #[inline]
    fn slot_point(&self, s: usize) -> &[f64] {
        &self.points[s * self.dim..(s + 1) * self.dim]
    }

    #[inline]
    fn box_dist2(&self, node: usize, q: &[f64]) -> f64 {
        let b = &self.bounds[node * 2 * self.dim..(node + 1) * 2 * self.dim];
        let (lo, hi) = b.split_at(self.dim);
        let mut acc = 0.0;
        for l in 0..self.dim {
            let v = q[l];
            let diff = if v < lo[l] {
                lo[l] - v
            } else if v > hi[l] {
                v - hi[l]
            } else {
                0.0
            };
            acc += diff * diff;
        }
        acc
    }

    fn check_query(&self, query_id: usize) -> Result<(), IndexError> {
        if query_id >= self.len() {
            return Err(IndexError::OutOfRange { query: query_id, n: self.len() });
        }
        Ok(())
    }

    /// Exact k nearest neighbours of `query_id`, self excluded.
    pub fn knn_query(&self, query_id: usize, k: usize) -> Result<NeighborList, IndexError> {
        self.check_query(query_id)?;
        if k == 0 {
            return Err(IndexError::ZeroK);
        }
        let want = k.min(self.len() - 1);
        let mut neighbors = Vec::with_capacity(want);
        if want > 0 {
            let q = self.point(query_id).to_vec();
            let mut heap = BinaryHeap::with_capacity(want + 1);
            self.knn_visit(0, &q, query_id as u32, want, &mut heap);
            let mut found: Vec<HeapItem> = heap.into_vec();
            found.sort_unstable();
            neighbors.extend(found.into_iter().map(|HeapItem(d2, j)| (j as usize, d2.sqrt())));
        }
        Ok(NeighborList { query_id, k, neighbors })
    }

    fn knn_visit(&self, node: usize, q: &[f64], skip: u32, k: usize, heap: &mut BinaryHeap<HeapItem>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for s in start as usize..end as usize {
                    let id = self.ids[s];
                    if id == skip {
                        continue;
                    }
                    let item = HeapItem(squared_distance(q, self.slot_point(s)), id);
                    if heap.len() < k {
                        heap.push(item);
                    } else if item < *heap.peek().expect("heap is full") {
                        heap.pop();
                        heap.push(item);
                    }
                }
            }
            Node::Split { left, right } => {
                let (l, r) = (left as usize, right as usize);
                let (dl, dr) = (self.box_dist2(l, q), self.box_dist2(r, q));
                let (first, d_first, second, d_second) = if dl <= dr { (l, dl, r, dr) } else { (r, dr, l, dl) };
                for (child, bound) in [(first, d_first), (second, d_second)] {
                    if heap.len() == k && bound > heap.peek().expect("heap is full").0 {
                        continue;
                    }
                    self.knn_visit(child, q, skip, k, heap);
                }
            }
        }
    }

    /// Nodes `j ≠ query_id` with `d(query, j) < radius`, ascending by index.
    pub fn range_query(&self, query_id: usize, radius: f64) -> Result<Vec<usize>, IndexError> {
        self.check_query(query_id)?;
        if radius.is_nan() || radius <= 0.0 {
            return Err(IndexError::BadRadius(radius));
        }
        let q = self.point(query_id).to_vec();
        let mut out = Vec::new();
        self.range_visit(0, &q, radius, query_id as u32, &mut out);
        out.sort_unstable();
        Ok(out)
    }

    fn range_visit(&self, node: usize, q: &[f64], radius: f64, skip: u32, out: &mut Vec<usize>) {
        if self.box_dist2(node, q).sqrt() >= radius {
            return;
        }
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for s in start as usize..end as usize {
                    let id = self.ids[s];
                    if id != skip && squared_distance(q, self.slot_point(s)).sqrt() < radius {
                        out.push(id as usize);
                    }
                }
            }
            Node::Split { left, right } => {
                self.range_visit(left as usize, q, radius, skip, out);
                self.range_visit(right as usize, q, radius, skip, out);
            }
        }
    }

    /// True if some node outside `exclude` has squared distance to `center`
    /// below `bound2` (or equal to it when `inclusive`). Nearer subtrees are
    /// searched first and the search stops at the first hit.
    pub fn any_within(&self, center: &[f64], bound2: f64, inclusive: bool, exclude: [usize; 2]) -> bool {
        let inside = |d2: f64| if inclusive { d2 <= bound2 } else { d2 < bound2 };
        let exclude = [exclude[0] as u32, exclude[1] as u32];
        self.any_visit(0, center, &inside, exclude)
    }

    fn any_visit(&self, node: usize, c: &[f64], inside: &impl Fn(f64) -> bool, exclude: [u32; 2]) -> bool {
        match self.nodes[node] {
            Node::Leaf { start, end } => (start as usize..end as usize).any(|s| {
                let id = self.ids[s];
                id != exclude[0] && id != exclude[1] && inside(squared_distance(c, self.slot_point(s)))
            }),
            Node::Split { left, right } => {
                let (l, r) = (left as usize, right as usize);
                let (dl, dr) = (self.box_dist2(l, c), self.box_dist2(r, c));
                let order = if dl <= dr { [(l, dl), (r, dr)] } else { [(r, dr), (l, dl)] };
                order.into_iter().any(|(child, bound)| inside(bound) && self.any_visit(child, c, inside, exclude))
            }
        }
    }
}

fn build_node(ps: &PointSet, order: &mut [u32], offset: usize, nodes: &mut Vec<Node>, bounds: &mut Vec<f64>) -> usize {
    let dim = ps.dim();
    let id = nodes.len();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for &i in order.iter() {
        for (l, &v) in ps.row(i as usize).iter().enumerate() {
            lo[l] = lo[l].min(v);
            hi[l] = hi[l].max(v);
        }
    }
    bounds.extend_from_slice(&lo);
    bounds.extend_from_slice(&hi);

    let split_dim = (0..dim).max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])).then(b.cmp(&a)));
    let split_dim = split_dim.expect("dim >= 1");
    if order.len() <= LEAF_SIZE || hi[split_dim] == lo[split_dim] {
        nodes.push(Node::Leaf { start: offset as u32, end: (offset + order.len()) as u32 });
        return id;
    }
    nodes.push(Node::Leaf { start: 0, end: 0 });
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        ps.row(a as usize)[split_dim].total_cmp(&ps.row(b as usize)[split_dim]).then(a.cmp(&b))
    });
    let (left_part, right_part) = order.split_at_mut(mid);
    let left = build_node(ps, left_part, offset, nodes, bounds);
    let right = build_node(ps, right_part, offset + mid, nodes, bounds);
    nodes[id] = Node::Split { left: left as u32, right: right as u32 };
    id
}

/// Full O(n) scan with the same contract as [`IndexHandle::knn_query`].
pub fn brute_force_knn(ps: &PointSet, query_id: usize, k: usize) -> Result<NeighborList, IndexError> {
    if query_id >= ps.len() {
        return Err(IndexError::OutOfRange { query: query_id, n: ps.len() });
    }
    if k == 0 {
        return Err(IndexError::ZeroK);
    }
    let q = ps.row(query_id);
    let mut all: Vec<(f64, u32)> =
        (0..ps.len()).filter(|&j| j != query_id).map(|j| (squared_distance(q, ps.row(j)), j as u32)).collect();
    all.sort_unstable_by(|&a, &b| cmp_candidate(a, b));
    all.truncate(k);
    Ok(NeighborList { query_id, k, neighbors: all.into_iter().map(|(d2, j)| (j as usize, d2.sqrt())).collect() })
}
