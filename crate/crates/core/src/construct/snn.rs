use rayon::prelude::*;

use super::knn::reverse_lists;
use super::{all_knn, check_node, concat_sorted, finish, neighbor_ids, require_pairs, ConstructError};
use crate::index::IndexHandle;
use crate::{ConstructionConfig, Graph, Method, PointSet};

/// Number of nodes shared by the k-neighbour lists of `a` and `b`.
pub fn snn_similarity(ps: &PointSet, a: usize, b: usize, k: usize) -> Result<usize, ConstructError> {
    check_node(ps, a)?;
    check_node(ps, b)?;
    if a == b {
        return Err(ConstructError::SameNode(a));
    }
    let index = IndexHandle::build(ps)?;
    let na = index.knn_query(a, k)?;
    let nb = index.knn_query(b, k)?;
    Ok(na.ids().filter(|&j| nb.contains(j)).count())
}

/// Shared-nearest-neighbour graph: `{a, b}` iff their k-neighbour lists share
/// at least `theta` nodes. With `weighted`, the shared count is the edge
/// weight.
///
/// Only pairs with a common neighbour can qualify, so candidates come from
/// walking each neighbour `c` of `a` to the other nodes listing `c`.
pub fn snn_graph(ps: &PointSet, k: usize, theta: usize, weighted: bool) -> Result<Graph, ConstructError> {
    require_pairs(ps)?;
    let cfg = ConstructionConfig::new(Method::Snn).with_k(k).with_theta(theta).with_snn_weighted(weighted);
    cfg.validate()?;
    let index = IndexHandle::build(ps)?;
    let lists = neighbor_ids(&all_knn(&index, k)?);
    let reverse = reverse_lists(&lists);

    let per_node: Vec<Vec<(u32, u32, u32)>> = (0..lists.len())
        .into_par_iter()
        .map(|a| {
            let mut partners: Vec<u32> = lists[a]
                .iter()
                .flat_map(|&c| reverse[c as usize].iter().copied())
                .filter(|&b| b as usize > a)
                .collect();
            partners.sort_unstable();
            // each partner appears once per shared neighbour
            let mut out = Vec::new();
            for run in partners.chunk_by(|x, y| x == y) {
                if run.len() >= theta {
                    out.push((a as u32, run[0], run.len() as u32));
                }
            }
            out
        })
        .collect();
    let triples = concat_sorted(per_node);
    let weights = weighted.then(|| triples.iter().map(|&(_, _, w)| w as f64).collect());
    let edges = triples.into_iter().map(|(u, v, _)| (u, v)).collect();
    finish(ps, cfg, edges, false, weights)
}
