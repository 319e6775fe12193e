use rayon::prelude::*;

use super::{all_knn, concat_sorted, finish, neighbor_ids, require_pairs, ConstructError};
use crate::index::IndexHandle;
use crate::{ConstructionConfig, Graph, Method, PointSet, Symmetrize};

/// kNN graph: `i → j` for each of `i`'s `k` nearest neighbours (self
/// excluded, `k` capped at `n − 1`). With [`Symmetrize::Union`] the result is
/// undirected with `{i, j}` whenever either direction exists.
pub fn knn_graph(ps: &PointSet, k: usize, symmetrize: Symmetrize) -> Result<Graph, ConstructError> {
    require_pairs(ps)?;
    let cfg = ConstructionConfig::new(Method::Knn).with_k(k).with_symmetrize(symmetrize);
    cfg.validate()?;
    let index = IndexHandle::build(ps)?;
    let lists = neighbor_ids(&all_knn(&index, k)?);

    match symmetrize {
        Symmetrize::None => {
            let per_node: Vec<Vec<(u32, u32)>> = lists
                .par_iter()
                .enumerate()
                .map(|(i, nbrs)| {
                    let mut out: Vec<(u32, u32)> = nbrs.iter().map(|&j| (i as u32, j)).collect();
                    out.sort_unstable();
                    out
                })
                .collect();
            finish(ps, cfg, concat_sorted(per_node), true, None)
        }
        Symmetrize::Union => {
            // j lists i iff i is in j's reverse list, so {i, j} with i < j comes
            // from i's forward list or i's reverse list
            let reverse = reverse_lists(&lists);
            let per_node: Vec<Vec<(u32, u32)>> = (0..lists.len())
                .into_par_iter()
                .map(|i| {
                    let mut out: Vec<(u32, u32)> = lists[i]
                        .iter()
                        .chain(&reverse[i])
                        .filter(|&&j| j as usize > i)
                        .map(|&j| (i as u32, j))
                        .collect();
                    out.sort_unstable();
                    out.dedup();
                    out
                })
                .collect();
            finish(ps, cfg, concat_sorted(per_node), false, None)
        }
    }
}

/// Mutual kNN graph: undirected `{i, j}` iff each is among the other's `k`
/// nearest neighbours. Nodes may end up isolated.
pub fn mnn_graph(ps: &PointSet, k: usize) -> Result<Graph, ConstructError> {
    require_pairs(ps)?;
    let cfg = ConstructionConfig::new(Method::Mnn).with_k(k);
    cfg.validate()?;
    let index = IndexHandle::build(ps)?;
    let lists = neighbor_ids(&all_knn(&index, k)?);
    let per_node: Vec<Vec<(u32, u32)>> = lists
        .par_iter()
        .enumerate()
        .map(|(i, nbrs)| {
            let mut out: Vec<(u32, u32)> = nbrs
                .iter()
                .filter(|&&j| j as usize > i && lists[j as usize].contains(&(i as u32)))
                .map(|&j| (i as u32, j))
                .collect();
            out.sort_unstable();
            out
        })
        .collect();
    finish(ps, cfg, concat_sorted(per_node), false, None)
}

/// For each node `c`, the nodes whose lists contain `c`, ascending.
pub(super) fn reverse_lists(lists: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let mut reverse = vec![Vec::new(); lists.len()];
    for (i, nbrs) in lists.iter().enumerate() {
        for &j in nbrs {
            reverse[j as usize].push(i as u32);
        }
    }
    reverse
}
