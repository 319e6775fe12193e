use rayon::prelude::*;

use super::{concat_sorted, finish, require_pairs, ConstructError};
use crate::index::IndexHandle;
use crate::{ConstructionConfig, Graph, Method, PointSet};

/// ε-radius graph: undirected `{i, j}` iff `d(xᵢ, xⱼ) < ε` (strict).
pub fn epsilon_graph(ps: &PointSet, epsilon: f64) -> Result<Graph, ConstructError> {
    let cfg = ConstructionConfig::new(Method::Epsilon).with_epsilon(epsilon);
    cfg.validate()?;
    require_pairs(ps)?;
    let index = IndexHandle::build(ps)?;
    let per_node: Vec<Vec<(u32, u32)>> = (0..ps.len())
        .into_par_iter()
        .map(|i| {
            index
                .range_query(i, epsilon)
                .map(|hits| hits.into_iter().filter(|&j| j > i).map(|j| (i as u32, j as u32)).collect())
        })
        .collect::<Result<_, _>>()?;
    finish(ps, cfg, concat_sorted(per_node), false, None)
}
