//! Turn tabular feature data into graph-structured datasets.
//!
//! The crate covers the whole path from a CSV of feature rows to an on-disk
//! graph bundle:
//!
//! - [`ingest`]: CSV loading, de-duplication, class-balanced down-sampling,
//!   stratified train/test splitting and min-max scaling.
//! - [`index`]: an exact k-d tree answering k-nearest-neighbour and radius
//!   queries, plus a brute-force scan with the same contract.
//! - [`construct`]: the five proximity-graph builders (kNN, mutual kNN,
//!   shared nearest neighbours, epsilon-radius and Gabriel).
//! - [`oracle`]: direct O(n²)/O(n³) evaluations of each builder's defining
//!   condition, used by tests and by `graphforge validate`.
//! - [`analysis`]: connected components and topology diagnostics.
//! - [`bundle`]: the canonical, byte-stable graph bundle format.
//!
//! ```
//! use graphforge::{construct, ConstructionConfig, Method, PointSet};
//!
//! let ps = PointSet::from_rows(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![10.0, 0.0]]).unwrap();
//! let cfg = ConstructionConfig::new(Method::Mnn).with_k(1);
//! let graph = construct::build(&ps, &cfg).unwrap();
//! assert_eq!(graph.edges(), &[(0, 1)]);
//! ```

pub mod analysis;
pub mod bundle;
pub mod config;
pub mod construct;
pub mod graph;
pub mod index;
pub mod ingest;
pub mod oracle;
mod pointset;

pub use config::{ConstructionConfig, GabrielBoundary, GabrielMode, Method, Metric, Symmetrize};
pub use graph::{Graph, GraphError, Provenance};
pub use index::{euclidean_distance, squared_distance, IndexHandle, NeighborList};
pub use pointset::{PointSet, PointSetError};
