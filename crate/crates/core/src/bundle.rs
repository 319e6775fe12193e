//! On-disk graph bundle (format version 1).
//!
//! A bundle is a directory:
//!
//! | file          | contents                                              |
//! |---------------|-------------------------------------------------------|
//! | `meta.json`   | counts, flags, builder config, feature checksum       |
//! | `features.csv`| `row_id,<feature names>`, one row per node            |
//! | `edges.csv`   | `u,v`, sorted; undirected edges once with `u < v`     |
//! | `labels.csv`  | `label`, one row per node (optional)                  |
//! | `weights.csv` | `u,v,weight`, same order as `edges.csv` (optional)    |
//!
//! Output is byte-stable: edges are canonical, floats use the shortest
//! decimal that round-trips, and the decimal separator is always `.`.
//! `dataset_checksum` is the hex SHA-256 of the `features.csv` bytes.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::graph::GraphError;
use crate::{ConstructionConfig, Graph, PointSet, PointSetError, Provenance};

pub const FORMAT_VERSION: u32 = 1;

pub const META_FILE: &str = "meta.json";
pub const FEATURES_FILE: &str = "features.csv";
pub const EDGES_FILE: &str = "edges.csv";
pub const LABELS_FILE: &str = "labels.csv";
pub const WEIGHTS_FILE: &str = "weights.csv";

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("graph has {graph} nodes but the point set has {points}")]
    SizeMismatch { graph: usize, points: usize },
    #[error("graph was built from a different point set (checksum {graph}, points {points})")]
    ProvenanceMismatch { graph: String, points: String },
    #[error("features.csv checksum {actual} does not match meta.json {expected}")]
    ChecksumMismatch { expected: String, actual: String },
    #[error("unsupported bundle format version {0} (expected {FORMAT_VERSION})")]
    Version(u32),
    #[error("{file} row {row}: {message}")]
    Malformed { file: &'static str, row: usize, message: String },
    #[error("meta.json: {0}")]
    Meta(#[from] serde_json::Error),
    #[error("{file}: {source}")]
    Csv { file: &'static str, source: csv::Error },
    #[error(transparent)]
    PointSet(#[from] PointSetError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleMeta {
    pub format_version: u32,
    pub n_nodes: usize,
    pub n_edges: usize,
    pub n_features: usize,
    pub directed: bool,
    pub weighted: bool,
    pub has_labels: bool,
    pub deduplicated: bool,
    pub config: Option<ConstructionConfig>,
    pub dataset_checksum: String,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BundleError + '_ {
    move |source| BundleError::Io { path: path.to_path_buf(), source }
}

fn csv_bytes<I, R>(file: &'static str, header: &[&str], rows: I) -> Result<Vec<u8>, BundleError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let wrap = |source| BundleError::Csv { file, source };
    wtr.write_record(header).map_err(wrap)?;
    for row in rows {
        wtr.write_record(row).map_err(wrap)?;
    }
    wtr.into_inner().map_err(|e| BundleError::Csv { file, source: e.into_error().into() })
}

/// Canonical `features.csv` bytes for a point set.
pub fn features_csv(ps: &PointSet) -> Vec<u8> {
    let mut header = vec!["row_id"];
    header.extend(ps.feature_names().iter().map(String::as_str));
    let rows = ps
        .rows()
        .zip(ps.row_ids())
        .map(|(row, id)| std::iter::once(id.to_string()).chain(row.iter().map(f64::to_string)).collect::<Vec<_>>());
    csv_bytes(FEATURES_FILE, &header, rows).expect("writing to memory cannot fail")
}

fn edges_csv(g: &Graph) -> Result<Vec<u8>, BundleError> {
    csv_bytes(EDGES_FILE, &["u", "v"], g.edges().iter().map(|(u, v)| [u.to_string(), v.to_string()]))
}

fn weights_csv(g: &Graph, weights: &[f64]) -> Result<Vec<u8>, BundleError> {
    let rows = g.edges().iter().zip(weights).map(|((u, v), w)| [u.to_string(), v.to_string(), w.to_string()]);
    csv_bytes(WEIGHTS_FILE, &["u", "v", "weight"], rows)
}

fn labels_csv(labels: &[String]) -> Result<Vec<u8>, BundleError> {
    csv_bytes(LABELS_FILE, &["label"], labels.iter().map(|l| [l.as_str()]))
}

/// Renders every bundle file in memory, in a fixed order.
pub fn render(g: &Graph, ps: &PointSet) -> Result<Vec<(&'static str, Vec<u8>)>, BundleError> {
    if g.n_nodes() != ps.len() {
        return Err(BundleError::SizeMismatch { graph: g.n_nodes(), points: ps.len() });
    }
    let features = features_csv(ps);
    let checksum = hex::encode(Sha256::digest(&features));
    if g.provenance().dataset_checksum != checksum {
        return Err(BundleError::ProvenanceMismatch {
            graph: g.provenance().dataset_checksum.clone(),
            points: checksum,
        });
    }
    let meta = BundleMeta {
        format_version: FORMAT_VERSION,
        n_nodes: g.n_nodes(),
        n_edges: g.n_edges(),
        n_features: ps.dim(),
        directed: g.is_directed(),
        weighted: g.weights().is_some(),
        has_labels: ps.labels().is_some(),
        deduplicated: ps.is_deduplicated(),
        config: g.provenance().config,
        dataset_checksum: checksum,
    };
    let mut meta_bytes = serde_json::to_vec_pretty(&meta)?;
    meta_bytes.push(b'\n');

    let mut files = vec![(META_FILE, meta_bytes), (FEATURES_FILE, features), (EDGES_FILE, edges_csv(g)?)];
    if let Some(labels) = ps.labels() {
        files.push((LABELS_FILE, labels_csv(labels)?));
    }
    if let Some(w) = g.weights() {
        files.push((WEIGHTS_FILE, weights_csv(g, w)?));
    }
    Ok(files)
}

/// A directory being written into a hidden sibling of its destination.
/// Nothing appears at the destination until [`StagedDir::commit`]; dropping
/// an uncommitted stage removes it.
#[derive(Debug)]
pub struct StagedDir {
    staging: PathBuf,
    dest: PathBuf,
    committed: bool,
}

impl StagedDir {
    pub fn new(dest: impl AsRef<Path>) -> Result<Self, BundleError> {
        let dest = dest.as_ref().to_path_buf();
        let parent = match dest.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&parent).map_err(io_err(&parent))?;
        let name = dest.file_name().map_or_else(|| "bundle".into(), |n| n.to_string_lossy().into_owned());
        let staging = unique_sibling(&parent, &name, "staging");
        fs::create_dir(&staging).map_err(io_err(&staging))?;
        Ok(Self { staging, dest, committed: false })
    }

    pub fn add_file(&self, name: &str, bytes: &[u8]) -> Result<(), BundleError> {
        let path = self.staging.join(name);
        fs::write(&path, bytes).map_err(io_err(&path))
    }

    /// Path of a file inside the staging directory.
    pub fn staged_path(&self, name: &str) -> PathBuf {
        self.staging.join(name)
    }

    /// Moves the staged directory into place, replacing any existing one.
    pub fn commit(mut self) -> Result<PathBuf, BundleError> {
        if self.dest.exists() {
            let parent = self.staging.parent().expect("staging has a parent").to_path_buf();
            let old = unique_sibling(&parent, "replaced", "old");
            fs::rename(&self.dest, &old).map_err(io_err(&self.dest))?;
            fs::rename(&self.staging, &self.dest).map_err(io_err(&self.dest))?;
            fs::remove_dir_all(&old).map_err(io_err(&old))?;
        } else {
            fs::rename(&self.staging, &self.dest).map_err(io_err(&self.dest))?;
        }
        self.committed = true;
        Ok(self.dest.clone())
    }
}

impl Drop for StagedDir {
    fn drop(&mut self) {
        if !self.committed {
            let _ = fs::remove_dir_all(&self.staging);
        }
    }
}

/// A bundle rendered into a [`StagedDir`].
#[derive(Debug)]
pub struct StagedBundle {
    dir: StagedDir,
}

impl StagedBundle {
    pub fn new(g: &Graph, ps: &PointSet, dest: impl AsRef<Path>) -> Result<Self, BundleError> {
        let files = render(g, ps)?;
        let dir = StagedDir::new(dest)?;
        for (file, bytes) in files {
            dir.add_file(file, &bytes)?;
        }
        Ok(Self { dir })
    }

    /// Adds an extra file (for example a run manifest) to the bundle directory.
    pub fn add_file(&self, name: &str, bytes: &[u8]) -> Result<(), BundleError> {
        self.dir.add_file(name, bytes)
    }

    pub fn commit(self) -> Result<PathBuf, BundleError> {
        self.dir.commit()
    }
}

fn unique_sibling(parent: &Path, name: &str, tag: &str) -> PathBuf {
    let nanos = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_nanos());
    parent.join(format!(".{name}.{tag}-{}-{nanos}", std::process::id()))
}

/// Writes a bundle atomically to `path`.
pub fn write_bundle(g: &Graph, ps: &PointSet, path: impl AsRef<Path>) -> Result<PathBuf, BundleError> {
    StagedBundle::new(g, ps, path)?.commit()
}

fn read_file(dir: &Path, name: &str) -> Result<Vec<u8>, BundleError> {
    let path = dir.join(name);
    fs::read(&path).map_err(io_err(&path))
}

fn records(file: &'static str, bytes: &[u8], header: &[&str]) -> Result<Vec<csv::StringRecord>, BundleError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let got = rdr.headers().map_err(|source| BundleError::Csv { file, source })?.clone();
    if !header.is_empty() && got.iter().collect::<Vec<_>>() != header {
        return Err(BundleError::Malformed { file, row: 0, message: format!("unexpected header {got:?}") });
    }
    let mut out = Vec::new();
    if header.is_empty() {
        out.push(got);
    }
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| BundleError::Malformed { file, row: row + 1, message: e.to_string() })?;
        out.push(rec);
    }
    Ok(out)
}

fn field<T: std::str::FromStr>(
    file: &'static str,
    row: usize,
    rec: &csv::StringRecord,
    i: usize,
) -> Result<T, BundleError> {
    let raw = rec.get(i).ok_or_else(|| BundleError::Malformed { file, row, message: "missing column".into() })?;
    raw.parse().map_err(|_| BundleError::Malformed { file, row, message: format!("cannot parse '{raw}'") })
}

fn parse_edges(
    file: &'static str,
    bytes: &[u8],
    header: &[&str],
    n: usize,
) -> Result<Vec<(u32, u32, f64)>, BundleError> {
    records(file, bytes, header)?
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            let row = i + 1;
            if rec.len() != header.len() {
                return Err(BundleError::Malformed {
                    file,
                    row,
                    message: format!("expected {} columns", header.len()),
                });
            }
            let u: u32 = field(file, row, rec, 0)?;
            let v: u32 = field(file, row, rec, 1)?;
            if u as usize >= n || v as usize >= n {
                return Err(BundleError::Malformed {
                    file,
                    row,
                    message: format!("edge ({u}, {v}) references a node >= {n}"),
                });
            }
            let w = if header.len() == 3 { field(file, row, rec, 2)? } else { 0.0 };
            Ok((u, v, w))
        })
        .collect()
}

/// Reads and validates a bundle.
pub fn read_bundle(path: impl AsRef<Path>) -> Result<(Graph, PointSet), BundleError> {
    let dir = path.as_ref();
    let meta: BundleMeta = serde_json::from_slice(&read_file(dir, META_FILE)?)?;
    if meta.format_version != FORMAT_VERSION {
        return Err(BundleError::Version(meta.format_version));
    }

    let features = read_file(dir, FEATURES_FILE)?;
    let actual = hex::encode(Sha256::digest(&features));
    if actual != meta.dataset_checksum {
        return Err(BundleError::ChecksumMismatch { expected: meta.dataset_checksum, actual });
    }
    let mut rows = records(FEATURES_FILE, &features, &[])?.into_iter();
    let header = rows.next().expect("header record");
    if header.get(0) != Some("row_id") || header.len() != meta.n_features + 1 {
        return Err(BundleError::Malformed { file: FEATURES_FILE, row: 0, message: "unexpected header".into() });
    }
    let mut values = Vec::with_capacity(meta.n_nodes * meta.n_features);
    let mut ids = Vec::with_capacity(meta.n_nodes);
    for (i, rec) in rows.enumerate() {
        let row = i + 1;
        if rec.len() != header.len() {
            return Err(BundleError::Malformed { file: FEATURES_FILE, row, message: "wrong column count".into() });
        }
        ids.push(field(FEATURES_FILE, row, &rec, 0)?);
        for c in 1..rec.len() {
            values.push(field::<f64>(FEATURES_FILE, row, &rec, c)?);
        }
    }
    if ids.len() != meta.n_nodes {
        return Err(BundleError::SizeMismatch { graph: meta.n_nodes, points: ids.len() });
    }
    let mut ps = PointSet::from_flat(values, meta.n_features)?
        .with_feature_names(header.iter().skip(1).map(str::to_string))?
        .with_row_ids(ids)?
        .with_dedup_flag(meta.deduplicated);
    if meta.has_labels {
        let labels = records(LABELS_FILE, &read_file(dir, LABELS_FILE)?, &["label"])?;
        ps = ps.with_labels(labels.iter().map(|r| r.get(0).unwrap_or_default().to_string()))?;
    }

    let n = meta.n_nodes;
    let edges: Vec<(u32, u32)> = parse_edges(EDGES_FILE, &read_file(dir, EDGES_FILE)?, &["u", "v"], n)?
        .into_iter()
        .map(|(u, v, _)| (u, v))
        .collect();
    let weights = if meta.weighted {
        let w = parse_edges(WEIGHTS_FILE, &read_file(dir, WEIGHTS_FILE)?, &["u", "v", "weight"], n)?;
        if w.len() != edges.len() || w.iter().zip(&edges).any(|(&(u, v, _), &e)| (u, v) != e) {
            return Err(BundleError::Malformed {
                file: WEIGHTS_FILE,
                row: 0,
                message: "does not match edges.csv".into(),
            });
        }
        Some(w.into_iter().map(|(_, _, w)| w).collect())
    } else {
        None
    };
    if edges.len() != meta.n_edges {
        return Err(BundleError::Malformed {
            file: EDGES_FILE,
            row: 0,
            message: format!("{} edges, meta.json says {}", edges.len(), meta.n_edges),
        });
    }
    let provenance = Provenance { config: meta.config, dataset_checksum: meta.dataset_checksum };
    let graph = Graph::from_canonical(n, edges, meta.directed, weights, provenance).map_err(|e| {
        let row = match &e {
            GraphError::SelfLoop { index, .. }
            | GraphError::NotNormalized { index, .. }
            | GraphError::NotSorted { index, .. }
            | GraphError::OutOfRange { index, .. } => index + 1,
            _ => 0,
        };
        BundleError::Malformed { file: EDGES_FILE, row, message: e.to_string() }
    })?;
    Ok((graph, ps))
}
