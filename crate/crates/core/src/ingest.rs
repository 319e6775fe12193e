//! Dataset protocol: load, de-duplicate, balance, split and scale.
//!
//! Every operation is a pure function of its input and, where sampling is
//! involved, a `u64` seed. Sampling uses ChaCha8 (`rand_chacha`) seeded with
//! `seed_from_u64`, which produces the same stream on every platform.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::{PointSet, PointSetError};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("no data rows")]
    NoDataRows,
    #[error("no feature columns")]
    NoFeatureColumns,
    #[error("column '{0}' not found in header")]
    MissingColumn(String),
    #[error("row {row} (line {line}), column '{column}': cannot parse '{value}' as a number")]
    NotNumeric { row: usize, line: u64, column: String, value: String },
    #[error("row {row} (line {line}), column '{column}': value '{value}' is not finite")]
    NonFinite { row: usize, line: u64, column: String, value: String },
    #[error("row {row} (line {line}): expected {expected} columns, found {found}")]
    ColumnCount { row: usize, line: u64, expected: usize, found: usize },
    #[error("row {row} (line {line}): '{value}' is not a valid row id")]
    BadRowId { row: usize, line: u64, value: String },
    #[error("point set has no labels")]
    Unlabeled,
    #[error("class '{0}' does not occur in the data")]
    UnknownClass(String),
    #[error("target exceeds available for class '{class}': requested {target}, available {available}")]
    TargetExceedsAvailable { class: String, target: usize, available: usize },
    #[error("test fraction {0} is outside (0, 1)")]
    BadFraction(f64),
    #[error("need at least 5 rows to split, found {0}")]
    TooFewRows(usize),
    #[error("dimension mismatch: train has {train} columns, test has {test}")]
    DimensionMismatch { train: usize, test: usize },
    #[error("scaler json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    PointSet(#[from] PointSetError),
}

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub label_column: Option<String>,
    /// Column holding integer row ids; when absent ids are the 0-based data row order.
    pub id_column: Option<String>,
    pub delimiter: u8,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self { label_column: None, id_column: None, delimiter: b',' }
    }
}

impl CsvOptions {
    pub fn with_label(label: impl Into<String>) -> Self {
        Self { label_column: Some(label.into()), ..Self::default() }
    }
}

/// Loads a headered CSV. Every column other than the label and id columns
/// must hold finite numbers.
pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<PointSet, IngestError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| IngestError::Io { path: path.display().to_string(), source })?;
    read_csv(BufReader::new(file), opts)
}

pub fn read_csv<R: std::io::Read>(reader: R, opts: &CsvOptions) -> Result<PointSet, IngestError> {
    let mut rdr =
        csv::ReaderBuilder::new().delimiter(opts.delimiter).has_headers(true).flexible(true).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let find =
        |name: &str| header.iter().position(|h| h == name).ok_or_else(|| IngestError::MissingColumn(name.to_string()));
    let label_idx = opts.label_column.as_deref().map(find).transpose()?;
    let id_idx = opts.id_column.as_deref().map(find).transpose()?;
    let feature_cols: Vec<usize> = (0..header.len()).filter(|&c| Some(c) != label_idx && Some(c) != id_idx).collect();
    if feature_cols.is_empty() {
        return Err(IngestError::NoFeatureColumns);
    }

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut row_ids = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(IngestError::ColumnCount { row, line, expected: header.len(), found: record.len() });
        }
        for &c in &feature_cols {
            let raw = record[c].trim();
            let value: f64 = raw.parse().map_err(|_| IngestError::NotNumeric {
                row,
                line,
                column: header[c].clone(),
                value: raw.to_string(),
            })?;
            if !value.is_finite() {
                return Err(IngestError::NonFinite { row, line, column: header[c].clone(), value: raw.to_string() });
            }
            features.push(value);
        }
        if let Some(l) = label_idx {
            labels.push(record[l].trim().to_string());
        }
        match id_idx {
            Some(c) => {
                let raw = record[c].trim();
                let id = raw.parse::<u64>().map_err(|_| IngestError::BadRowId { row, line, value: raw.to_string() })?;
                row_ids.push(id);
            }
            None => row_ids.push(row as u64),
        }
    }
    if row_ids.is_empty() {
        return Err(IngestError::NoDataRows);
    }

    let mut ps = PointSet::from_flat(features, feature_cols.len())?
        .with_feature_names(feature_cols.iter().map(|&c| header[c].clone()))?
        .with_row_ids(row_ids)?;
    if label_idx.is_some() {
        ps = ps.with_labels(labels)?;
    }
    Ok(ps)
}

/// Writes a point set as CSV: optional `row_id` column, the feature columns,
/// then the label column when labels are present.
pub fn write_csv(
    ps: &PointSet,
    path: impl AsRef<Path>,
    label_column: &str,
    include_row_ids: bool,
) -> Result<(), IngestError> {
    let path = path.as_ref();
    let io_err = |source| IngestError::Io { path: path.display().to_string(), source };
    let file = File::create(path).map_err(io_err)?;
    let mut out = BufWriter::new(file);
    let mut header: Vec<&str> = Vec::new();
    if include_row_ids {
        header.push("row_id");
    }
    header.extend(ps.feature_names().iter().map(String::as_str));
    if ps.labels().is_some() {
        header.push(label_column);
    }
    let mut wtr = csv::Writer::from_writer(&mut out);
    wtr.write_record(&header)?;
    let mut record: Vec<String> = Vec::with_capacity(header.len());
    for (i, row) in ps.rows().enumerate() {
        record.clear();
        if include_row_ids {
            record.push(ps.row_ids()[i].to_string());
        }
        record.extend(row.iter().map(f64::to_string));
        if let Some(label) = ps.label(i) {
            record.push(label.to_string());
        }
        wtr.write_record(&record)?;
    }
    wtr.flush().map_err(io_err)?;
    drop(wtr);
    out.flush().map_err(io_err)
}

/// Removes exact duplicate rows, keeping the occurrence with the lowest row
/// id. Equality is bitwise on the feature values and includes the label when
/// labels are present.
pub fn dedup(ps: &PointSet) -> PointSet {
    let mut order: Vec<usize> = (0..ps.len()).collect();
    order.sort_by_key(|&i| ps.row_ids()[i]);
    let mut seen: HashSet<(Vec<u64>, Option<&str>)> = HashSet::with_capacity(ps.len());
    let mut keep = vec![false; ps.len()];
    for i in order {
        let key = (ps.row(i).iter().map(|v| v.to_bits()).collect(), ps.label(i));
        keep[i] = seen.insert(key);
    }
    let kept: Vec<usize> = (0..ps.len()).filter(|&i| keep[i]).collect();
    ps.select(&kept).with_dedup_flag(true)
}

/// Per-class target counts for [`stratified_downsample`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassBalanceSpec {
    pub targets: BTreeMap<String, usize>,
    pub seed: u64,
}

impl ClassBalanceSpec {
    pub fn new<S: Into<String>>(targets: impl IntoIterator<Item = (S, usize)>, seed: u64) -> Self {
        Self { targets: targets.into_iter().map(|(c, t)| (c.into(), t)).collect(), seed }
    }
}

fn class_members(ps: &PointSet) -> Result<BTreeMap<&str, Vec<usize>>, IngestError> {
    let labels = ps.labels().ok_or(IngestError::Unlabeled)?;
    let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        by_class.entry(l.as_str()).or_default().push(i);
    }
    Ok(by_class)
}

/// Samples each class uniformly without replacement down to its target
/// count. Classes without a target are dropped. Retained rows keep
/// their relative order.
pub fn stratified_downsample(ps: &PointSet, spec: &ClassBalanceSpec) -> Result<PointSet, IngestError> {
    let by_class = class_members(ps)?;
    for (class, &target) in &spec.targets {
        let available = by_class.get(class.as_str()).ok_or_else(|| IngestError::UnknownClass(class.clone()))?.len();
        if target > available {
            return Err(IngestError::TargetExceedsAvailable { class: class.clone(), target, available });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut chosen = Vec::with_capacity(spec.targets.values().sum());
    for (class, &target) in &spec.targets {
        let mut members = by_class[class.as_str()].clone();
        let (picked, _) = members.partial_shuffle(&mut rng, target);
        chosen.extend_from_slice(picked);
    }
    chosen.sort_unstable();
    Ok(ps.select(&chosen))
}

/// Per-class test counts: floor of each class's exact share, with the
/// remainder up to `round(fraction * n)` handed to the largest fractional
/// parts (ties by class order).
pub fn stratified_test_counts(class_sizes: &[usize], fraction: f64) -> Vec<usize> {
    let n: usize = class_sizes.iter().sum();
    let total = (fraction * n as f64).round() as usize;
    let shares: Vec<f64> = class_sizes.iter().map(|&c| fraction * c as f64).collect();
    let mut counts: Vec<usize> = shares.iter().map(|s| s.floor() as usize).collect();
    let remainder = total.saturating_sub(counts.iter().sum());
    let mut by_frac: Vec<usize> = (0..shares.len()).collect();
    by_frac.sort_by(|&a, &b| {
        let fa = shares[a] - shares[a].floor();
        let fb = shares[b] - shares[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &c in by_frac.iter().take(remainder) {
        counts[c] = (counts[c] + 1).min(class_sizes[c]);
    }
    counts
}

/// Stratified random split into `(train, test)`.
pub fn train_test_split(ps: &PointSet, test_fraction: f64, seed: u64) -> Result<(PointSet, PointSet), IngestError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(IngestError::BadFraction(test_fraction));
    }
    if ps.len() < 5 {
        return Err(IngestError::TooFewRows(ps.len()));
    }
    let by_class = class_members(ps)?;
    let sizes: Vec<usize> = by_class.values().map(Vec::len).collect();
    let counts = stratified_test_counts(&sizes, test_fraction);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_test = vec![false; ps.len()];
    for (members, &count) in by_class.values().zip(&counts) {
        let mut members = members.clone();
        let (picked, _) = members.partial_shuffle(&mut rng, count);
        for &i in picked.iter() {
            in_test[i] = true;
        }
    }
    let (test, train): (Vec<usize>, Vec<usize>) = (0..ps.len()).partition(|&i| in_test[i]);
    Ok((ps.select(&train), ps.select(&test)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnRange {
    pub min: f64,
    pub max: f64,
}

/// Min-max scaling parameters, serialized as `{column: {min, max}}` in
/// column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScalerParams {
    pub columns: IndexMap<String, ColumnRange>,
}

impl ScalerParams {
    pub fn fit(ps: &PointSet) -> Self {
        let mut ranges = vec![ColumnRange { min: f64::INFINITY, max: f64::NEG_INFINITY }; ps.dim()];
        for row in ps.rows() {
            for (r, &v) in ranges.iter_mut().zip(row) {
                r.min = r.min.min(v);
                r.max = r.max.max(v);
            }
        }
        Self { columns: ps.feature_names().iter().cloned().zip(ranges).collect() }
    }

    /// Maps each column through `(x - min) / (max - min)`. Columns that were
    /// constant on the fitted data map to 0. No clipping.
    pub fn transform(&self, ps: &PointSet) -> Result<PointSet, IngestError> {
        if ps.dim() != self.columns.len() {
            return Err(IngestError::DimensionMismatch { train: self.columns.len(), test: ps.dim() });
        }
        let ranges: Vec<ColumnRange> = self.columns.values().copied().collect();
        let mut out = Vec::with_capacity(ps.features().len());
        for row in ps.rows() {
            out.extend(row.iter().zip(&ranges).map(|(&v, r)| {
                let span = r.max - r.min;
                if span > 0.0 {
                    (v - r.min) / span
                } else {
                    0.0
                }
            }));
        }
        Ok(ps.map_features(out))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), IngestError> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json + "\n").map_err(|source| IngestError::Io { path: path.display().to_string(), source })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, IngestError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| IngestError::Io { path: path.display().to_string(), source })?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Fits min-max scaling on `train` only and applies it to both sets.
pub fn standardize_fit_transform(
    train: &PointSet,
    test: &PointSet,
) -> Result<(PointSet, PointSet, ScalerParams), IngestError> {
    if train.dim() != test.dim() {
        return Err(IngestError::DimensionMismatch { train: train.dim(), test: test.dim() });
    }
    let params = ScalerParams::fit(train);
    Ok((params.transform(train)?, params.transform(test)?, params))
}
