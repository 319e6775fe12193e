use std::collections::HashSet;

use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PointSetError {
    #[error("point dimension must be at least 1")]
    ZeroDimension,
    #[error("row {row} has {found} values, expected {expected}")]
    RaggedRow { row: usize, expected: usize, found: usize },
    #[error("row {row}, column {column}: value {value} is not finite")]
    NonFinite { row: usize, column: usize, value: f64 },
    #[error("{what} has length {found}, expected {expected}")]
    LengthMismatch { what: &'static str, expected: usize, found: usize },
    #[error("row id {0} appears more than once")]
    DuplicateRowId(u64),
}

/// An n × d matrix of finite feature values with optional class labels.
///
/// Rows keep a stable `row_id` (the original source row) through every
/// ingest operation, so samples and splits can be traced back to the file.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    features: Vec<f64>,
    dim: usize,
    labels: Option<Vec<String>>,
    row_ids: Vec<u64>,
    feature_names: Vec<String>,
    deduplicated: bool,
}

impl PointSet {
    /// Builds a point set from row-major values. Row ids default to `0..n`
    /// and feature names to `f0..f{d-1}`.
    pub fn from_flat(features: Vec<f64>, dim: usize) -> Result<Self, PointSetError> {
        if dim == 0 {
            return Err(PointSetError::ZeroDimension);
        }
        if !features.len().is_multiple_of(dim) {
            return Err(PointSetError::RaggedRow {
                row: features.len() / dim,
                expected: dim,
                found: features.len() % dim,
            });
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(PointSetError::NonFinite { row: pos / dim, column: pos % dim, value: features[pos] });
        }
        let n = features.len() / dim;
        Ok(Self {
            features,
            dim,
            labels: None,
            row_ids: (0..n as u64).collect(),
            feature_names: (0..dim).map(|i| format!("f{i}")).collect(),
            deduplicated: false,
        })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, PointSetError> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(rows.len() * dim);
        for (row, values) in rows.into_iter().enumerate() {
            if values.len() != dim {
                return Err(PointSetError::RaggedRow { row, expected: dim, found: values.len() });
            }
            flat.extend(values);
        }
        Self::from_flat(flat, dim)
    }

    pub fn with_labels<S: Into<String>>(mut self, labels: impl IntoIterator<Item = S>) -> Result<Self, PointSetError> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() != self.len() {
            return Err(PointSetError::LengthMismatch { what: "labels", expected: self.len(), found: labels.len() });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_row_ids(mut self, row_ids: Vec<u64>) -> Result<Self, PointSetError> {
        if row_ids.len() != self.len() {
            return Err(PointSetError::LengthMismatch { what: "row_ids", expected: self.len(), found: row_ids.len() });
        }
        let mut seen = HashSet::with_capacity(row_ids.len());
        for &id in &row_ids {
            if !seen.insert(id) {
                return Err(PointSetError::DuplicateRowId(id));
            }
        }
        self.row_ids = row_ids;
        Ok(self)
    }

    pub fn with_feature_names<S: Into<String>>(
        mut self,
        names: impl IntoIterator<Item = S>,
    ) -> Result<Self, PointSetError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() != self.dim {
            return Err(PointSetError::LengthMismatch {
                what: "feature_names",
                expected: self.dim,
                found: names.len(),
            });
        }
        self.feature_names = names;
        Ok(self)
    }

    pub(crate) fn with_dedup_flag(mut self, deduplicated: bool) -> Self {
        self.deduplicated = deduplicated;
        self
    }

    pub fn len(&self) -> usize {
        self.row_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row_ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.features.chunks_exact(self.dim)
    }

    /// Row-major feature values.
    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, i: usize) -> Option<&str> {
        self.labels.as_ref().map(|l| l[i].as_str())
    }

    pub fn row_ids(&self) -> &[u64] {
        &self.row_ids
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// True once [`crate::ingest::dedup`] has been applied.
    pub fn is_deduplicated(&self) -> bool {
        self.deduplicated
    }

    /// Subset of rows in the given order, carrying labels, ids and names.
    pub fn select(&self, indices: &[usize]) -> PointSet {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        PointSet {
            features,
            dim: self.dim,
            labels: self.labels.as_ref().map(|l| indices.iter().map(|&i| l[i].clone()).collect()),
            row_ids: indices.iter().map(|&i| self.row_ids[i]).collect(),
            feature_names: self.feature_names.clone(),
            deduplicated: self.deduplicated,
        }
    }

    /// Replaces the feature matrix, keeping every other attribute.
    pub(crate) fn map_features(&self, features: Vec<f64>) -> PointSet {
        debug_assert_eq!(features.len(), self.features.len());
        PointSet { features, ..self.clone() }
    }

    /// Hex SHA-256 of this point set's canonical `features.csv` encoding.
    pub fn checksum(&self) -> String {
        hex::encode(Sha256::digest(crate::bundle::features_csv(self)))
    }
}
