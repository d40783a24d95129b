//! Training data: a feature matrix with one stage's labels.

use thiserror::Error;

use crate::datamodel::{ClassLabel, Stage};
use crate::features::ParsedFeatureCsv;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum ForestError {
    #[error("dataset is empty")]
    Empty,
    #[error("row {0} has width {1}, schema has {2} columns")]
    RowWidth(usize, usize, usize),
    #[error("row {0} value is not finite")]
    NonFinite(usize),
    #[error("label {0} does not belong to stage {1}")]
    LabelStage(ClassLabel, Stage),
    #[error("ids/labels/rows length mismatch")]
    LengthMismatch,
    #[error("training requires both classes, found only {0}")]
    SingleClass(ClassLabel),
    #[error("need at least {0} rows, got {1}")]
    TooFewRows(usize, usize),
    #[error("class {0} has {1} rows, fewer than k={2}")]
    ClassTooSmall(ClassLabel, usize, usize),
    #[error("k-fold requires k >= 2, got {0}")]
    BadK(usize),
    #[error("gini of an empty node")]
    EmptyNode,
    #[error("ROC needs scores from both classes")]
    OneClassScores,
    #[error("feature file has no label column")]
    MissingLabels,
}

/// A labeled feature matrix for one classification stage.
///
/// Row width equals the schema length and every label belongs to the
/// stage's label space; both are enforced at construction.
#[derive(Debug, Clone)]
pub struct Dataset<R> {
    stage: Stage,
    schema: Vec<String>,
    rows: Vec<Vec<R>>,
    labels: Vec<ClassLabel>,
    label_idx: Vec<usize>,
    ids: Vec<String>,
}

impl<R: Scalar> Dataset<R> {
    pub fn new(
        stage: Stage,
        schema: Vec<String>,
        rows: Vec<Vec<R>>,
        labels: Vec<ClassLabel>,
        ids: Vec<String>,
    ) -> Result<Self, ForestError> {
        if rows.is_empty() {
            return Err(ForestError::Empty);
        }
        if rows.len() != labels.len() || rows.len() != ids.len() {
            return Err(ForestError::LengthMismatch);
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != schema.len() {
                return Err(ForestError::RowWidth(i, row.len(), schema.len()));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(ForestError::NonFinite(i));
            }
        }
        let mut label_idx = Vec::with_capacity(labels.len());
        for label in &labels {
            if label.stage() != stage {
                return Err(ForestError::LabelStage(*label, stage));
            }
            label_idx.push(label.index());
        }
        Ok(Dataset { stage, schema, rows, labels, label_idx, ids })
    }

    pub fn from_feature_csv(parsed: ParsedFeatureCsv<R>) -> Result<Self, ForestError> {
        let labels = parsed.labels.ok_or(ForestError::MissingLabels)?;
        Dataset::new(parsed.stage, parsed.schema, parsed.rows, labels, parsed.ids)
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn schema(&self) -> &[String] {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.schema.len()
    }

    pub fn rows(&self) -> &[Vec<R>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[R] {
        &self.rows[i]
    }

    pub fn labels(&self) -> &[ClassLabel] {
        &self.labels
    }

    /// Per-row class index within the stage's canonical order.
    pub fn label_indices(&self) -> &[usize] {
        &self.label_idx
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Class counts in canonical order.
    pub fn class_counts(&self) -> [u64; 2] {
        let mut counts = [0u64; 2];
        for idx in &self.label_idx {
            counts[*idx] += 1;
        }
        counts
    }

    /// Subset of rows by index, preserving order.
    pub fn select(&self, indices: &[usize]) -> Dataset<R> {
        Dataset {
            stage: self.stage,
            schema: self.schema.clone(),
            rows: indices.iter().map(|i| self.rows[*i].clone()).collect(),
            labels: indices.iter().map(|i| self.labels[*i]).collect(),
            label_idx: indices.iter().map(|i| self.label_idx[*i]).collect(),
            ids: indices.iter().map(|i| self.ids[*i].clone()).collect(),
        }
    }
}
