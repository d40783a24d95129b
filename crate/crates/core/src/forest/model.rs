//! Bootstrap-aggregated forest: training, prediction, serialization.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datamodel::{ClassLabel, Stage};
use crate::scalar::Scalar;
use crate::seed;

use super::dataset::{Dataset, ForestError};
use super::tree::{grow, GrowContext, TreeNode};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Forest hyperparameters. Defaults are the standard bagging choices:
/// 100 trees, mtry = floor(sqrt(d)), unbounded depth, leaves down to one
/// sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features tried per split; `None` means floor(sqrt(n_features)).
    pub mtry: Option<usize>,
    /// `None` means unbounded.
    pub max_depth: Option<u32>,
    pub min_leaf: usize,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams { n_trees: 100, mtry: None, max_depth: None, min_leaf: 1, seed: 0 }
    }
}

impl ForestParams {
    pub fn resolved_mtry(&self, n_features: usize) -> usize {
        match self.mtry {
            Some(m) => m.clamp(1, n_features),
            None => ((n_features as f64).sqrt().floor() as usize).clamp(1, n_features),
        }
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported model format version {found} (this build reads version {supported})")]
    Version { found: u64, supported: u32 },
    #[error("corrupt model file: {0}")]
    Corrupt(String),
    #[error("schema mismatch: {0}")]
    Schema(String),
}

/// A trained random forest for one classification stage.
#[derive(Debug, Clone)]
pub struct ForestModel<R> {
    pub stage: Stage,
    pub schema: Vec<String>,
    pub params: ForestParams,
    pub trees: Vec<TreeNode<R>>,
    /// Normalized Gini importances, one per schema column.
    pub importances: Vec<R>,
    pub oob_error: Option<R>,
    /// Fraction of training rows with at least one out-of-bag vote.
    /// Training metadata only; not serialized.
    pub oob_coverage: Option<R>,
}

impl<R: Scalar> ForestModel<R> {
    pub fn classes(&self) -> [ClassLabel; 2] {
        self.stage.classes()
    }

    /// Per-class probabilities as the fraction of trees voting each class.
    /// Index 0 follows the stage's canonical class order.
    pub fn predict_proba(&self, row: &[R]) -> Result<[R; 2], ModelError> {
        if row.len() != self.schema.len() {
            return Err(ModelError::Schema(format!(
                "row width {} does not match schema width {}",
                row.len(),
                self.schema.len()
            )));
        }
        let mut votes0 = 0usize;
        for tree in &self.trees {
            if tree.predict_index(row) == 0 {
                votes0 += 1;
            }
        }
        let p0 = R::from_usize_(votes0) / R::from_usize_(self.trees.len());
        Ok([p0, R::one() - p0])
    }

    /// Majority label; ties go to the lexicographically first class.
    pub fn predict(&self, row: &[R]) -> Result<ClassLabel, ModelError> {
        let proba = self.predict_proba(row)?;
        let idx = usize::from(proba[1] > proba[0]);
        Ok(self.classes()[idx])
    }
}

/// Train a forest of `params.n_trees` CART trees, each on a bootstrap
/// sample of `data`, with out-of-bag error and normalized importances.
///
/// Tree i derives its own seed from `(params.seed, i)`, so parallel and
/// sequential training produce identical models.
pub fn train_forest<R: Scalar>(
    data: &Dataset<R>,
    params: &ForestParams,
) -> Result<ForestModel<R>, ForestError> {
    let n = data.n_rows();
    if n < 2 {
        return Err(ForestError::TooFewRows(2, n));
    }
    let counts = data.class_counts();
    if counts[0] == 0 {
        return Err(ForestError::SingleClass(data.stage().classes()[1]));
    }
    if counts[1] == 0 {
        return Err(ForestError::SingleClass(data.stage().classes()[0]));
    }
    let n_trees = params.n_trees.max(1);
    let mtry = params.resolved_mtry(data.n_features());

    struct TreeOut<R> {
        tree: TreeNode<R>,
        importance: Vec<R>,
        in_bag: Vec<bool>,
    }

    let outputs: Vec<TreeOut<R>> = (0..n_trees)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed::derive_indexed(params.seed, i as u64));
            let mut in_bag = vec![false; n];
            let sample: Vec<usize> = (0..n)
                .map(|_| {
                    let j = rng.gen_range(0..n);
                    in_bag[j] = true;
                    j
                })
                .collect();
            let mut ctx = GrowContext {
                rows: data.rows(),
                labels: data.label_indices(),
                max_depth: params.max_depth,
                min_leaf: params.min_leaf.max(1),
                mtry,
                n_features: data.n_features(),
                n_root: sample.len(),
                importance: vec![R::zero(); data.n_features()],
            };
            let tree = grow(&mut ctx, &sample, 0, &mut rng);
            TreeOut { tree, importance: ctx.importance, in_bag }
        })
        .collect();

    // aggregate in tree order so float sums do not depend on thread count
    let mut importances = vec![R::zero(); data.n_features()];
    let mut oob_votes0 = vec![0u64; n];
    let mut oob_total = vec![0u64; n];
    let mut trees = Vec::with_capacity(n_trees);
    for out in outputs {
        for (acc, v) in importances.iter_mut().zip(&out.importance) {
            *acc = *acc + *v;
        }
        for (row_idx, bagged) in out.in_bag.iter().enumerate() {
            if !bagged {
                oob_total[row_idx] += 1;
                if out.tree.predict_index(data.row(row_idx)) == 0 {
                    oob_votes0[row_idx] += 1;
                }
            }
        }
        trees.push(out.tree);
    }

    let total: R = importances.iter().copied().sum();
    if total > R::zero() {
        for v in importances.iter_mut() {
            *v = *v / total;
        }
    }

    let mut covered = 0usize;
    let mut wrong = 0usize;
    for (row_idx, &votes) in oob_total.iter().enumerate() {
        if votes == 0 {
            continue;
        }
        covered += 1;
        let pred = usize::from(oob_votes0[row_idx] * 2 < votes);
        if pred != data.label_indices()[row_idx] {
            wrong += 1;
        }
    }
    let (oob_error, oob_coverage) = if covered > 0 {
        (
            Some(R::from_usize_(wrong) / R::from_usize_(covered)),
            Some(R::from_usize_(covered) / R::from_usize_(n)),
        )
    } else {
        (None, None)
    };

    Ok(ForestModel {
        stage: data.stage(),
        schema: data.schema().to_vec(),
        params: params.clone(),
        trees,
        importances,
        oob_error,
        oob_coverage,
    })
}

#[derive(Serialize, Deserialize)]
struct ModelFile<R> {
    format_version: u32,
    stage: Stage,
    schema: Vec<String>,
    params: ForestParams,
    trees: Vec<TreeNode<R>>,
    importances: Vec<R>,
    oob_error: Option<R>,
}

pub fn model_to_string<R: Scalar>(model: &ForestModel<R>) -> String {
    let file = ModelFile {
        format_version: MODEL_FORMAT_VERSION,
        stage: model.stage,
        schema: model.schema.clone(),
        params: model.params.clone(),
        trees: model.trees.clone(),
        importances: model.importances.clone(),
        oob_error: model.oob_error,
    };
    let mut text = serde_json::to_string_pretty(&file).expect("model serializes");
    text.push('\n');
    text
}

pub fn save_model<R: Scalar>(model: &ForestModel<R>, path: &Path) -> Result<(), ModelError> {
    std::fs::write(path, model_to_string(model))
        .map_err(|source| ModelError::Io { path: path.display().to_string(), source })
}

pub fn model_from_str<R: Scalar>(text: &str) -> Result<ForestModel<R>, ModelError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| ModelError::Corrupt(e.to_string()))?;
    let found = value
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| ModelError::Corrupt("missing format_version".to_string()))?;
    if found != u64::from(MODEL_FORMAT_VERSION) {
        return Err(ModelError::Version { found, supported: MODEL_FORMAT_VERSION });
    }
    let file: ModelFile<R> =
        serde_json::from_value(value).map_err(|e| ModelError::Corrupt(e.to_string()))?;
    if file.schema.is_empty() {
        return Err(ModelError::Schema("empty schema".to_string()));
    }
    if file.importances.len() != file.schema.len() {
        return Err(ModelError::Schema(format!(
            "{} importances for {} schema columns",
            file.importances.len(),
            file.schema.len()
        )));
    }
    for tree in &file.trees {
        if let Some(max) = tree.max_feature_index() {
            if max >= file.schema.len() {
                return Err(ModelError::Schema(format!(
                    "tree references feature {max}, schema has {} columns",
                    file.schema.len()
                )));
            }
        }
    }
    if file.trees.is_empty() {
        return Err(ModelError::Corrupt("model has no trees".to_string()));
    }
    Ok(ForestModel {
        stage: file.stage,
        schema: file.schema,
        params: file.params,
        trees: file.trees,
        importances: file.importances,
        oob_error: file.oob_error,
        oob_coverage: None,
    })
}

pub fn load_model<R: Scalar>(path: &Path) -> Result<ForestModel<R>, ModelError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ModelError::Io { path: path.display().to_string(), source })?;
    model_from_str(&text)
}
