//! From-scratch CART decision trees and bootstrap-aggregated random
//! forests, with stratified k-fold evaluation, ROC/AUC and Gini feature
//! importance.
//!
//! Training is deterministic: every tree derives its own seed from the
//! forest seed and its index, so results are identical whether trees are
//! trained sequentially or in parallel.

mod dataset;
mod eval;
mod model;
mod tree;

pub use dataset::{Dataset, ForestError};
pub use eval::{kfold_eval, metrics, roc_curve, EvalReport, RocPoint};
pub use model::{
    load_model, model_from_str, model_to_string, save_model, train_forest, ForestModel,
    ForestParams, ModelError, MODEL_FORMAT_VERSION,
};
pub use tree::{best_split, gini, train_tree, Split, TreeNode};
