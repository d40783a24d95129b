//! Single CART tree: Gini impurity, exhaustive threshold search, recursive
//! growth.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

use super::dataset::{Dataset, ForestError};
use super::model::ForestParams;

/// A trained tree node. Internal nodes route `value <= threshold` left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeNode<R> {
    Leaf {
        /// Training-sample counts per class (bootstrap multiplicity kept).
        counts: [u64; 2],
    },
    Split {
        feature: usize,
        threshold: R,
        left: Box<TreeNode<R>>,
        right: Box<TreeNode<R>>,
    },
}

impl<R: Scalar> TreeNode<R> {
    /// Class index predicted for `row` (leaf majority, ties to class 0).
    pub fn predict_index(&self, row: &[R]) -> usize {
        match self {
            TreeNode::Leaf { counts } => usize::from(counts[1] > counts[0]),
            TreeNode::Split { feature, threshold, left, right } => {
                if row[*feature] <= *threshold {
                    left.predict_index(row)
                } else {
                    right.predict_index(row)
                }
            }
        }
    }

    pub fn max_feature_index(&self) -> Option<usize> {
        match self {
            TreeNode::Leaf { .. } => None,
            TreeNode::Split { feature, left, right, .. } => {
                let mut m = *feature;
                if let Some(l) = left.max_feature_index() {
                    m = m.max(l);
                }
                if let Some(r) = right.max_feature_index() {
                    m = m.max(r);
                }
                Some(m)
            }
        }
    }
}

/// Gini impurity `1 - sum(p_c^2)` of a class-count vector.
pub fn gini<R: Scalar>(counts: &[u64]) -> Result<R, ForestError> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(ForestError::EmptyNode);
    }
    let n = R::from_u64(total).expect("count fits scalar");
    let mut sum_sq = R::zero();
    for c in counts {
        let p = R::from_u64(*c).expect("count fits scalar") / n;
        sum_sq = sum_sq + p * p;
    }
    Ok(R::one() - sum_sq)
}

fn gini2<R: Scalar>(counts: [u64; 2]) -> R {
    gini(&counts).expect("non-empty node")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split<R> {
    pub feature: usize,
    pub threshold: R,
    pub decrease: R,
}

/// Best split over the given feature subset by weighted impurity decrease.
///
/// Candidate thresholds are midpoints between consecutive distinct sorted
/// values. Ties go to the lower feature index, then the lower threshold.
/// Returns `None` when no candidate strictly decreases impurity.
pub fn best_split<R: Scalar>(
    rows: &[Vec<R>],
    labels: &[usize],
    features: &[usize],
) -> Option<Split<R>> {
    let idxs: Vec<usize> = (0..rows.len()).collect();
    best_split_indexed(rows, labels, &idxs, features, 1)
}

pub(super) fn best_split_indexed<R: Scalar>(
    rows: &[Vec<R>],
    labels: &[usize],
    idxs: &[usize],
    features: &[usize],
    min_leaf: usize,
) -> Option<Split<R>> {
    let n = idxs.len();
    if n < 2 {
        return None;
    }
    let mut parent = [0u64; 2];
    for &i in idxs {
        parent[labels[i]] += 1;
    }
    let parent_gini: R = gini2(parent);
    let n_r = R::from_usize_(n);

    let mut best: Option<Split<R>> = None;
    let mut ordered: Vec<(R, usize)> = Vec::with_capacity(n);
    for &f in features {
        ordered.clear();
        ordered.extend(idxs.iter().map(|&i| (rows[i][f], labels[i])));
        ordered.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite feature values"));

        let mut left = [0u64; 2];
        let mut right = parent;
        for k in 0..n - 1 {
            let (value, label) = ordered[k];
            left[label] += 1;
            right[label] -= 1;
            let next = ordered[k + 1].0;
            if value == next {
                continue;
            }
            let nl = k + 1;
            let nr = n - nl;
            if nl < min_leaf || nr < min_leaf {
                continue;
            }
            let mut threshold = (value + next) / R::from_usize_(2);
            // guard against the midpoint rounding up onto the right value
            if !(threshold < next) {
                threshold = value;
            }
            let weighted = (R::from_usize_(nl) * gini2(left) + R::from_usize_(nr) * gini2(right)) / n_r;
            let decrease = parent_gini - weighted;
            let better = match &best {
                Some(b) => decrease > b.decrease,
                None => decrease > R::zero(),
            };
            if better {
                best = Some(Split { feature: f, threshold, decrease });
            }
        }
    }
    best.filter(|b| b.decrease > R::zero())
}

fn sample_features<RNG: Rng>(rng: &mut RNG, d: usize, mtry: usize) -> Vec<usize> {
    let take = mtry.clamp(1, d);
    let mut pool: Vec<usize> = (0..d).collect();
    for i in 0..take {
        let j = rng.gen_range(i..d);
        pool.swap(i, j);
    }
    let mut chosen = pool[..take].to_vec();
    chosen.sort_unstable();
    chosen
}

pub(super) struct GrowContext<'a, R> {
    pub rows: &'a [Vec<R>],
    pub labels: &'a [usize],
    pub max_depth: Option<u32>,
    pub min_leaf: usize,
    pub mtry: usize,
    pub n_features: usize,
    pub n_root: usize,
    /// Per-feature accumulated weighted impurity decrease.
    pub importance: Vec<R>,
}

pub(super) fn grow<R: Scalar, RNG: Rng>(
    ctx: &mut GrowContext<'_, R>,
    idxs: &[usize],
    depth: u32,
    rng: &mut RNG,
) -> TreeNode<R> {
    let mut counts = [0u64; 2];
    for &i in idxs {
        counts[ctx.labels[i]] += 1;
    }
    let leaf = TreeNode::Leaf { counts };
    let pure = counts[0] == 0 || counts[1] == 0;
    let depth_capped = ctx.max_depth.is_some_and(|d| depth >= d);
    if idxs.len() < 2 || idxs.len() < 2 * ctx.min_leaf || pure || depth_capped {
        return leaf;
    }
    let features = sample_features(rng, ctx.n_features, ctx.mtry);
    let split = match best_split_indexed(ctx.rows, ctx.labels, idxs, &features, ctx.min_leaf) {
        Some(s) => s,
        None => return leaf,
    };
    let weight = R::from_usize_(idxs.len()) / R::from_usize_(ctx.n_root);
    ctx.importance[split.feature] = ctx.importance[split.feature] + weight * split.decrease;

    let (mut left_idx, mut right_idx) = (Vec::new(), Vec::new());
    for &i in idxs {
        if ctx.rows[i][split.feature] <= split.threshold {
            left_idx.push(i);
        } else {
            right_idx.push(i);
        }
    }
    debug_assert!(!left_idx.is_empty() && !right_idx.is_empty());
    let left = grow(ctx, &left_idx, depth + 1, rng);
    let right = grow(ctx, &right_idx, depth + 1, rng);
    TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(left),
        right: Box::new(right),
    }
}

/// Train a single CART tree on all rows of `data`.
///
/// Feature subsets of size `mtry` are drawn from `rng` at every node; with
/// `mtry >= n_features` this is a plain deterministic decision tree.
pub fn train_tree<R: Scalar, RNG: Rng>(
    data: &Dataset<R>,
    params: &ForestParams,
    rng: &mut RNG,
) -> TreeNode<R> {
    let mut ctx = GrowContext {
        rows: data.rows(),
        labels: data.label_indices(),
        max_depth: params.max_depth,
        min_leaf: params.min_leaf.max(1),
        mtry: params.resolved_mtry(data.n_features()),
        n_features: data.n_features(),
        n_root: data.n_rows(),
        importance: vec![R::zero(); data.n_features()],
    };
    let idxs: Vec<usize> = (0..data.n_rows()).collect();
    grow(&mut ctx, &idxs, 0, rng)
}
