//! Classification metrics, ROC/AUC and stratified k-fold cross-validation.
//!
//! The positive class is index 0 of the stage's canonical order (hosting,
//! dedicated). Metrics are percentages; absent denominators yield `None`
//! rather than a silent 0/0.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;
use crate::seed;

use super::dataset::{Dataset, ForestError};
use super::model::{train_forest, ForestParams};

/// One operating point of the ROC sweep. `threshold` is the minimum
/// positive-class score classified positive at this point; the leading
/// (0, 0) point carries an infinite threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint<R> {
    pub fpr: R,
    pub tpr: R,
    pub threshold: R,
}

/// Evaluation summary. `confusion[actual][predicted]` with the positive
/// class at index 0; precision/recall/fpr are percentages.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport<R> {
    pub confusion: [[u64; 2]; 2],
    pub precision: Option<R>,
    pub recall: Option<R>,
    pub fpr: Option<R>,
    pub auc: R,
    /// ROC points ordered by descending threshold. Written to CSV by the
    /// CLI; skipped in JSON reports (infinite threshold has no JSON form).
    #[serde(skip)]
    pub roc: Vec<RocPoint<R>>,
}

/// precision = TP/(TP+FP), recall = TP/(TP+FN), fpr = FP/(FP+TN), as
/// percentages; `None` where the denominator is zero.
pub fn metrics<R: Scalar>(confusion: [[u64; 2]; 2]) -> (Option<R>, Option<R>, Option<R>) {
    let tp = confusion[0][0];
    let fn_ = confusion[0][1];
    let fp = confusion[1][0];
    let tn = confusion[1][1];
    let pct = |num: u64, den: u64| {
        if den == 0 {
            None
        } else {
            Some(
                R::from_u64(num).expect("count fits scalar") / R::from_u64(den).expect("count")
                    * R::from_usize_(100),
            )
        }
    };
    (pct(tp, tp + fp), pct(tp, tp + fn_), pct(fp, fp + tn))
}

/// ROC curve over all distinct score thresholds, plus trapezoid AUC.
///
/// `scores` pairs a positive-class score with whether the row is actually
/// positive. Requires at least one row of each class.
pub fn roc_curve<R: Scalar>(scores: &[(R, bool)]) -> Result<(Vec<RocPoint<R>>, R), ForestError> {
    let pos = scores.iter().filter(|(_, y)| *y).count();
    let neg = scores.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(ForestError::OneClassScores);
    }
    let mut sorted: Vec<(R, bool)> = scores.to_vec();
    sorted.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite scores"));

    let p = R::from_usize_(pos);
    let n = R::from_usize_(neg);
    let mut points = vec![RocPoint { fpr: R::zero(), tpr: R::zero(), threshold: R::infinity() }];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut i = 0usize;
    while i < sorted.len() {
        let threshold = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == threshold {
            if sorted[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            fpr: R::from_usize_(fp) / n,
            tpr: R::from_usize_(tp) / p,
            threshold,
        });
    }
    let mut auc = R::zero();
    let two = R::from_usize_(2);
    for pair in points.windows(2) {
        auc = auc + (pair[1].fpr - pair[0].fpr) * (pair[1].tpr + pair[0].tpr) / two;
    }
    Ok((points, auc))
}

fn report_from<R: Scalar>(
    confusion: [[u64; 2]; 2],
    scores: &[(R, bool)],
) -> Result<EvalReport<R>, ForestError> {
    let (precision, recall, fpr) = metrics(confusion);
    let (roc, auc) = roc_curve(scores)?;
    Ok(EvalReport { confusion, precision, recall, fpr, auc, roc })
}

/// Stratified k-fold cross-validation of a forest.
///
/// Returns the pooled report over all held-out predictions plus one report
/// per fold. Fold assignment shuffles within each class with a seed derived
/// from `base_seed`; fold f's forest trains with its own derived seed.
pub fn kfold_eval<R: Scalar>(
    data: &Dataset<R>,
    k: usize,
    params: &ForestParams,
    base_seed: u64,
) -> Result<(EvalReport<R>, Vec<EvalReport<R>>), ForestError> {
    if k < 2 {
        return Err(ForestError::BadK(k));
    }
    let counts = data.class_counts();
    for (class_idx, count) in counts.iter().enumerate() {
        if (*count as usize) < k {
            return Err(ForestError::ClassTooSmall(
                data.stage().classes()[class_idx],
                *count as usize,
                k,
            ));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(base_seed, "kfold"));
    let mut fold_of = vec![0usize; data.n_rows()];
    for class_idx in 0..2 {
        let mut members: Vec<usize> = (0..data.n_rows())
            .filter(|i| data.label_indices()[*i] == class_idx)
            .collect();
        members.shuffle(&mut rng);
        for (j, row) in members.into_iter().enumerate() {
            fold_of[row] = j % k;
        }
    }

    let mut pooled_confusion = [[0u64; 2]; 2];
    let mut pooled_scores: Vec<(usize, R, bool)> = Vec::with_capacity(data.n_rows());
    let mut fold_reports = Vec::with_capacity(k);
    for fold in 0..k {
        let train_idx: Vec<usize> = (0..data.n_rows()).filter(|i| fold_of[*i] != fold).collect();
        let test_idx: Vec<usize> = (0..data.n_rows()).filter(|i| fold_of[*i] == fold).collect();
        let train = data.select(&train_idx);
        let fold_params = ForestParams { seed: seed::derive_indexed(base_seed, fold as u64), ..params.clone() };
        let model = train_forest(&train, &fold_params)?;

        let mut confusion = [[0u64; 2]; 2];
        let mut scores = Vec::with_capacity(test_idx.len());
        for &row in &test_idx {
            let proba = model
                .predict_proba(data.row(row))
                .expect("schema matches training data");
            let actual = data.label_indices()[row];
            let predicted = usize::from(proba[1] > proba[0]);
            confusion[actual][predicted] += 1;
            let is_positive = actual == 0;
            scores.push((proba[0], is_positive));
            pooled_scores.push((row, proba[0], is_positive));
        }
        for a in 0..2 {
            for p in 0..2 {
                pooled_confusion[a][p] += confusion[a][p];
            }
        }
        fold_reports.push(report_from(confusion, &scores)?);
    }
    pooled_scores.sort_by_key(|(row, _, _)| *row);
    let pooled: Vec<(R, bool)> = pooled_scores.into_iter().map(|(_, s, y)| (s, y)).collect();
    Ok((report_from(pooled_confusion, &pooled)?, fold_reports))
}
