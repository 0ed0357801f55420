//! Selection, prediction and estimation metrics.

use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{RemiError, Result};
use crate::model::{CoefficientPath, SparseVector};

pub const DEFAULT_FPR_MAX: f64 = 0.05;

/// Ranking of variables by when they enter a path.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableScores {
    /// Largest λ at which the variable is nonzero for the first time, 0 if never.
    pub entry_lambda: Vec<f64>,
    /// Ranking key: earlier entry ranks higher, ties broken by `|β_j|` at the
    /// last grid point. 0 for variables that never enter.
    pub score: Vec<f64>,
}

pub fn variable_scores(path: &CoefficientPath) -> VariableScores {
    let p = path.dim();
    let d = path.len();
    let mut entry: Vec<Option<usize>> = vec![None; p];
    for (l, coef) in path.coefs.iter().enumerate() {
        for (j, v) in coef.iter() {
            if v != 0.0 && entry[j].is_none() {
                entry[j] = Some(l);
            }
        }
    }
    let last = path.coefs.last();
    let mut entry_lambda = vec![0.0; p];
    let mut score = vec![0.0; p];
    for j in 0..p {
        if let Some(l) = entry[j] {
            entry_lambda[j] = path.lambdas[l];
            let mag = last.map_or(0.0, |c| c.get(j).abs());
            // (d - l) orders by entry; the fraction in [0, 1) breaks ties
            score[j] = (d - l) as f64 + mag / (1.0 + mag);
        }
    }
    VariableScores {
        entry_lambda,
        score,
    }
}

/// Area under the ROC curve for FPR in `[0, fpr_max]`, divided by `fpr_max`.
/// Tied scores form one diagonal step.
pub fn partial_auc(scores: &[f64], truth: &[bool], fpr_max: f64) -> Result<f64> {
    if scores.len() != truth.len() {
        return Err(RemiError::DimensionMismatch {
            expected: truth.len(),
            found: scores.len(),
        });
    }
    if !(fpr_max > 0.0 && fpr_max <= 1.0) {
        return Err(RemiError::InvalidArgument(format!(
            "fpr_max = {fpr_max} outside (0, 1]"
        )));
    }
    let pos = truth.iter().filter(|&&t| t).count();
    let neg = truth.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(RemiError::DegenerateLabels);
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(RemiError::InvalidArgument("scores contain NaN".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let (pos_f, neg_f) = (pos as f64, neg as f64);
    let mut area = 0.0;
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let (mut dtp, mut dfp) = (0usize, 0usize);
        while i < order.len() && scores[order[i]] == s {
            if truth[order[i]] {
                dtp += 1;
            } else {
                dfp += 1;
            }
            i += 1;
        }
        let (x0, y0) = (fp as f64 / neg_f, tp as f64 / pos_f);
        let (x1, y1) = ((fp + dfp) as f64 / neg_f, (tp + dtp) as f64 / pos_f);
        tp += dtp;
        fp += dfp;
        if x1 <= x0 {
            continue;
        }
        if x0 >= fpr_max {
            break;
        }
        let xe = x1.min(fpr_max);
        let ye = y0 + (y1 - y0) * (xe - x0) / (x1 - x0);
        area += (xe - x0) * (y0 + ye) / 2.0;
        if x1 >= fpr_max {
            break;
        }
    }
    Ok(area / fpr_max)
}

pub fn pearson(pred: ArrayView1<'_, f64>, obs: ArrayView1<'_, f64>) -> Result<f64> {
    if pred.len() != obs.len() {
        return Err(RemiError::DimensionMismatch {
            expected: obs.len(),
            found: pred.len(),
        });
    }
    if pred.len() < 2 {
        return Err(RemiError::InvalidArgument("pearson needs at least 2 points".into()));
    }
    let n = pred.len() as f64;
    let mp = pred.sum() / n;
    let mo = obs.sum() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in pred.iter().zip(obs.iter()) {
        let (da, db) = (a - mp, b - mo);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(RemiError::ConstantInput);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

pub fn predict(x: ArrayView2<'_, f64>, beta: &SparseVector) -> Result<Array1<f64>> {
    if x.ncols() != beta.dim {
        return Err(RemiError::DimensionMismatch {
            expected: beta.dim,
            found: x.ncols(),
        });
    }
    let mut out = Array1::zeros(x.nrows());
    for (j, b) in beta.iter() {
        out.scaled_add(b, &x.column(j));
    }
    Ok(out)
}

pub fn l2_error(estimate: &SparseVector, truth: &SparseVector) -> f64 {
    let diff = estimate.to_dense() - truth.to_dense();
    diff.dot(&diff).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub partial_auc: f64,
    pub pearson_r: f64,
    pub l2_error: f64,
    pub support_precision: f64,
    pub support_recall: f64,
}

/// Scores a fitted path against the truth, using the coefficients at
/// `chosen` for prediction, estimation and support recovery.
pub fn evaluate(
    path: &CoefficientPath,
    chosen: usize,
    beta_true: &SparseVector,
    x_test: ArrayView2<'_, f64>,
    y_test: ArrayView1<'_, f64>,
    fpr_max: f64,
) -> Result<EvalReport> {
    if chosen >= path.len() {
        return Err(RemiError::InvalidArgument(format!(
            "chosen index {chosen} outside a path of length {}",
            path.len()
        )));
    }
    if path.dim() != beta_true.dim {
        return Err(RemiError::DimensionMismatch {
            expected: beta_true.dim,
            found: path.dim(),
        });
    }
    let truth: Vec<bool> = (0..beta_true.dim).map(|j| beta_true.get(j) != 0.0).collect();
    let scores = variable_scores(path);
    let partial_auc = partial_auc(&scores.score, &truth, fpr_max)?;
    let beta = &path.coefs[chosen];
    let pred = predict(x_test, beta)?;
    // an empty model predicts a constant; count it as zero correlation
    let pearson_r = match pearson(pred.view(), y_test) {
        Ok(r) => r,
        Err(RemiError::ConstantInput) if beta.nnz() == 0 => 0.0,
        Err(e) => return Err(e),
    };
    let selected = beta.nnz();
    let hits = beta.iter().filter(|&(j, v)| v != 0.0 && truth[j]).count();
    let n_true = truth.iter().filter(|&&t| t).count();
    Ok(EvalReport {
        partial_auc,
        pearson_r,
        l2_error: l2_error(beta, beta_true),
        support_precision: if selected == 0 {
            0.0
        } else {
            hits as f64 / selected as f64
        },
        support_recall: hits as f64 / n_true as f64,
    })
}
