use super::{DesignMatrix, FitError, RegressionModel};

/// `1 − (L0 / LM)^(2/n)`.
pub fn cox_snell_r2(model: &RegressionModel) -> f64 {
    let n = model.n as f64;
    let r2 = 1.0 - (2.0 * (model.log_lik_null - model.log_lik_fit) / n).exp();
    r2.max(0.0)
}

/// `1 − L0^(2/n)`, the largest value Cox & Snell can reach on this sample.
/// For a binary response with event rate `p` this is `1 − [p^p (1−p)^(1−p)]²`.
pub fn cox_snell_upper_bound(model: &RegressionModel) -> f64 {
    let n = model.n as f64;
    1.0 - (2.0 * model.log_lik_null / n).exp()
}

/// Cox & Snell rescaled by its upper bound; 0 when the bound is 0.
pub fn nagelkerke_r2(model: &RegressionModel) -> f64 {
    let bound = cox_snell_upper_bound(model);
    if bound <= 0.0 {
        0.0
    } else {
        cox_snell_r2(model) / bound
    }
}

/// `1 − ln LM / ln L0`.
pub fn mcfadden_r2(model: &RegressionModel) -> Result<f64, FitError> {
    if model.log_lik_null == 0.0 {
        return Err(FitError::Undefined("McFadden R²"));
    }
    Ok(1.0 - model.log_lik_fit / model.log_lik_null)
}

/// Percentage of rows classified correctly. Binary models predict the
/// positive class when its fitted probability is at least `cut`; multinomial
/// models predict the most probable category.
pub fn classification_rate(model: &RegressionModel, design: &DesignMatrix, cut: f64) -> f64 {
    let probs = model.predict(design);
    let correct = probs
        .iter()
        .zip(design.response())
        .filter(|(p, &y)| {
            let predicted = if model.is_multinomial() {
                p.iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (c, &v)| if v > best.1 { (c, v) } else { best })
                    .0
            } else {
                usize::from(p[1] >= cut)
            };
            predicted == y
        })
        .count();
    100.0 * correct as f64 / design.n() as f64
}

/// Area under the ROC curve: the share of (positive, negative) pairs in
/// which the positive scores higher, ties counting one half.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64, FitError> {
    if scores.len() != labels.len() {
        return Err(FitError::Design(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let n_pos = labels.iter().filter(|&&l| l).count() as u64;
    let n_neg = labels.len() as u64 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(FitError::Undefined("ROC area"));
    }
    // twice the Mann-Whitney U statistic, accumulated over blocks of tied scores
    let mut twice_u: u64 = 0;
    let mut neg_below: u64 = 0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        let (mut pos, mut neg) = (0u64, 0u64);
        while j < idx.len() && scores[idx[j]] == scores[idx[i]] {
            if labels[idx[j]] {
                pos += 1;
            } else {
                neg += 1;
            }
            j += 1;
        }
        twice_u += 2 * pos * neg_below + pos * neg;
        neg_below += neg;
        i = j;
    }
    Ok(twice_u as f64 / (2 * n_pos * n_neg) as f64)
}

/// ROC curve as (false positive rate, true positive rate) points from (0,0) to (1,1).
pub fn roc_curve(scores: &[f64], labels: &[bool]) -> Result<Vec<(f64, f64)>, FitError> {
    let n_pos = labels.iter().filter(|&&l| l).count() as f64;
    let n_neg = labels.len() as f64 - n_pos;
    if n_pos == 0.0 || n_neg == 0.0 {
        return Err(FitError::Undefined("ROC curve"));
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0.0, 0.0);
    let mut i = 0;
    while i < idx.len() {
        let threshold = scores[idx[i]];
        while i < idx.len() && scores[idx[i]] == threshold {
            if labels[idx[i]] {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
            i += 1;
        }
        points.push((fp / n_neg, tp / n_pos));
    }
    Ok(points)
}
