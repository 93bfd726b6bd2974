use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::descriptive::quantile_sorted;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    /// Cases with `score >= threshold` are called positive.
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub auc: f64,
    pub n_positive: usize,
    pub n_negative: usize,
    /// From `(0, 0)` at `+inf` down to `(1, 1)` at the lowest score.
    pub points: Vec<RocPoint>,
}

pub(crate) fn check_scores(scores: &[f64], labels: &[bool]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: scores.len(),
            right: labels.len(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidArgument("scores contain NaN".into()));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    Ok((pos, neg))
}

/// Area under the ROC curve in its Mann–Whitney form: the fraction of
/// (positive, negative) pairs ranked correctly, ties counting one half.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<RocCurve> {
    let (n_pos, n_neg) = check_scores(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    // twice the Mann–Whitney U, kept integral
    let mut twice_u: u64 = 0;
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let (mut group_pos, mut group_neg) = (0u64, 0u64);
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] {
                group_pos += 1;
            } else {
                group_neg += 1;
            }
            i += 1;
        }
        // positives in this group beat every negative below it and tie with
        // the negatives inside it
        twice_u += group_pos * (2 * (n_neg as u64 - fp - group_neg) + group_neg);
        tp += group_pos;
        fp += group_neg;
        points.push(RocPoint {
            threshold: s,
            fpr: fp as f64 / n_neg as f64,
            tpr: tp as f64 / n_pos as f64,
        });
    }
    Ok(RocCurve {
        auc: twice_u as f64 / (2 * n_pos * n_neg) as f64,
        n_positive: n_pos,
        n_negative: n_neg,
        points,
    })
}

/// Trapezoidal area under a ROC point list.
pub fn trapezoid_auc(points: &[RocPoint]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCi {
    pub auc: f64,
    pub lo: f64,
    pub hi: f64,
    pub n_resamples: usize,
    /// Resamples drawn again because they held a single class.
    pub redrawn: usize,
    pub seed: u64,
}

/// Percentile bootstrap 95% interval of the AUC.
///
/// Positives and negatives are resampled separately with replacement, so
/// class sizes are preserved. Resample `i` draws from its own ChaCha stream
/// `i`, making the result independent of evaluation order.
pub fn bootstrap_auc_ci(scores: &[f64], labels: &[bool], n_resamples: usize, seed: u64) -> Result<BootstrapCi> {
    let point = roc_auc(scores, labels)?;
    if n_resamples == 0 {
        return Err(Error::InvalidArgument("n_resamples must be positive".into()));
    }
    let pos: Vec<f64> = scores.iter().zip(labels).filter(|(_, &l)| l).map(|(&s, _)| s).collect();
    let neg: Vec<f64> = scores.iter().zip(labels).filter(|(_, &l)| !l).map(|(&s, _)| s).collect();

    let mut aucs = Vec::with_capacity(n_resamples);
    let mut redrawn = 0;
    let mut buf_scores = Vec::with_capacity(scores.len());
    let mut buf_labels = Vec::with_capacity(scores.len());
    for i in 0..n_resamples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        loop {
            buf_scores.clear();
            buf_labels.clear();
            for _ in 0..pos.len() {
                buf_scores.push(pos[rng.gen_range(0..pos.len())]);
                buf_labels.push(true);
            }
            for _ in 0..neg.len() {
                buf_scores.push(neg[rng.gen_range(0..neg.len())]);
                buf_labels.push(false);
            }
            match roc_auc(&buf_scores, &buf_labels) {
                Ok(c) => {
                    aucs.push(c.auc);
                    break;
                }
                Err(Error::SingleClass) => redrawn += 1,
                Err(e) => return Err(e),
            }
        }
    }
    aucs.sort_by(f64::total_cmp);
    Ok(BootstrapCi {
        auc: point.auc,
        lo: quantile_sorted(&aucs, 0.025)?,
        hi: quantile_sorted(&aucs, 0.975)?,
        n_resamples,
        redrawn,
        seed,
    })
}
