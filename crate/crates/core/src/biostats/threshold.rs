use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rates derived from a 2×2 confusion table. `None` marks a rate whose
/// denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMetrics {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    pub sensitivity: f64,
    pub specificity: Option<f64>,
    pub precision: Option<f64>,
    pub false_omission_rate: Option<f64>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn confusion_metrics(tp: usize, fp: usize, fn_: usize, tn: usize) -> Result<ConfusionMetrics> {
    if tp + fn_ == 0 {
        return Err(Error::InvalidArgument(
            "sensitivity needs at least one positive case".into(),
        ));
    }
    Ok(ConfusionMetrics {
        tp,
        fp,
        fn_,
        tn,
        sensitivity: tp as f64 / (tp + fn_) as f64,
        specificity: ratio(tn, tn + fp),
        precision: ratio(tp, tp + fp),
        false_omission_rate: ratio(fn_, fn_ + tn),
    })
}

/// Confusion table for the rule `score >= threshold` ⇒ positive.
pub fn classify(scores: &[f64], labels: &[bool], threshold: f64) -> Result<ConfusionMetrics> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: scores.len(),
            right: labels.len(),
        });
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (&s, &l) in scores.iter().zip(labels) {
        match (s >= threshold, l) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    confusion_metrics(tp, fp, fn_, tn)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    /// The selected candidate on the scan grid.
    pub threshold: f64,
    /// Grid index `k` of the candidate `min + k * (max - min) / steps`.
    pub grid_index: usize,
    /// Lowest observed score at or above `threshold`: the same
    /// classification expressed as an observed value.
    pub effective_threshold: f64,
    pub target_sensitivity: f64,
    /// True when the candidate hits the target positive count exactly.
    pub exact: bool,
    pub metrics: ConfusionMetrics,
}

pub const THRESHOLD_STEPS: usize = 200;

/// Scans `steps + 1` evenly spaced candidates over the score range and
/// returns the highest one whose true-positive count equals the smallest
/// count reaching `target_sens`; failing an exact hit, the highest candidate
/// whose sensitivity is at least the target.
pub fn threshold_at_sensitivity(
    scores: &[f64],
    labels: &[bool],
    target_sens: f64,
    steps: usize,
) -> Result<ThresholdResult> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: scores.len(),
            right: labels.len(),
        });
    }
    if !(target_sens > 0.0 && target_sens <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "target sensitivity must lie in (0, 1], got {target_sens}"
        )));
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be positive".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    if n_pos == 0 {
        return Err(Error::InvalidArgument("no positive cases".into()));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidArgument("scores must be finite".into()));
    }

    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    let needed = (target_sens * n_pos as f64 - 1e-9).ceil().max(1.0) as usize;
    let candidate = |k: usize| min + range * (k as f64 / steps as f64);
    let tp_at = |t: f64| {
        scores
            .iter()
            .zip(labels)
            .filter(|(&s, &l)| l && s >= t)
            .count()
    };

    let mut exact: Option<usize> = None;
    let mut fallback: Option<usize> = None;
    for k in (0..=steps).rev() {
        let tp = tp_at(candidate(k));
        if exact.is_none() && tp == needed {
            exact = Some(k);
        }
        if fallback.is_none() && tp >= needed {
            fallback = Some(k);
        }
        if range == 0.0 {
            // every candidate coincides
            break;
        }
    }
    let (k, is_exact) = match (exact, fallback) {
        (Some(k), _) => (k, true),
        (None, Some(k)) => (k, false),
        (None, None) => {
            return Err(Error::InvalidArgument(format!(
                "no threshold reaches sensitivity {target_sens}"
            )))
        }
    };
    let threshold = candidate(k);
    let effective_threshold = scores
        .iter()
        .copied()
        .filter(|&s| s >= threshold)
        .fold(f64::INFINITY, f64::min);
    Ok(ThresholdResult {
        threshold,
        grid_index: k,
        effective_threshold,
        target_sensitivity: target_sens,
        exact: is_exact,
        metrics: classify(scores, labels, threshold)?,
    })
}
