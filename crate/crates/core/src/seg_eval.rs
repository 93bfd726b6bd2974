//! Pixel- and object-level agreement between a predicted and a reference
//! segmentation.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PixelGrid;

fn check_dims(a: &PixelGrid, b: &PixelGrid) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch {
            left: a.dims(),
            right: b.dims(),
        });
    }
    Ok(())
}

/// Foreground overlap counts of two masks (nonzero = foreground).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapCounts {
    pub intersection: usize,
    pub size_a: usize,
    pub size_b: usize,
}

impl OverlapCounts {
    pub fn dice(&self) -> f64 {
        let denom = self.size_a + self.size_b;
        if denom == 0 {
            1.0
        } else {
            2.0 * self.intersection as f64 / denom as f64
        }
    }
}

pub fn overlap_counts(a: &PixelGrid, b: &PixelGrid) -> Result<OverlapCounts> {
    check_dims(a, b)?;
    let mut c = OverlapCounts {
        intersection: 0,
        size_a: 0,
        size_b: 0,
    };
    for (&x, &y) in a.labels().iter().zip(b.labels()) {
        let (fa, fb) = (x != 0, y != 0);
        c.size_a += usize::from(fa);
        c.size_b += usize::from(fb);
        c.intersection += usize::from(fa && fb);
    }
    Ok(c)
}

/// Dice coefficient `2|A∩B| / (|A| + |B|)`; two empty masks score 1.
pub fn dice(a: &PixelGrid, b: &PixelGrid) -> Result<f64> {
    overlap_counts(a, b).map(|c| c.dice())
}

/// Mean of per-image Dice scores.
pub fn dice_macro(per_image: &[OverlapCounts]) -> Result<f64> {
    if per_image.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(per_image.iter().map(OverlapCounts::dice).sum::<f64>() / per_image.len() as f64)
}

/// Dice of the pooled pixel counts across images.
pub fn dice_micro(per_image: &[OverlapCounts]) -> Result<f64> {
    if per_image.is_empty() {
        return Err(Error::EmptySample);
    }
    let total = per_image.iter().fold(
        OverlapCounts {
            intersection: 0,
            size_a: 0,
            size_b: 0,
        },
        |acc, c| OverlapCounts {
            intersection: acc.intersection + c.intersection,
            size_a: acc.size_a + c.size_a,
            size_b: acc.size_b + c.size_b,
        },
    );
    Ok(total.dice())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub pred_id: u32,
    pub gt_id: u32,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when there are no predicted objects; precision is then reported as 0.
    pub no_prediction: bool,
    /// Set when there are no reference objects; recall is then reported as 0.
    pub no_ground_truth: bool,
    pub pairs: Vec<MatchedPair>,
}

impl MatchReport {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize, pairs: Vec<MatchedPair>) -> Self {
        let no_prediction = tp + fp == 0;
        let no_ground_truth = tp + fn_ == 0;
        let (precision, recall, f1) = if no_prediction && no_ground_truth {
            (1.0, 1.0, 1.0)
        } else {
            let p = if no_prediction { 0.0 } else { tp as f64 / (tp + fp) as f64 };
            let r = if no_ground_truth { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
            let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
            (p, r, f)
        };
        Self {
            tp,
            fp,
            fn_,
            precision,
            recall,
            f1,
            no_prediction,
            no_ground_truth,
            pairs,
        }
    }
}

/// Greedy one-to-one object matching by descending IoU.
///
/// Only pairs with `IoU >= iou_min` are candidates; ties are broken by the
/// smaller prediction id, then the smaller reference id. Both grids are
/// label rasters of the same frame.
pub fn match_objects(pred: &PixelGrid, gt: &PixelGrid, iou_min: f64) -> Result<MatchReport> {
    check_dims(pred, gt)?;
    if !(iou_min > 0.0 && iou_min <= 1.0) {
        return Err(Error::InvalidArgument(format!("iou_min must lie in (0, 1], got {iou_min}")));
    }
    let mut pred_sizes: HashMap<u32, usize> = HashMap::new();
    let mut gt_sizes: HashMap<u32, usize> = HashMap::new();
    let mut inter: HashMap<(u32, u32), usize> = HashMap::new();
    for (&p, &g) in pred.labels().iter().zip(gt.labels()) {
        if p != 0 {
            *pred_sizes.entry(p).or_default() += 1;
        }
        if g != 0 {
            *gt_sizes.entry(g).or_default() += 1;
        }
        if p != 0 && g != 0 {
            *inter.entry((p, g)).or_default() += 1;
        }
    }

    let mut candidates: Vec<MatchedPair> = inter
        .into_iter()
        .map(|((p, g), i)| {
            let union = pred_sizes[&p] + gt_sizes[&g] - i;
            MatchedPair {
                pred_id: p,
                gt_id: g,
                iou: i as f64 / union as f64,
            }
        })
        .filter(|m| m.iou >= iou_min)
        .collect();
    candidates.sort_by(|a, b| {
        b.iou
            .total_cmp(&a.iou)
            .then(a.pred_id.cmp(&b.pred_id))
            .then(a.gt_id.cmp(&b.gt_id))
    });

    let mut used_pred = std::collections::HashSet::new();
    let mut used_gt = std::collections::HashSet::new();
    let mut pairs = Vec::new();
    for c in candidates {
        if used_pred.contains(&c.pred_id) || used_gt.contains(&c.gt_id) {
            continue;
        }
        used_pred.insert(c.pred_id);
        used_gt.insert(c.gt_id);
        pairs.push(c);
    }
    let tp = pairs.len();
    Ok(MatchReport::from_counts(
        tp,
        pred_sizes.len() - tp,
        gt_sizes.len() - tp,
        pairs,
    ))
}

pub fn rmse(pred: &[f64], reference: &[f64]) -> Result<f64> {
    if pred.len() != reference.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: reference.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::EmptySample);
    }
    let mse = pred
        .iter()
        .zip(reference)
        .map(|(p, r)| (p - r) * (p - r))
        .sum::<f64>()
        / pred.len() as f64;
    Ok(mse.sqrt())
}
