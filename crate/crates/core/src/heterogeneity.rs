//! Between-ROI variability per case and its use as a prognostic test.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::biostats::roc::{roc_auc, RocCurve};
use crate::descriptive::{mean, sample_sd};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoiVariability {
    pub mean: f64,
    pub sd: f64,
    /// `sd / mean`; undefined when the mean is zero.
    pub cv: Option<f64>,
    pub n_rois: usize,
}

pub fn roi_variability(values: &[f64]) -> Result<RoiVariability> {
    let sd = sample_sd(values)?;
    let m = mean(values)?;
    Ok(RoiVariability {
        mean: m,
        sd,
        cv: (m != 0.0).then(|| sd / m),
        n_rois: values.len(),
    })
}

/// Number of ROIs with `value >= threshold`.
pub fn hotspot_count(values: &[f64], threshold: f64) -> Result<usize> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(values.iter().filter(|&&v| v >= threshold).count())
}

pub fn hotspot_fraction(values: &[f64], threshold: f64) -> Result<f64> {
    Ok(hotspot_count(values, threshold)? as f64 / values.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeterogeneityReport {
    pub case_id: String,
    pub param: String,
    pub roi_values: Vec<f64>,
    pub sd_across_rois: Option<f64>,
    pub cv: Option<f64>,
    pub hotspot_count: usize,
    pub hotspot_fraction: f64,
    pub n_rois: usize,
}

/// Variability summary of one case; SD and CV stay undefined for a single ROI.
pub fn heterogeneity_report(
    case_id: &str,
    param: &str,
    roi_values: &[f64],
    hotspot_threshold: f64,
) -> Result<HeterogeneityReport> {
    let count = hotspot_count(roi_values, hotspot_threshold)?;
    let var = match roi_variability(roi_values) {
        Ok(v) => Some(v),
        Err(Error::SdUndefined) => None,
        Err(e) => return Err(e),
    };
    Ok(HeterogeneityReport {
        case_id: case_id.to_string(),
        param: param.to_string(),
        roi_values: roi_values.to_vec(),
        sd_across_rois: var.map(|v| v.sd),
        cv: var.and_then(|v| v.cv),
        hotspot_count: count,
        hotspot_fraction: count as f64 / roi_values.len() as f64,
        n_rois: roi_values.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoiAggregation {
    #[default]
    Mean,
    Max,
}

impl FromStr for RoiAggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Self::Mean),
            "max" => Ok(Self::Max),
            other => Err(Error::InvalidArgument(format!(
                "unknown ROI aggregation {other:?}; expected mean or max"
            ))),
        }
    }
}

impl RoiAggregation {
    pub fn apply(self, values: &[f64]) -> Result<f64> {
        match self {
            Self::Mean => mean(values),
            Self::Max => values
                .iter()
                .copied()
                .reduce(f64::max)
                .ok_or(Error::EmptySample),
        }
    }
}

/// ROC of per-case scores built from the first `min(k, available)` ROIs in
/// stored order.
pub fn auc_vs_num_rois(
    roi_values: &[Vec<f64>],
    labels: &[bool],
    k: usize,
    aggregation: RoiAggregation,
) -> Result<RocCurve> {
    if k == 0 {
        return Err(Error::InvalidArgument("number of ROIs must be positive".into()));
    }
    if roi_values.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: roi_values.len(),
            right: labels.len(),
        });
    }
    let scores = roi_values
        .iter()
        .map(|v| aggregation.apply(&v[..k.min(v.len())]))
        .collect::<Result<Vec<f64>>>()?;
    roc_auc(&scores, labels)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HotspotCase {
    pub case_id: String,
    pub hotspots: usize,
    pub n_rois: usize,
    pub tumor_death: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeathBucket {
    /// Fraction label in the `hotspots/rois` form, ranges where members differ.
    pub label: String,
    pub fraction: f64,
    pub n_trm: usize,
    pub n_other: usize,
    pub death_probability: f64,
}

fn span(values: impl Iterator<Item = usize>) -> String {
    let v: Vec<usize> = values.collect();
    let (lo, hi) = (v.iter().min().unwrap(), v.iter().max().unwrap());
    if lo == hi {
        lo.to_string()
    } else {
        format!("{lo}-{hi}")
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Cases grouped by their reduced hotspot fraction, ascending; buckets with
/// no cases are absent.
pub fn death_probability_table(cases: &[HotspotCase]) -> Result<Vec<DeathBucket>> {
    let mut buckets: BTreeMap<(usize, usize), Vec<&HotspotCase>> = BTreeMap::new();
    for c in cases {
        if c.n_rois == 0 || c.hotspots > c.n_rois {
            return Err(Error::InvalidArgument(format!(
                "case {}: {} hotspots out of {} ROIs",
                c.case_id, c.hotspots, c.n_rois
            )));
        }
        let g = gcd(c.hotspots, c.n_rois);
        buckets.entry((c.hotspots / g, c.n_rois / g)).or_default().push(c);
    }
    let mut rows: Vec<DeathBucket> = buckets
        .into_values()
        .map(|members| {
            let n_trm = members.iter().filter(|c| c.tumor_death).count();
            let n_other = members.len() - n_trm;
            DeathBucket {
                label: format!(
                    "{}/{}",
                    span(members.iter().map(|c| c.hotspots)),
                    span(members.iter().map(|c| c.n_rois))
                ),
                fraction: members[0].hotspots as f64 / members[0].n_rois as f64,
                n_trm,
                n_other,
                death_probability: n_trm as f64 / members.len() as f64,
            }
        })
        .collect();
    rows.sort_by(|a, b| a.fraction.total_cmp(&b.fraction));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn variability_examples() {
        let v = roi_variability(&[8.0, 10.0, 12.0]).unwrap();
        assert_eq!((v.sd, v.cv), (2.0, Some(0.2)));
        assert_eq!(roi_variability(&[4.0; 3]).unwrap().cv, Some(0.0));
        assert_eq!(roi_variability(&[-1.0, 1.0]).unwrap().cv, None);
        assert!(roi_variability(&[3.0]).is_err());
    }

    #[test]
    fn hotspot_examples() {
        assert_eq!(hotspot_fraction(&[8.0, 9.0, 10.0, 9.5, 7.0], 9.0).unwrap(), 0.6);
        assert_eq!(hotspot_fraction(&[1.0, 2.0], 9.0).unwrap(), 0.0);
        assert_eq!(hotspot_fraction(&[9.0, 9.0], 9.0).unwrap(), 1.0);
        assert!(hotspot_fraction(&[], 9.0).is_err());
    }

    #[test]
    fn single_roi_report() {
        let r = heterogeneity_report("c", "area_sd", &[10.0], 9.0).unwrap();
        assert_eq!((r.sd_across_rois, r.hotspot_fraction), (None, 1.0));
    }

    #[test]
    fn more_rois_reveal_late_signal() {
        // only the third ROI separates the classes
        let mut rois = Vec::new();
        let mut labels = Vec::new();
        for i in 0..20 {
            let pos = i % 2 == 0;
            let noise = (i * 7 % 5) as f64;
            rois.push(vec![noise, 4.0 - noise, if pos { 20.0 } else { 0.0 }, 1.0]);
            labels.push(pos);
        }
        let one = auc_vs_num_rois(&rois, &labels, 1, RoiAggregation::Mean).unwrap().auc;
        let three = auc_vs_num_rois(&rois, &labels, 3, RoiAggregation::Mean).unwrap().auc;
        assert!(three > one, "{three} vs {one}");
        assert_eq!(three, 1.0);
        let all = auc_vs_num_rois(&rois, &labels, 99, RoiAggregation::Mean).unwrap().auc;
        let means: Vec<f64> = rois.iter().map(|r| mean(r).unwrap()).collect();
        assert_eq!(all, roc_auc(&means, &labels).unwrap().auc);
        let first: Vec<f64> = rois.iter().map(|r| r[0]).collect();
        assert_eq!(one, roc_auc(&first, &labels).unwrap().auc);
        assert_eq!(auc_vs_num_rois(&rois, &labels, 3, RoiAggregation::Max).unwrap().auc, 1.0);
    }

    /// Per-case encoding of the published bucket counts.
    pub(crate) fn table3_cases() -> Vec<HotspotCase> {
        let buckets: [(usize, usize, usize, usize); 7] =
            [(0, 5, 1, 47), (1, 5, 0, 18), (2, 5, 3, 6), (2, 4, 0, 1), (3, 5, 0, 6), (4, 5, 2, 3), (5, 5, 7, 2)];
        let mut cases = Vec::new();
        for (h, n, trm, other) in buckets {
            for j in 0..trm + other {
                // one 3-ROI and four 4-ROI cases spread through the zero bucket
                let rois = if h == 0 { [3, 4, 4, 4, 5][j.min(4)] } else { n };
                cases.push(HotspotCase {
                    case_id: format!("{h}-{n}-{j}"),
                    hotspots: h,
                    n_rois: if h == 2 && n == 4 { 4 } else { rois },
                    tumor_death: j < trm,
                });
            }
        }
        cases
    }

    #[test]
    fn table3_probabilities() {
        let rows = death_probability_table(&table3_cases()).unwrap();
        let labels: Vec<&str> = rows.iter().map(|r| r.label.as_str()).collect();
        assert_eq!(labels, ["0/3-5", "1/5", "2/5", "2/4", "3/5", "4/5", "5/5"]);
        let pct: Vec<i64> = rows.iter().map(|r| (r.death_probability * 100.0).round() as i64).collect();
        assert_eq!(pct, [2, 0, 33, 0, 0, 40, 78]);
        assert!((rows[6].death_probability - 7.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn table3_dichotomy() {
        use crate::biostats::threshold::classify;
        let cases = table3_cases();
        let scores: Vec<f64> = cases.iter().map(|c| c.hotspots as f64 / c.n_rois as f64).collect();
        let labels: Vec<bool> = cases.iter().map(|c| c.tumor_death).collect();
        let m = classify(&scores, &labels, 0.3).unwrap();
        assert_eq!((m.tp, m.fn_, m.tn, m.fp), (12, 1, 65, 18));
        assert_eq!(m.sensitivity, 12.0 / 13.0);
        assert_eq!(m.specificity, Some(65.0 / 83.0));
    }

    #[test]
    fn empty_buckets_are_omitted() {
        assert!(death_probability_table(&[]).unwrap().is_empty());
        let bad = HotspotCase { case_id: "x".into(), hotspots: 4, n_rois: 3, tumor_death: false };
        assert!(death_probability_table(&[bad]).is_err());
    }

    proptest! {
        #[test]
        fn hotspot_monotone(values in proptest::collection::vec(0.0f64..20.0, 1..8), t in 0.0f64..20.0, dt in 0.0f64..5.0) {
            prop_assert!(hotspot_fraction(&values, t + dt).unwrap() <= hotspot_fraction(&values, t).unwrap());
        }

        #[test]
        fn cv_scale_invariant(values in proptest::collection::vec(0.5f64..20.0, 2..8), c in 0.1f64..50.0) {
            let scaled: Vec<f64> = values.iter().map(|v| v * c).collect();
            let a = roi_variability(&values).unwrap().cv.unwrap();
            let b = roi_variability(&scaled).unwrap().cv.unwrap();
            prop_assert!((a - b).abs() < 1e-9 * (1.0 + a));
        }
    }
}
