//! Per-ROI morphometric parameters and their per-case aggregation.

use serde::{Deserialize, Serialize};

use crate::descriptive::{self, mean, quantile_sorted, sample_sd, skewness, sorted};
use crate::error::{Error, Result};
use crate::geometry::{label_components, region_properties, NucleusRegion, PixelGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    /// Regions with a smaller area are dropped; equality is kept.
    pub min_area_um2: f64,
    pub large_thresholds_um2: Vec<f64>,
    pub indent_thresholds: Vec<f64>,
    pub exclude_border_touching: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            min_area_um2: 7.0,
            large_thresholds_um2: vec![37.8, 50.3],
            indent_thresholds: vec![0.913, 0.936, 0.943],
            exclude_border_touching: false,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_area_um2.is_finite() && self.min_area_um2 >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "min_area_um2 must be >= 0, got {}",
                self.min_area_um2
            )));
        }
        if let Some(t) = self
            .large_thresholds_um2
            .iter()
            .find(|t| !(t.is_finite() && **t > 0.0))
        {
            return Err(Error::InvalidArgument(format!(
                "large-nucleus thresholds must be > 0, got {t}"
            )));
        }
        if let Some(t) = self
            .indent_thresholds
            .iter()
            .find(|t| !(**t > 0.0 && **t < 1.0))
        {
            return Err(Error::InvalidArgument(format!(
                "indentation thresholds must lie in (0, 1), got {t}"
            )));
        }
        Ok(())
    }
}

/// Fraction of nuclei beyond one cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdFraction {
    pub threshold: f64,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeStats {
    pub mean: f64,
    pub median: f64,
    pub sd: f64,
    pub p90: f64,
    pub p90_over_median: Option<f64>,
    pub mean_top10pct: f64,
    pub skewness: Option<f64>,
    /// Strictly greater than each threshold.
    pub pct_large: Vec<ThresholdFraction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeStats {
    pub ecc_mean: f64,
    pub ecc_sd: f64,
    pub ecc_skewness: Option<f64>,
    pub sol_mean: f64,
    pub sol_sd: f64,
    pub sol_skewness: Option<f64>,
    pub inverted_mean_solidity: f64,
    /// Strictly below each solidity cutoff.
    pub pct_indented: Vec<ThresholdFraction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoiFeatureSet {
    pub n_nuclei: usize,
    pub size: SizeStats,
    pub shape: ShapeStats,
}

/// A named parameter value; `None` marks an undefined statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameter {
    pub name: String,
    pub value: Option<f64>,
}

impl Parameter {
    fn new(name: impl Into<String>, value: Option<f64>) -> Self {
        Self {
            name: name.into(),
            value,
        }
    }
}

pub fn pct_large_name(threshold: f64) -> String {
    format!("pct_large_gt_{threshold}")
}

pub fn pct_indented_name(cutoff: f64) -> String {
    format!("pct_indented_lt_{cutoff}")
}

impl RoiFeatureSet {
    /// Flattens every parameter in a stable column order.
    pub fn parameters(&self) -> Vec<Parameter> {
        let s = &self.size;
        let h = &self.shape;
        let mut out = vec![
            Parameter::new("n_nuclei", Some(self.n_nuclei as f64)),
            Parameter::new("area_mean", Some(s.mean)),
            Parameter::new("area_median", Some(s.median)),
            Parameter::new("area_sd", Some(s.sd)),
            Parameter::new("area_p90", Some(s.p90)),
            Parameter::new("area_p90_over_median", s.p90_over_median),
            Parameter::new("area_mean_top10pct", Some(s.mean_top10pct)),
            Parameter::new("area_skewness", s.skewness),
        ];
        out.extend(
            s.pct_large
                .iter()
                .map(|t| Parameter::new(pct_large_name(t.threshold), Some(t.fraction))),
        );
        out.extend([
            Parameter::new("ecc_mean", Some(h.ecc_mean)),
            Parameter::new("ecc_sd", Some(h.ecc_sd)),
            Parameter::new("ecc_skewness", h.ecc_skewness),
            Parameter::new("sol_mean", Some(h.sol_mean)),
            Parameter::new("sol_sd", Some(h.sol_sd)),
            Parameter::new("sol_skewness", h.sol_skewness),
            Parameter::new("inverted_mean_solidity", Some(h.inverted_mean_solidity)),
        ]);
        out.extend(
            h.pct_indented
                .iter()
                .map(|t| Parameter::new(pct_indented_name(t.threshold), Some(t.fraction))),
        );
        out
    }

    pub fn get(&self, name: &str) -> Option<Option<f64>> {
        self.parameters()
            .into_iter()
            .find(|p| p.name == name)
            .map(|p| p.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseFeatureSet {
    pub case_id: String,
    /// Per-parameter mean across ROIs; `n_nuclei` is the sum.
    pub parameters: Vec<Parameter>,
    pub rois: Vec<RoiFeatureSet>,
}

impl CaseFeatureSet {
    pub fn get(&self, name: &str) -> Option<Option<f64>> {
        self.parameters
            .iter()
            .find(|p| p.name == name)
            .map(|p| p.value)
    }
}

pub fn filter_regions(regions: &[NucleusRegion], cfg: &FilterConfig) -> Vec<NucleusRegion> {
    regions
        .iter()
        .filter(|r| r.area_um2 >= cfg.min_area_um2)
        .filter(|r| !(cfg.exclude_border_touching && r.touches_border))
        .cloned()
        .collect()
}

pub fn size_stats(areas: &[f64], large_thresholds: &[f64]) -> Result<SizeStats> {
    let sd = sample_sd(areas)?;
    let n = areas.len();
    let sorted = sorted(areas);
    let median = quantile_sorted(&sorted, 0.5)?;
    let p90 = quantile_sorted(&sorted, 0.9)?;
    // ceil(0.1 n) largest values, in integer arithmetic
    let top_k = n.div_ceil(10);
    let mean_top10pct = mean(&sorted[n - top_k..])?;
    let pct_large = large_thresholds
        .iter()
        .map(|&t| ThresholdFraction {
            threshold: t,
            fraction: areas.iter().filter(|&&a| a > t).count() as f64 / n as f64,
        })
        .collect();
    Ok(SizeStats {
        mean: mean(areas)?,
        median,
        sd,
        p90,
        p90_over_median: (median != 0.0).then(|| p90 / median),
        mean_top10pct,
        skewness: skewness(areas),
        pct_large,
    })
}

pub fn shape_stats(regions: &[NucleusRegion], indent_thresholds: &[f64]) -> Result<ShapeStats> {
    let ecc: Vec<f64> = regions.iter().map(|r| r.eccentricity).collect();
    let sol: Vec<f64> = regions.iter().map(|r| r.solidity).collect();
    let ecc_sd = sample_sd(&ecc)?;
    let sol_sd = sample_sd(&sol)?;
    let sol_mean = mean(&sol)?;
    let n = sol.len() as f64;
    Ok(ShapeStats {
        ecc_mean: mean(&ecc)?,
        ecc_sd,
        ecc_skewness: skewness(&ecc),
        sol_mean,
        sol_sd,
        sol_skewness: skewness(&sol),
        inverted_mean_solidity: 1.0 - sol_mean,
        pct_indented: indent_thresholds
            .iter()
            .map(|&c| ThresholdFraction {
                threshold: c,
                fraction: sol.iter().filter(|&&s| s < c).count() as f64 / n,
            })
            .collect(),
    })
}

/// Feature set of already-measured (and filtered) regions.
pub fn features_from_regions(regions: &[NucleusRegion], cfg: &FilterConfig) -> Result<RoiFeatureSet> {
    let areas: Vec<f64> = regions.iter().map(|r| r.area_um2).collect();
    Ok(RoiFeatureSet {
        n_nuclei: regions.len(),
        size: size_stats(&areas, &cfg.large_thresholds_um2)?,
        shape: shape_stats(regions, &cfg.indent_thresholds)?,
    })
}

/// Measures, filters and summarizes one ROI. Returns the surviving regions
/// along with the features.
///
/// A grid whose labels are all 0/1 is treated as binary and labeled first.
pub fn measure_roi(grid: &PixelGrid, cfg: &FilterConfig) -> Result<(Vec<NucleusRegion>, RoiFeatureSet)> {
    cfg.validate()?;
    let regions = if grid.is_binary() {
        region_properties(&label_components(grid))
    } else {
        region_properties(grid)
    };
    let kept = filter_regions(&regions, cfg);
    let features = features_from_regions(&kept, cfg)?;
    Ok((kept, features))
}

pub fn roi_features(grid: &PixelGrid, cfg: &FilterConfig) -> Result<RoiFeatureSet> {
    measure_roi(grid, cfg).map(|(_, f)| f)
}

/// Unweighted per-parameter mean across ROIs. Undefined ROI values are
/// skipped; a parameter undefined in every ROI stays undefined.
pub fn aggregate_case(case_id: &str, features: &[RoiFeatureSet]) -> Result<CaseFeatureSet> {
    let first = features.first().ok_or(Error::EmptySample)?;
    let names: Vec<String> = first.parameters().into_iter().map(|p| p.name).collect();
    let per_roi: Vec<Vec<Parameter>> = features.iter().map(|f| f.parameters()).collect();
    for params in &per_roi {
        if params.len() != names.len() || params.iter().zip(&names).any(|(p, n)| &p.name != n) {
            return Err(Error::InvalidArgument(
                "ROI feature sets were computed with different thresholds".into(),
            ));
        }
    }
    let parameters = names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let defined: Vec<f64> = per_roi.iter().filter_map(|p| p[i].value).collect();
            let value = if name == "n_nuclei" {
                Some(defined.iter().sum())
            } else {
                descriptive::mean(&defined).ok()
            };
            Parameter::new(name.clone(), value)
        })
        .collect();
    Ok(CaseFeatureSet {
        case_id: case_id.to_string(),
        parameters,
        rois: features.to_vec(),
    })
}
