//! Synthetic ROIs of rasterized ellipses with known size and shape.

use std::f64::consts::PI;

use rand::distributions::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::LogNormal;

use crate::error::{Error, Result};
use crate::geometry::{PixelGrid, PolygonAnnotation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub width: usize,
    pub height: usize,
    pub mpp: f64,
    pub n_nuclei: usize,
    /// Location of the log-normal area distribution, in log-µm².
    pub log_area_mu: f64,
    /// Scale of the log-normal area distribution, in log-µm².
    pub log_area_sigma: f64,
    pub ecc_min: f64,
    pub ecc_max: f64,
    /// Clear pixels kept between the bounding circles of two nuclei.
    pub min_gap: f64,
    /// Shapes whose minor semi-axis falls below this are redrawn.
    #[serde(default)]
    pub min_semi_axis_px: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            width: 688,
            height: 516,
            mpp: 0.25,
            n_nuclei: 60,
            log_area_mu: 30f64.ln(),
            log_area_sigma: 0.3,
            ecc_min: 0.0,
            ecc_max: 0.9,
            min_gap: 2.0,
            min_semi_axis_px: 0.0,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.width == 0 || self.height == 0 {
            return bad("synthetic ROI dimensions must be positive".into());
        }
        if !(self.mpp.is_finite() && self.mpp > 0.0) {
            return bad(format!("mpp must be > 0, got {}", self.mpp));
        }
        if !(self.log_area_mu.is_finite() && self.log_area_sigma.is_finite() && self.log_area_sigma > 0.0) {
            return bad("log-normal parameters must be finite with sigma > 0".into());
        }
        if !(0.0..1.0).contains(&self.ecc_min) || !(0.0..1.0).contains(&self.ecc_max) || self.ecc_min > self.ecc_max {
            return bad(format!(
                "eccentricity range must satisfy 0 <= min <= max < 1, got [{}, {}]",
                self.ecc_min, self.ecc_max
            ));
        }
        if !(self.min_gap >= 0.0 && self.min_semi_axis_px >= 0.0) {
            return bad("min_gap and min_semi_axis_px must be >= 0".into());
        }
        Ok(())
    }

    /// Analytic standard deviation of the area distribution in µm².
    pub fn area_sd_um2(&self) -> f64 {
        let s2 = self.log_area_sigma * self.log_area_sigma;
        ((s2.exp() - 1.0) * (2.0 * self.log_area_mu + s2).exp()).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthNucleus {
    pub id: u32,
    /// Continuous pixel coordinates.
    pub center: (f64, f64),
    pub semi_major_px: f64,
    pub semi_minor_px: f64,
    /// Angle of the major axis from the x axis, radians.
    pub orientation: f64,
    pub area_um2: f64,
    pub eccentricity: f64,
}

impl TruthNucleus {
    pub fn contains(&self, p: (f64, f64)) -> bool {
        let (dx, dy) = (p.0 - self.center.0, p.1 - self.center.1);
        let (s, c) = self.orientation.sin_cos();
        let u = (dx * c + dy * s) / self.semi_major_px;
        let v = (-dx * s + dy * c) / self.semi_minor_px;
        u * u + v * v <= 1.0
    }

    /// Closed contour approximated by `n` vertices.
    pub fn polygon(&self, n: usize) -> PolygonAnnotation {
        let (s, c) = self.orientation.sin_cos();
        let vertices = (0..n)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                let (u, v) = (self.semi_major_px * t.cos(), self.semi_minor_px * t.sin());
                (self.center.0 + u * c - v * s, self.center.1 + u * s + v * c)
            })
            .collect();
        PolygonAnnotation {
            id: self.id.to_string(),
            label: "nucleus".into(),
            vertices,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthTruth {
    pub nuclei: Vec<TruthNucleus>,
}

const MAX_SHAPE_DRAWS: usize = 10_000;
pub const POLYGON_VERTICES: usize = 64;

fn draw_shape(spec: &SynthSpec, rng: &mut ChaCha8Rng, area: &LogNormal) -> Result<(f64, f64, f64)> {
    for _ in 0..MAX_SHAPE_DRAWS {
        let area_um2 = area.sample(rng);
        let e = if spec.ecc_max > spec.ecc_min {
            rng.gen_range(spec.ecc_min..spec.ecc_max)
        } else {
            spec.ecc_min
        };
        let ratio = (1.0 - e * e).sqrt();
        let area_px = area_um2 / (spec.mpp * spec.mpp);
        let a = (area_px / (PI * ratio)).sqrt();
        let b = a * ratio;
        if b >= spec.min_semi_axis_px {
            return Ok((a, b, e));
        }
    }
    Err(Error::InvalidArgument(format!(
        "no shape with minor semi-axis >= {} px after {MAX_SHAPE_DRAWS} draws",
        spec.min_semi_axis_px
    )))
}

/// Generates a labeled ROI of non-overlapping ellipses.
///
/// Shapes are drawn first, then placed one by one by rejection sampling with
/// a shared budget of `10 * n²` attempts. A pixel belongs to a nucleus when
/// its center lies inside the ellipse; labels follow placement order.
pub fn generate_roi(spec: &SynthSpec) -> Result<(PixelGrid, SynthTruth)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let area = LogNormal::new(spec.log_area_mu, spec.log_area_sigma)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let shapes = (0..spec.n_nuclei)
        .map(|_| draw_shape(spec, &mut rng, &area))
        .collect::<Result<Vec<_>>>()?;

    let (w, h) = (spec.width as f64, spec.height as f64);
    let budget = 10 * spec.n_nuclei * spec.n_nuclei;
    let mut attempts = 0;
    let mut nuclei: Vec<TruthNucleus> = Vec::with_capacity(spec.n_nuclei);
    for (i, &(a, b, e)) in shapes.iter().enumerate() {
        // one pixel of margin keeps every nucleus off the image border
        let margin = a + 1.0;
        if 2.0 * margin >= w || 2.0 * margin >= h {
            return Err(Error::PlacementFailure {
                placed: nuclei.len(),
                requested: spec.n_nuclei,
            });
        }
        let placed = loop {
            if attempts >= budget {
                return Err(Error::PlacementFailure {
                    placed: nuclei.len(),
                    requested: spec.n_nuclei,
                });
            }
            attempts += 1;
            let c = (rng.gen_range(margin..w - margin), rng.gen_range(margin..h - margin));
            let clear = nuclei.iter().all(|n| {
                let d = ((n.center.0 - c.0).powi(2) + (n.center.1 - c.1).powi(2)).sqrt();
                d >= n.semi_major_px + a + spec.min_gap
            });
            if clear {
                break c;
            }
        };
        nuclei.push(TruthNucleus {
            id: i as u32 + 1,
            center: placed,
            semi_major_px: a,
            semi_minor_px: b,
            orientation: rng.gen_range(0.0..PI),
            area_um2: PI * a * b * spec.mpp * spec.mpp,
            eccentricity: e,
        });
    }

    let mut labels = vec![0u32; spec.width * spec.height];
    for n in &nuclei {
        let r = n.semi_major_px;
        let x0 = (n.center.0 - r).floor().max(0.0) as usize;
        let y0 = (n.center.1 - r).floor().max(0.0) as usize;
        let x1 = ((n.center.0 + r).ceil() as usize).min(spec.width - 1);
        let y1 = ((n.center.1 + r).ceil() as usize).min(spec.height - 1);
        for y in y0..=y1 {
            for x in x0..=x1 {
                if n.contains((x as f64 + 0.5, y as f64 + 0.5)) {
                    labels[y * spec.width + x] = n.id;
                }
            }
        }
    }
    let grid = PixelGrid::new(spec.width, spec.height, spec.mpp, labels)?;
    Ok((grid, SynthTruth { nuclei }))
}

/// Polygon contours of the truth nuclei, for the annotation path.
pub fn truth_annotations(truth: &SynthTruth) -> Vec<PolygonAnnotation> {
    truth.nuclei.iter().map(|n| n.polygon(POLYGON_VERTICES)).collect()
}
