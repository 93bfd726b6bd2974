//! Deterministic emulation of the two manual sampling protocols: complete
//! sampling of grid fields until a nucleus count is reached, and stratified
//! selection of twelve nuclei by size tertile.

use std::collections::{BTreeSet, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{NucleusRegion, PixelGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub cols: usize,
    pub rows: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { cols: 5, rows: 6 }
    }
}

/// One grid field with its pixel rectangle `[x0, x1) × [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridField {
    pub row: usize,
    pub col: usize,
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleResult {
    pub selected_region_ids: Vec<u32>,
    pub fields_used: Vec<GridField>,
    pub reached_target: bool,
}

fn split(extent: usize, parts: usize, i: usize) -> (usize, usize) {
    let step = extent / parts;
    let start = i * step;
    let end = if i + 1 == parts { extent } else { start + step };
    (start, end)
}

/// Grid fields ordered center-out: ascending Chebyshev distance between the
/// field center and the image center, ties broken row-major.
pub fn traversal_order(width: usize, height: usize, spec: GridSpec) -> Result<Vec<GridField>> {
    if spec.cols == 0 || spec.rows == 0 || spec.cols > width || spec.rows > height {
        return Err(Error::InvalidArgument(format!(
            "a {}x{} grid does not fit a {width}x{height} image",
            spec.cols, spec.rows
        )));
    }
    let mut fields = Vec::with_capacity(spec.cols * spec.rows);
    for row in 0..spec.rows {
        let (y0, y1) = split(height, spec.rows, row);
        for col in 0..spec.cols {
            let (x0, x1) = split(width, spec.cols, col);
            fields.push(GridField {
                row,
                col,
                x0,
                y0,
                x1,
                y1,
            });
        }
    }
    // distances doubled so they stay integral
    let dist = |f: &GridField| {
        let dx = (f.x0 + f.x1).abs_diff(width);
        let dy = (f.y0 + f.y1).abs_diff(height);
        dx.max(dy)
    };
    fields.sort_by_key(|f| (dist(f), f.row, f.col));
    Ok(fields)
}

/// Completely samples grid fields in center-out order until at least
/// `min_count` distinct eligible nuclei are captured.
///
/// A nucleus is captured by every field containing one of its pixels and is
/// counted once, by the first such field. Regions touching the image border
/// are never eligible. Only ids present in `regions` are considered.
pub fn grid_sample(
    labeled: &PixelGrid,
    regions: &[NucleusRegion],
    spec: GridSpec,
    min_count: usize,
) -> Result<SampleResult> {
    let eligible: HashSet<u32> = regions
        .iter()
        .filter(|r| !r.touches_border)
        .map(|r| r.id)
        .collect();
    if eligible.is_empty() {
        return Err(Error::EmptySample);
    }
    let order = traversal_order(labeled.width(), labeled.height(), spec)?;
    let mut selected = Vec::new();
    let mut seen = HashSet::new();
    let mut fields_used = Vec::new();

    for field in order {
        if selected.len() >= min_count {
            break;
        }
        let mut captured = BTreeSet::new();
        for y in field.y0..field.y1 {
            for x in field.x0..field.x1 {
                let l = labeled.get(x, y);
                if l != 0 && eligible.contains(&l) && !seen.contains(&l) {
                    captured.insert(l);
                }
            }
        }
        for id in captured {
            seen.insert(id);
            selected.push(id);
        }
        fields_used.push(field);
    }

    Ok(SampleResult {
        reached_target: selected.len() >= min_count,
        selected_region_ids: selected,
        fields_used,
    })
}

pub const STRATIFIED_PER_TERTILE: usize = 4;

/// Draws four nuclei from each area tertile (small, intermediate, large).
///
/// Regions are ordered by area (ties by id). With `n = 3q + r`, the small and
/// large tertiles hold `q` regions each and the middle one the remaining
/// `q + r`.
pub fn stratified_sample_12(regions: &[NucleusRegion], seed: u64) -> Result<Vec<NucleusRegion>> {
    let needed = 3 * STRATIFIED_PER_TERTILE;
    if regions.len() < needed {
        return Err(Error::InsufficientNuclei {
            needed,
            found: regions.len(),
        });
    }
    let mut sorted: Vec<&NucleusRegion> = regions.iter().collect();
    sorted.sort_by(|a, b| a.area_um2.total_cmp(&b.area_um2).then(a.id.cmp(&b.id)));
    let n = sorted.len();
    let q = n / 3;
    let tertiles = [&sorted[..q], &sorted[q..n - q], &sorted[n - q..]];

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(needed);
    for tertile in tertiles {
        let mut picks = rand::seq::index::sample(&mut rng, tertile.len(), STRATIFIED_PER_TERTILE).into_vec();
        picks.sort_unstable();
        out.extend(picks.into_iter().map(|i| tertile[i].clone()));
    }
    Ok(out)
}
