//! Label rasters, polygon rasterization and per-nucleus region measurements.
//!
//! Pixel `(x, y)` covers the unit square `[x, x + 1) × [y, y + 1)`; its center
//! is `(x + 0.5, y + 0.5)`. Centroids are reported in that continuous frame.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A 2-D label raster with a physical resolution.
///
/// Label 0 is background; any `k > 0` marks object `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelGrid {
    width: usize,
    height: usize,
    mpp: f64,
    labels: Vec<u32>,
}

impl PixelGrid {
    pub fn new(width: usize, height: usize, mpp: f64, labels: Vec<u32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidGrid(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if !(mpp.is_finite() && mpp > 0.0) {
            return Err(Error::InvalidGrid(format!("mpp must be > 0, got {mpp}")));
        }
        if labels.len() != width * height {
            return Err(Error::InvalidGrid(format!(
                "label buffer holds {} values, expected {}",
                labels.len(),
                width * height
            )));
        }
        Ok(Self {
            width,
            height,
            mpp,
            labels,
        })
    }

    pub fn zeros(width: usize, height: usize, mpp: f64) -> Result<Self> {
        Self::new(width, height, mpp, vec![0; width * height])
    }

    /// Builds a grid by evaluating `f(x, y)` for every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mpp: f64,
        mut f: impl FnMut(usize, usize) -> u32,
    ) -> Result<Self> {
        let mut labels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                labels.push(f(x, y));
            }
        }
        Self::new(width, height, mpp, labels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn mpp(&self) -> f64 {
        self.mpp
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn into_labels(self) -> Vec<u32> {
        self.labels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    pub fn max_label(&self) -> u32 {
        self.labels.iter().copied().max().unwrap_or(0)
    }

    /// True when every label is 0 or 1.
    pub fn is_binary(&self) -> bool {
        self.labels.iter().all(|&l| l <= 1)
    }

    pub fn foreground_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l != 0).count()
    }

    /// Collapses all object labels to 1.
    pub fn to_binary(&self) -> PixelGrid {
        PixelGrid {
            labels: self.labels.iter().map(|&l| u32::from(l != 0)).collect(),
            ..*self
        }
    }

    /// Same grid with a different resolution.
    pub fn with_mpp(&self, mpp: f64) -> Result<PixelGrid> {
        PixelGrid::new(self.width, self.height, mpp, self.labels.clone())
    }

    /// Rotates the raster by 90° clockwise.
    pub fn rotate90(&self) -> PixelGrid {
        let (w, h) = (self.width, self.height);
        let mut labels = vec![0; w * h];
        // new grid is h wide and w tall
        for ny in 0..w {
            for nx in 0..h {
                labels[ny * h + nx] = self.get(ny, h - 1 - nx);
            }
        }
        PixelGrid {
            width: h,
            height: w,
            mpp: self.mpp,
            labels,
        }
    }
}

/// An annotated nuclear contour in pixel coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonAnnotation {
    pub id: String,
    pub label: String,
    pub vertices: Vec<(f64, f64)>,
}

/// Geometric measurements of one labeled object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NucleusRegion {
    pub id: u32,
    pub pixel_count: usize,
    pub area_um2: f64,
    pub centroid: (f64, f64),
    pub eccentricity: f64,
    pub solidity: f64,
    pub hull_area_px: f64,
    pub touches_border: bool,
    /// Inclusive pixel bounds `(min_x, min_y, max_x, max_y)`.
    pub bbox: (usize, usize, usize, usize),
}

const NEIGHBORS_8: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Labels 8-connected foreground components.
///
/// Any nonzero input value counts as foreground. Components receive dense ids
/// `1..=N` in raster-scan order of their first pixel.
pub fn label_components(binary: &PixelGrid) -> PixelGrid {
    let (w, h) = binary.dims();
    let mut out = vec![0u32; w * h];
    let mut next = 0u32;
    let mut stack: Vec<usize> = Vec::new();

    for start in 0..w * h {
        if binary.labels[start] == 0 || out[start] != 0 {
            continue;
        }
        next += 1;
        out[start] = next;
        stack.push(start);
        while let Some(idx) = stack.pop() {
            let (x, y) = ((idx % w) as isize, (idx / w) as isize);
            for (dx, dy) in NEIGHBORS_8 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let n = ny as usize * w + nx as usize;
                if binary.labels[n] != 0 && out[n] == 0 {
                    out[n] = next;
                    stack.push(n);
                }
            }
        }
    }

    PixelGrid {
        width: w,
        height: h,
        mpp: binary.mpp,
        labels: out,
    }
}

fn on_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> bool {
    let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
    let scale = (b.0 - a.0).abs().max((b.1 - a.1).abs()).max(1.0);
    if cross.abs() > 1e-12 * scale {
        return false;
    }
    p.0 >= a.0.min(b.0) && p.0 <= a.0.max(b.0) && p.1 >= a.1.min(b.1) && p.1 <= a.1.max(b.1)
}

/// Even–odd point-in-polygon test; points on an edge count as inside.
pub fn point_in_polygon(p: (f64, f64), vertices: &[(f64, f64)]) -> bool {
    let n = vertices.len();
    let mut inside = false;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        if on_segment(p, a, b) {
            return true;
        }
        if (a.1 > p.1) != (b.1 > p.1) {
            let x_cross = a.0 + (p.1 - a.1) * (b.0 - a.0) / (b.1 - a.1);
            if p.0 < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

fn paint_polygon(
    poly: &PolygonAnnotation,
    width: usize,
    height: usize,
    labels: &mut [u32],
    value: u32,
) -> Result<()> {
    let v = &poly.vertices;
    if v.len() < 3 {
        return Err(Error::InvalidPolygon { vertices: v.len() });
    }
    let (mut min_x, mut min_y, mut max_x, mut max_y) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for &(x, y) in v {
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "polygon {} has a non-finite vertex",
                poly.id
            )));
        }
        min_x = min_x.min(x);
        min_y = min_y.min(y);
        max_x = max_x.max(x);
        max_y = max_y.max(y);
    }
    // pixel centers x + 0.5 within [min_x, max_x]
    let x0 = (min_x - 0.5).ceil().max(0.0);
    let y0 = (min_y - 0.5).ceil().max(0.0);
    let x1 = (max_x - 0.5).floor().min(width as f64 - 1.0);
    let y1 = (max_y - 0.5).floor().min(height as f64 - 1.0);
    if x1 < x0 || y1 < y0 {
        return Ok(());
    }
    for y in y0 as usize..=y1 as usize {
        for x in x0 as usize..=x1 as usize {
            if point_in_polygon((x as f64 + 0.5, y as f64 + 0.5), v) {
                labels[y * width + x] = value;
            }
        }
    }
    Ok(())
}

/// Rasterizes one polygon into a binary grid by pixel-center inclusion.
pub fn rasterize_polygon(
    poly: &PolygonAnnotation,
    width: usize,
    height: usize,
    mpp: f64,
) -> Result<PixelGrid> {
    let mut grid = PixelGrid::zeros(width, height, mpp)?;
    paint_polygon(poly, width, height, &mut grid.labels, 1)?;
    Ok(grid)
}

/// Rasterizes polygons into a label grid, polygon `i` receiving label `i + 1`.
///
/// Later polygons overwrite earlier ones where they overlap. Labels are not
/// densified here; polygons that cover no pixel center leave a gap.
pub fn rasterize_annotations(
    polys: &[PolygonAnnotation],
    width: usize,
    height: usize,
    mpp: f64,
) -> Result<PixelGrid> {
    let mut grid = PixelGrid::zeros(width, height, mpp)?;
    for (i, poly) in polys.iter().enumerate() {
        let value = u32::try_from(i + 1)
            .map_err(|_| Error::InvalidArgument("too many polygons".into()))?;
        paint_polygon(poly, width, height, &mut grid.labels, value)?;
    }
    Ok(grid)
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Andrew's monotone chain. Returns hull vertices counter-clockwise without
/// collinear points.
fn monotone_chain(mut pts: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    pts.sort_unstable();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<(i64, i64)> = Vec::with_capacity(pts.len() * 2);
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

fn shoelace(poly: &[(i64, i64)]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let twice: i64 = (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum();
    twice.abs() as f64 / 2.0
}

/// Per-row horizontal extents `(y, min_x, max_x)`; only these pixels can
/// contribute corner points to the hull.
fn hull_area_from_rows(rows: &[(i64, i64, i64)]) -> f64 {
    let mut pts = Vec::with_capacity(rows.len() * 4);
    for &(y, x0, x1) in rows {
        pts.push((x0, y));
        pts.push((x0, y + 1));
        pts.push((x1 + 1, y));
        pts.push((x1 + 1, y + 1));
    }
    shoelace(&monotone_chain(pts))
}

/// Area in px² of the convex hull of the four corner points of every pixel.
pub fn convex_hull_area(pixels: &[(i64, i64)]) -> Result<f64> {
    if pixels.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let mut rows: std::collections::BTreeMap<i64, (i64, i64)> = Default::default();
    for &(x, y) in pixels {
        rows.entry(y)
            .and_modify(|(lo, hi)| {
                *lo = (*lo).min(x);
                *hi = (*hi).max(x);
            })
            .or_insert((x, x));
    }
    let rows: Vec<_> = rows.into_iter().map(|(y, (lo, hi))| (y, lo, hi)).collect();
    Ok(hull_area_from_rows(&rows))
}

/// Eccentricity of the moment-equivalent ellipse from central second moments.
pub fn eccentricity_from_moments(mu20: f64, mu02: f64, mu11: f64) -> f64 {
    let mean = (mu20 + mu02) / 2.0;
    let half_diff = (mu20 - mu02) / 2.0;
    let root = (half_diff * half_diff + mu11 * mu11).sqrt();
    let l1 = mean + root;
    let l2 = (mean - root).max(0.0);
    if l1 <= 0.0 {
        return 0.0;
    }
    (1.0 - l2 / l1).max(0.0).sqrt()
}

#[derive(Clone)]
struct Accumulator {
    count: usize,
    sum_x: f64,
    sum_y: f64,
    min_x: usize,
    min_y: usize,
    max_x: usize,
    max_y: usize,
    rows: Vec<(i64, i64, i64)>,
    mu20: f64,
    mu02: f64,
    mu11: f64,
}

impl Default for Accumulator {
    fn default() -> Self {
        Self {
            count: 0,
            sum_x: 0.0,
            sum_y: 0.0,
            min_x: usize::MAX,
            min_y: usize::MAX,
            max_x: 0,
            max_y: 0,
            rows: Vec::new(),
            mu20: 0.0,
            mu02: 0.0,
            mu11: 0.0,
        }
    }
}

/// Measures every labeled object, ordered by label id.
pub fn region_properties(labeled: &PixelGrid) -> Vec<NucleusRegion> {
    let (w, h) = labeled.dims();
    let max = labeled.max_label() as usize;
    if max == 0 {
        return Vec::new();
    }
    let mut acc = vec![Accumulator::default(); max + 1];

    for y in 0..h {
        for x in 0..w {
            let l = labeled.get(x, y) as usize;
            if l == 0 {
                continue;
            }
            let a = &mut acc[l];
            a.count += 1;
            a.sum_x += x as f64 + 0.5;
            a.sum_y += y as f64 + 0.5;
            a.min_x = a.min_x.min(x);
            a.min_y = a.min_y.min(y);
            a.max_x = a.max_x.max(x);
            a.max_y = a.max_y.max(y);
            let (yi, xi) = (y as i64, x as i64);
            match a.rows.last_mut() {
                Some(row) if row.0 == yi => row.2 = xi,
                _ => a.rows.push((yi, xi, xi)),
            }
        }
    }

    // second pass: central moments about the centroid
    for y in 0..h {
        for x in 0..w {
            let l = labeled.get(x, y) as usize;
            if l == 0 {
                continue;
            }
            let a = &mut acc[l];
            let n = a.count as f64;
            let dx = x as f64 + 0.5 - a.sum_x / n;
            let dy = y as f64 + 0.5 - a.sum_y / n;
            a.mu20 += dx * dx;
            a.mu02 += dy * dy;
            a.mu11 += dx * dy;
        }
    }

    let px_area = labeled.mpp() * labeled.mpp();
    acc.into_iter()
        .enumerate()
        .filter(|(_, a)| a.count > 0)
        .map(|(id, a)| {
            let n = a.count as f64;
            let hull = hull_area_from_rows(&a.rows);
            NucleusRegion {
                id: id as u32,
                pixel_count: a.count,
                area_um2: n * px_area,
                centroid: (a.sum_x / n, a.sum_y / n),
                eccentricity: eccentricity_from_moments(a.mu20 / n, a.mu02 / n, a.mu11 / n),
                solidity: n / hull,
                hull_area_px: hull,
                touches_border: a.min_x == 0 || a.min_y == 0 || a.max_x == w - 1 || a.max_y == h - 1,
                bbox: (a.min_x, a.min_y, a.max_x, a.max_y),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid_from_rows(rows: &[&str]) -> PixelGrid {
        let h = rows.len();
        let w = rows[0].len();
        PixelGrid::from_fn(w, h, 1.0, |x, y| u32::from(rows[y].as_bytes()[x] == b'#')).unwrap()
    }

    fn l_pentomino() -> PixelGrid {
        grid_from_rows(&["#..", "#..", "###"])
    }

    /// Jarvis march over every corner point, independent of the monotone chain.
    fn brute_force_hull_area(pixels: &[(i64, i64)]) -> f64 {
        let mut pts: Vec<(f64, f64)> = pixels
            .iter()
            .flat_map(|&(x, y)| {
                let (x, y) = (x as f64, y as f64);
                [(x, y), (x + 1.0, y), (x, y + 1.0), (x + 1.0, y + 1.0)]
            })
            .collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        let start = pts[0];
        let mut hull = vec![start];
        let mut current = start;
        loop {
            let mut candidate = pts[0];
            if candidate == current {
                candidate = pts[1];
            }
            for &p in &pts {
                if p == current {
                    continue;
                }
                let c = (candidate.0 - current.0) * (p.1 - current.1)
                    - (candidate.1 - current.1) * (p.0 - current.0);
                let farther = {
                    let dc = (candidate.0 - current.0).powi(2) + (candidate.1 - current.1).powi(2);
                    let dp = (p.0 - current.0).powi(2) + (p.1 - current.1).powi(2);
                    dp > dc
                };
                if c < 0.0 || (c == 0.0 && farther) {
                    candidate = p;
                }
            }
            if candidate == start {
                break;
            }
            hull.push(candidate);
            current = candidate;
        }
        let n = hull.len();
        (0..n)
            .map(|i| hull[i].0 * hull[(i + 1) % n].1 - hull[(i + 1) % n].0 * hull[i].1)
            .sum::<f64>()
            .abs()
            / 2.0
    }

    #[test]
    fn empty_grid_has_no_components() {
        let g = PixelGrid::zeros(10, 10, 1.0).unwrap();
        let l = label_components(&g);
        assert_eq!(l.max_label(), 0);
        assert!(region_properties(&l).is_empty());
    }

    #[test]
    fn filled_block_is_one_component() {
        let g = PixelGrid::from_fn(5, 5, 1.0, |x, y| u32::from((1..4).contains(&x) && (1..4).contains(&y))).unwrap();
        let regions = region_properties(&label_components(&g));
        assert_eq!(regions.len(), 1);
        assert_eq!(regions[0].pixel_count, 9);
    }

    #[test]
    fn diagonal_neighbors_merge() {
        let g = grid_from_rows(&["#.", ".#"]);
        let l = label_components(&g);
        assert_eq!(l.max_label(), 1);
        assert_eq!(l.labels(), &[1, 0, 0, 1]);
    }

    #[test]
    fn labels_follow_raster_order() {
        let g = grid_from_rows(&["..#", "#..", "#.#"]);
        let l = label_components(&g);
        // (2,0) first, then (0,1), then (2,2)
        assert_eq!(l.labels(), &[0, 0, 1, 2, 0, 0, 2, 0, 3]);
    }

    #[test]
    fn rasterize_square() {
        let poly = PolygonAnnotation {
            id: "sq".into(),
            label: "nucleus".into(),
            vertices: vec![(0.0, 0.0), (4.0, 0.0), (4.0, 4.0), (0.0, 4.0)],
        };
        let g = rasterize_polygon(&poly, 6, 6, 1.0).unwrap();
        assert_eq!(g.foreground_count(), 16);
        for y in 0..6 {
            for x in 0..6 {
                assert_eq!(g.get(x, y) == 1, x < 4 && y < 4);
            }
        }
    }

    #[test]
    fn rasterize_rejects_degenerate_polygon() {
        let poly = PolygonAnnotation {
            id: "line".into(),
            label: String::new(),
            vertices: vec![(0.0, 0.0), (4.0, 4.0)],
        };
        assert!(matches!(
            rasterize_polygon(&poly, 6, 6, 1.0),
            Err(Error::InvalidPolygon { vertices: 2 })
        ));
    }

    #[test]
    fn rasterize_outside_grid_is_empty() {
        let poly = PolygonAnnotation {
            id: "far".into(),
            label: String::new(),
            vertices: vec![(100.0, 100.0), (110.0, 100.0), (105.0, 110.0)],
        };
        assert_eq!(rasterize_polygon(&poly, 6, 6, 1.0).unwrap().foreground_count(), 0);
    }

    #[test]
    fn edge_points_count_as_inside() {
        // centers at x = 0.5 lie exactly on the left edge
        let v = [(0.5, 0.0), (3.0, 0.0), (3.0, 3.0), (0.5, 3.0)];
        assert!(point_in_polygon((0.5, 1.5), &v));
        assert!(point_in_polygon((3.0, 1.5), &v));
        assert!(!point_in_polygon((3.5, 1.5), &v));
    }

    #[test]
    fn self_intersecting_polygon_uses_even_odd() {
        // pentagram: the central pentagon is outside under even–odd
        let pts: Vec<(f64, f64)> = (0..5)
            .map(|i| {
                let t = std::f64::consts::PI * 2.0 * (i as f64 * 2.0) / 5.0;
                (50.0 + 40.0 * t.sin(), 50.0 - 40.0 * t.cos())
            })
            .collect();
        assert!(!point_in_polygon((50.0, 50.0), &pts));
        assert!(point_in_polygon((50.0, 20.0), &pts));
    }

    #[test]
    fn square_region_properties() {
        let g = PixelGrid::from_fn(6, 6, 0.25, |x, y| u32::from((1..5).contains(&x) && (1..5).contains(&y))).unwrap();
        let r = &region_properties(&g)[0];
        assert_eq!(r.area_um2, 1.0);
        assert!(r.eccentricity.abs() < 1e-12);
        assert_eq!(r.solidity, 1.0);
        assert!(!r.touches_border);
        assert_eq!(r.bbox, (1, 1, 4, 4));
        assert_eq!(r.centroid, (3.0, 3.0));
    }

    #[test]
    fn horizontal_line_is_fully_eccentric() {
        let g = PixelGrid::from_fn(9, 1, 1.0, |_, _| 1).unwrap();
        let r = &region_properties(&g)[0];
        assert_eq!(r.eccentricity, 1.0);
        assert_eq!(r.solidity, 1.0);
        assert!(r.touches_border);
    }

    #[test]
    fn single_pixel_conventions() {
        let g = PixelGrid::from_fn(3, 3, 1.0, |x, y| u32::from(x == 1 && y == 1)).unwrap();
        let r = &region_properties(&g)[0];
        assert_eq!(r.eccentricity, 0.0);
        assert_eq!(r.solidity, 1.0);
    }

    #[test]
    fn l_pentomino_solidity() {
        let r = &region_properties(&l_pentomino())[0];
        assert_eq!(r.pixel_count, 5);
        assert_eq!(r.hull_area_px, 7.0);
        assert!((r.solidity - 5.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn hull_area_examples() {
        assert_eq!(convex_hull_area(&[(3, 4)]).unwrap(), 1.0);
        let rect: Vec<_> = (0..2).flat_map(|x| (0..3).map(move |y| (x, y))).collect();
        assert_eq!(convex_hull_area(&rect).unwrap(), 6.0);
        let l = [(0, 0), (0, 1), (0, 2), (1, 2), (2, 2)];
        assert_eq!(convex_hull_area(&l).unwrap(), 7.0);
        assert_eq!(brute_force_hull_area(&l), 7.0);
        assert!(matches!(convex_hull_area(&[]), Err(Error::EmptyRegion)));
    }

    #[test]
    fn grid_validation() {
        assert!(PixelGrid::new(0, 3, 1.0, vec![]).is_err());
        assert!(PixelGrid::new(2, 2, 0.0, vec![0; 4]).is_err());
        assert!(PixelGrid::new(2, 2, 1.0, vec![0; 3]).is_err());
    }

    fn arb_mask() -> impl Strategy<Value = PixelGrid> {
        (2usize..14, 2usize..14).prop_flat_map(|(w, h)| {
            proptest::collection::vec(prop::bool::weighted(0.45), w * h).prop_map(move |bits| {
                PixelGrid::new(w, h, 0.5, bits.into_iter().map(u32::from).collect()).unwrap()
            })
        })
    }

    fn shape_multiset(g: &PixelGrid) -> Vec<(usize, i64, i64)> {
        let mut v: Vec<_> = region_properties(&label_components(g))
            .iter()
            .map(|r| {
                (
                    r.pixel_count,
                    (r.eccentricity * 1e9).round() as i64,
                    (r.solidity * 1e9).round() as i64,
                )
            })
            .collect();
        v.sort_unstable();
        v
    }

    proptest! {
        #[test]
        fn hull_matches_brute_force(mask in arb_mask()) {
            let labeled = label_components(&mask);
            for r in region_properties(&labeled) {
                let pixels: Vec<(i64, i64)> = (0..labeled.height())
                    .flat_map(|y| (0..labeled.width()).map(move |x| (x, y)))
                    .filter(|&(x, y)| labeled.get(x, y) == r.id)
                    .map(|(x, y)| (x as i64, y as i64))
                    .collect();
                let oracle = brute_force_hull_area(&pixels);
                prop_assert_eq!(r.hull_area_px, oracle);
                prop_assert!(r.solidity <= 1.0 && r.solidity > 0.0);
                prop_assert_eq!(r.solidity == 1.0, oracle == r.pixel_count as f64);
                prop_assert!((0.0..=1.0).contains(&r.eccentricity));
            }
        }

        #[test]
        fn rotation_preserves_shape_measures(mask in arb_mask()) {
            let a = region_properties(&label_components(&mask));
            let b = region_properties(&label_components(&mask.rotate90()));
            let key = |r: &NucleusRegion| (r.pixel_count, r.hull_area_px as i64);
            let mut a = a; let mut b = b;
            a.sort_by(|p, q| key(p).cmp(&key(q)).then(p.eccentricity.total_cmp(&q.eccentricity)));
            b.sort_by(|p, q| key(p).cmp(&key(q)).then(p.eccentricity.total_cmp(&q.eccentricity)));
            prop_assert_eq!(a.len(), b.len());
            for (p, q) in a.iter().zip(&b) {
                prop_assert_eq!(p.pixel_count, q.pixel_count);
                prop_assert!((p.eccentricity - q.eccentricity).abs() < 1e-9);
                prop_assert!((p.solidity - q.solidity).abs() < 1e-9);
            }
        }

        #[test]
        fn relabeling_preserves_multiset(mask in arb_mask(), offset in 1u32..50) {
            let labeled = label_components(&mask);
            let n = labeled.max_label();
            // reverse the id order and spread ids out
            let permuted = PixelGrid::new(
                labeled.width(), labeled.height(), labeled.mpp(),
                labeled.labels().iter().map(|&l| if l == 0 { 0 } else { (n - l + 1) * offset }).collect(),
            ).unwrap();
            let mut a: Vec<_> = region_properties(&labeled).iter().map(|r| (r.pixel_count, r.eccentricity.to_bits(), r.solidity.to_bits())).collect();
            let mut b: Vec<_> = region_properties(&permuted).iter().map(|r| (r.pixel_count, r.eccentricity.to_bits(), r.solidity.to_bits())).collect();
            a.sort_unstable(); b.sort_unstable();
            prop_assert_eq!(a, b);
            prop_assert_eq!(shape_multiset(&mask), shape_multiset(&permuted.to_binary()));
        }

        #[test]
        fn area_scales_with_mpp_squared(mask in arb_mask()) {
            let labeled = label_components(&mask);
            let doubled = labeled.with_mpp(labeled.mpp() * 2.0).unwrap();
            for (a, b) in region_properties(&labeled).iter().zip(region_properties(&doubled).iter()) {
                prop_assert_eq!(b.area_um2, 4.0 * a.area_um2);
            }
        }

        #[test]
        fn components_are_dense_and_maximal(mask in arb_mask()) {
            let labeled = label_components(&mask);
            let n = labeled.max_label();
            let mut seen = vec![false; n as usize + 1];
            for y in 0..labeled.height() {
                for x in 0..labeled.width() {
                    let l = labeled.get(x, y);
                    prop_assert_eq!(l == 0, mask.get(x, y) == 0);
                    seen[l as usize] = true;
                    // no 8-neighbour carries a different nonzero label
                    for (dx, dy) in NEIGHBORS_8 {
                        let (nx, ny) = (x as isize + dx, y as isize + dy);
                        if nx >= 0 && ny >= 0 && (nx as usize) < labeled.width() && (ny as usize) < labeled.height() {
                            let m = labeled.get(nx as usize, ny as usize);
                            prop_assert!(l == 0 || m == 0 || m == l);
                        }
                    }
                }
            }
            prop_assert!(seen.iter().skip(1).all(|&s| s));
        }
    }
}
