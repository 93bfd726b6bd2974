//! C ABI over the nucmorph library.
//!
//! Every fallible call returns an [`NmStatus`]; on failure the message is
//! kept per thread and read with [`nm_last_error_message`]. Handles are
//! opaque and owned by the caller, who releases them with the matching
//! `*_free` function. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use nucmorph::biostats::{cox_univariate, pearson, roc_auc, Divergence, EventDef, Status, SurvivalRecord};
use nucmorph::geometry::{label_components, rasterize_annotations, region_properties, NucleusRegion, PixelGrid};
use nucmorph::io::mask::densify;
use nucmorph::io::{load_annotations, load_mask, MaskMode};
use nucmorph::morphometry::{features_from_regions, filter_regions, FilterConfig};
use nucmorph::seg_eval::dice;
use nucmorph::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed grid, polygon, dimensions, lengths or argument values.
    InvalidInput = 3,
    /// Too few observations, a single class, no events or an empty region.
    InsufficientData = 4,
    /// Constant covariate or predictor.
    Degenerate = 5,
    /// File could not be read, decoded or parsed.
    Io = 6,
    Internal = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> NmStatus {
    match e {
        Error::InvalidGrid(_)
        | Error::InvalidPolygon { .. }
        | Error::DimensionMismatch { .. }
        | Error::LengthMismatch { .. }
        | Error::InvalidArgument(_)
        | Error::PlacementFailure { .. } => NmStatus::InvalidInput,
        Error::EmptySample
        | Error::SdUndefined
        | Error::EmptyRegion
        | Error::InsufficientNuclei { .. }
        | Error::SingleClass
        | Error::NoEvents => NmStatus::InsufficientData,
        Error::DegenerateCovariate | Error::ConstantPredictor => NmStatus::Degenerate,
        Error::Schema { .. } | Error::Table { .. } | Error::Io { .. } | Error::Image { .. } => NmStatus::Io,
    }
}

fn fail(status: NmStatus, message: impl AsRef<str>) -> NmStatus {
    set_error(message.as_ref());
    status
}

impl From<Error> for NmStatus {
    fn from(e: Error) -> Self {
        fail(status_of(&e), e.to_string())
    }
}

/// Runs `f`, turning panics into [`NmStatus::Internal`].
fn guard(f: impl FnOnce() -> Result<(), NmStatus>) -> NmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            NmStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => fail(NmStatus::Internal, "internal panic"),
    }
}

fn null() -> NmStatus {
    fail(NmStatus::NullPointer, "null pointer argument")
}

unsafe fn slice<'a, T>(p: *const T, n: usize) -> Result<&'a [T], NmStatus> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null());
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn path<'a>(p: *const c_char) -> Result<&'a Path, NmStatus> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Path::new)
        .map_err(|_| fail(NmStatus::InvalidUtf8, "path is not valid UTF-8"))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), NmStatus> {
    if out.is_null() {
        return Err(null());
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn nm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

// --- grids -----------------------------------------------------------------

/// Label raster of one ROI.
pub struct NmGrid(PixelGrid);

/// Builds a grid from a row-major buffer of `width * height` values. When
/// `binary` is set, foreground is grouped into 8-connected objects;
/// otherwise each distinct nonzero value is one object.
///
/// # Safety
/// `values` must point to `width * height` readable values; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn nm_grid_new(
    width: usize,
    height: usize,
    mpp: f64,
    values: *const u32,
    binary: bool,
    out: *mut *mut NmGrid,
) -> NmStatus {
    guard(|| {
        let n = width.checked_mul(height).ok_or_else(|| fail(NmStatus::InvalidInput, "grid too large"))?;
        let mut labels = slice(values, n)?.to_vec();
        let grid = if binary {
            labels.iter_mut().for_each(|v| *v = u32::from(*v != 0));
            label_components(&PixelGrid::new(width, height, mpp, labels)?)
        } else {
            densify(&mut labels);
            PixelGrid::new(width, height, mpp, labels)?
        };
        put(out, NmGrid(grid))
    })
}

/// Loads an 8- or 16-bit PNG mask.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nm_grid_load_mask(
    path: *const c_char,
    mpp: f64,
    label_mode: bool,
    out: *mut *mut NmGrid,
) -> NmStatus {
    guard(|| {
        let mode = if label_mode { MaskMode::Label } else { MaskMode::Binary };
        let mask = load_mask(self::path(path)?, mpp, mode)?;
        put(out, NmGrid(mask.grid))
    })
}

/// Rasterizes a polygon annotation file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nm_grid_load_annotations(path: *const c_char, out: *mut *mut NmGrid) -> NmStatus {
    guard(|| {
        let doc = load_annotations(self::path(path)?)?;
        let grid = rasterize_annotations(&doc.annotations, doc.image.width, doc.image.height, doc.image.mpp)?;
        let (w, h, m) = (grid.width(), grid.height(), grid.mpp());
        let mut labels = grid.into_labels();
        densify(&mut labels);
        put(out, NmGrid(PixelGrid::new(w, h, m, labels)?))
    })
}

/// Number of objects in the grid. Returns 0 for a null handle.
///
/// # Safety
/// `grid` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nm_grid_object_count(grid: *const NmGrid) -> u32 {
    grid.as_ref().map_or(0, |g| g.0.max_label())
}

/// # Safety
/// `grid` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nm_grid_free(grid: *mut NmGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

// --- regions ---------------------------------------------------------------

/// Measured objects of one grid.
pub struct NmRegions(Vec<NucleusRegion>);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NmRegion {
    pub id: u32,
    pub pixel_count: usize,
    pub area_um2: f64,
    pub centroid_x: f64,
    pub centroid_y: f64,
    pub eccentricity: f64,
    pub solidity: f64,
    pub touches_border: bool,
}

/// # Safety
/// `grid` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nm_regions_measure(grid: *const NmGrid, out: *mut *mut NmRegions) -> NmStatus {
    guard(|| {
        let g = grid.as_ref().ok_or_else(null)?;
        put(out, NmRegions(region_properties(&g.0)))
    })
}

/// # Safety
/// `regions` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nm_regions_len(regions: *const NmRegions) -> usize {
    regions.as_ref().map_or(0, |r| r.0.len())
}

/// Copies the `index`-th region into `out`.
///
/// # Safety
/// `regions` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nm_regions_get(regions: *const NmRegions, index: usize, out: *mut NmRegion) -> NmStatus {
    guard(|| {
        let rs = regions.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let r = rs.0.get(index).ok_or_else(|| {
            fail(NmStatus::InvalidInput, format!("index {index} out of range for {} regions", rs.0.len()))
        })?;
        *out = NmRegion {
            id: r.id,
            pixel_count: r.pixel_count,
            area_um2: r.area_um2,
            centroid_x: r.centroid.0,
            centroid_y: r.centroid.1,
            eccentricity: r.eccentricity,
            solidity: r.solidity,
            touches_border: r.touches_border,
        };
        Ok(())
    })
}

/// # Safety
/// `regions` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nm_regions_free(regions: *mut NmRegions) {
    if !regions.is_null() {
        drop(Box::from_raw(regions));
    }
}

// --- features --------------------------------------------------------------

/// Named per-ROI parameters.
pub struct NmFeatures {
    names: Vec<CString>,
    values: Vec<Option<f64>>,
}

/// Measures the ROI parameters with the default thresholds, overriding the
/// minimum area and the border rule.
///
/// # Safety
/// `grid` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nm_features_compute(
    grid: *const NmGrid,
    min_area_um2: f64,
    exclude_border: bool,
    out: *mut *mut NmFeatures,
) -> NmStatus {
    guard(|| {
        let g = grid.as_ref().ok_or_else(null)?;
        let cfg = FilterConfig {
            min_area_um2,
            exclude_border_touching: exclude_border,
            ..FilterConfig::default()
        };
        cfg.validate()?;
        let kept = filter_regions(&region_properties(&g.0), &cfg);
        let params = features_from_regions(&kept, &cfg)?.parameters();
        put(
            out,
            NmFeatures {
                names: params
                    .iter()
                    .map(|p| CString::new(p.name.as_str()).expect("parameter names have no NUL"))
                    .collect(),
                values: params.iter().map(|p| p.value).collect(),
            },
        )
    })
}

/// # Safety
/// `features` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nm_features_count(features: *const NmFeatures) -> usize {
    features.as_ref().map_or(0, |f| f.names.len())
}

/// Name of the `index`-th parameter, owned by the handle; null when out of
/// range.
///
/// # Safety
/// `features` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nm_features_name(features: *const NmFeatures, index: usize) -> *const c_char {
    features
        .as_ref()
        .and_then(|f| f.names.get(index))
        .map_or(ptr::null(), |n| n.as_ptr())
}

/// Writes the `index`-th value and whether it is defined.
///
/// # Safety
/// `features` must be a live handle; `value` and `defined` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nm_features_value(
    features: *const NmFeatures,
    index: usize,
    value: *mut f64,
    defined: *mut bool,
) -> NmStatus {
    guard(|| {
        let f = features.as_ref().ok_or_else(null)?;
        if value.is_null() || defined.is_null() {
            return Err(null());
        }
        let v = f
            .values
            .get(index)
            .ok_or_else(|| fail(NmStatus::InvalidInput, format!("index {index} out of range")))?;
        *defined = v.is_some();
        *value = v.unwrap_or(f64::NAN);
        Ok(())
    })
}

/// # Safety
/// `features` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nm_features_free(features: *mut NmFeatures) {
    if !features.is_null() {
        drop(Box::from_raw(features));
    }
}

// --- statistics ------------------------------------------------------------

/// Pixel Dice between the foregrounds of two grids of the same size.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nm_dice(a: *const NmGrid, b: *const NmGrid, out: *mut f64) -> NmStatus {
    guard(|| {
        let (a, b) = (a.as_ref().ok_or_else(null)?, b.as_ref().ok_or_else(null)?);
        let d = dice(&a.0, &b.0)?;
        *out.as_mut().ok_or_else(null)? = d;
        Ok(())
    })
}

/// Area under the ROC curve; `labels` holds 1 for positive, 0 for negative.
///
/// # Safety
/// `scores` and `labels` must point to `n` readable values; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn nm_roc_auc(scores: *const f64, labels: *const u8, n: usize, out: *mut f64) -> NmStatus {
    guard(|| {
        let s = slice(scores, n)?;
        let l: Vec<bool> = slice(labels, n)?.iter().map(|&v| v != 0).collect();
        let auc = roc_auc(s, &l)?.auc;
        *out.as_mut().ok_or_else(null)? = auc;
        Ok(())
    })
}

/// Pearson correlation. `defined` is false when either input is constant.
///
/// # Safety
/// `x` and `y` must point to `n` readable values; `out` and `defined` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn nm_pearson(
    x: *const f64,
    y: *const f64,
    n: usize,
    out: *mut f64,
    defined: *mut bool,
) -> NmStatus {
    guard(|| {
        let r = pearson(slice(x, n)?, slice(y, n)?)?;
        *defined.as_mut().ok_or_else(null)? = r.is_some();
        *out.as_mut().ok_or_else(null)? = r.unwrap_or(f64::NAN);
        Ok(())
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NmCoxResult {
    /// NaN when diverged.
    pub coefficient: f64,
    pub hazard_ratio: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub p_value: f64,
    pub converged: bool,
    /// 0 for a finite fit, +1 or -1 when the likelihood keeps increasing
    /// toward +inf or -inf.
    pub diverged: i32,
    pub n_events: usize,
}

/// Univariate Cox model with Breslow ties. `events` holds 1 for an event,
/// 0 for censoring.
///
/// # Safety
/// `times`, `events` and `covariate` must point to `n` readable values;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nm_cox_univariate(
    times: *const f64,
    events: *const u8,
    covariate: *const f64,
    n: usize,
    out: *mut NmCoxResult,
) -> NmStatus {
    guard(|| {
        let (t, e, x) = (slice(times, n)?, slice(events, n)?, slice(covariate, n)?);
        let records = t
            .iter()
            .zip(e)
            .enumerate()
            .map(|(i, (&t, &e))| {
                let st = if e != 0 { Status::TumorDeath } else { Status::Censored };
                SurvivalRecord::new(i.to_string(), t, st)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let fit = cox_univariate(&records, x, EventDef::TumorDeath)?;
        let (lo, hi) = fit.ci95.unwrap_or((f64::NAN, f64::NAN));
        *out.as_mut().ok_or_else(null)? = NmCoxResult {
            coefficient: fit.coefficient.unwrap_or(f64::NAN),
            hazard_ratio: fit.hazard_ratio.unwrap_or(f64::NAN),
            ci_low: lo,
            ci_high: hi,
            p_value: fit.p_value.unwrap_or(f64::NAN),
            converged: fit.converged,
            diverged: match fit.diverged {
                None => 0,
                Some(Divergence::Positive) => 1,
                Some(Divergence::Negative) => -1,
            },
            n_events: fit.n_events,
        };
        Ok(())
    })
}
