/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef NUCMORPH_H
#define NUCMORPH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NmStatus {
  NM_STATUS_OK = 0,
  NM_STATUS_NULL_POINTER = 1,
  NM_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed grid, polygon, dimensions, lengths or argument values.
   */
  NM_STATUS_INVALID_INPUT = 3,
  /**
   * Too few observations, a single class, no events or an empty region.
   */
  NM_STATUS_INSUFFICIENT_DATA = 4,
  /**
   * Constant covariate or predictor.
   */
  NM_STATUS_DEGENERATE = 5,
  /**
   * File could not be read, decoded or parsed.
   */
  NM_STATUS_IO = 6,
  NM_STATUS_INTERNAL = 7,
} NmStatus;

/**
 * Named per-ROI parameters.
 */
typedef struct NmFeatures NmFeatures;

/**
 * Label raster of one ROI.
 */
typedef struct NmGrid NmGrid;

/**
 * Measured objects of one grid.
 */
typedef struct NmRegions NmRegions;

typedef struct NmRegion {
  uint32_t id;
  size_t pixel_count;
  double area_um2;
  double centroid_x;
  double centroid_y;
  double eccentricity;
  double solidity;
  bool touches_border;
} NmRegion;

typedef struct NmCoxResult {
  /**
   * NaN when diverged.
   */
  double coefficient;
  double hazard_ratio;
  double ci_low;
  double ci_high;
  double p_value;
  bool converged;
  /**
   * 0 for a finite fit, +1 or -1 when the likelihood keeps increasing
   * toward +inf or -inf.
   */
  int32_t diverged;
  size_t n_events;
} NmCoxResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static NUL-terminated string.
 */
const char *nm_version(void);

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next call on the same thread.
 */
const char *nm_last_error_message(void);

/**
 * Builds a grid from a row-major buffer of `width * height` values. When
 * `binary` is set, foreground is grouped into 8-connected objects;
 * otherwise each distinct nonzero value is one object.
 *
 * # Safety
 * `values` must point to `width * height` readable values; `out` must be
 * writable.
 */
enum NmStatus nm_grid_new(size_t width,
                          size_t height,
                          double mpp,
                          const uint32_t *values,
                          bool binary,
                          struct NmGrid **out);

/**
 * Loads an 8- or 16-bit PNG mask.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum NmStatus nm_grid_load_mask(const char *path, double mpp, bool label_mode, struct NmGrid **out);

/**
 * Rasterizes a polygon annotation file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum NmStatus nm_grid_load_annotations(const char *path, struct NmGrid **out);

/**
 * Number of objects in the grid. Returns 0 for a null handle.
 *
 * # Safety
 * `grid` must be null or a live handle.
 */
uint32_t nm_grid_object_count(const struct NmGrid *grid);

/**
 * # Safety
 * `grid` must be null or a handle not yet freed.
 */
void nm_grid_free(struct NmGrid *grid);

/**
 * # Safety
 * `grid` must be a live handle; `out` must be writable.
 */
enum NmStatus nm_regions_measure(const struct NmGrid *grid, struct NmRegions **out);

/**
 * # Safety
 * `regions` must be null or a live handle.
 */
size_t nm_regions_len(const struct NmRegions *regions);

/**
 * Copies the `index`-th region into `out`.
 *
 * # Safety
 * `regions` must be a live handle; `out` must be writable.
 */
enum NmStatus nm_regions_get(const struct NmRegions *regions, size_t index, struct NmRegion *out);

/**
 * # Safety
 * `regions` must be null or a handle not yet freed.
 */
void nm_regions_free(struct NmRegions *regions);

/**
 * Measures the ROI parameters with the default thresholds, overriding the
 * minimum area and the border rule.
 *
 * # Safety
 * `grid` must be a live handle; `out` must be writable.
 */
enum NmStatus nm_features_compute(const struct NmGrid *grid,
                                  double min_area_um2,
                                  bool exclude_border,
                                  struct NmFeatures **out);

/**
 * # Safety
 * `features` must be null or a live handle.
 */
size_t nm_features_count(const struct NmFeatures *features);

/**
 * Name of the `index`-th parameter, owned by the handle; null when out of
 * range.
 *
 * # Safety
 * `features` must be null or a live handle.
 */
const char *nm_features_name(const struct NmFeatures *features, size_t index);

/**
 * Writes the `index`-th value and whether it is defined.
 *
 * # Safety
 * `features` must be a live handle; `value` and `defined` must be writable.
 */
enum NmStatus nm_features_value(const struct NmFeatures *features,
                                size_t index,
                                double *value,
                                bool *defined);

/**
 * # Safety
 * `features` must be null or a handle not yet freed.
 */
void nm_features_free(struct NmFeatures *features);

/**
 * Pixel Dice between the foregrounds of two grids of the same size.
 *
 * # Safety
 * `a` and `b` must be live handles; `out` must be writable.
 */
enum NmStatus nm_dice(const struct NmGrid *a, const struct NmGrid *b, double *out);

/**
 * Area under the ROC curve; `labels` holds 1 for positive, 0 for negative.
 *
 * # Safety
 * `scores` and `labels` must point to `n` readable values; `out` must be
 * writable.
 */
enum NmStatus nm_roc_auc(const double *scores, const uint8_t *labels, size_t n, double *out);

/**
 * Pearson correlation. `defined` is false when either input is constant.
 *
 * # Safety
 * `x` and `y` must point to `n` readable values; `out` and `defined` must
 * be writable.
 */
enum NmStatus nm_pearson(const double *x, const double *y, size_t n, double *out, bool *defined);

/**
 * Univariate Cox model with Breslow ties. `events` holds 1 for an event,
 * 0 for censoring.
 *
 * # Safety
 * `times`, `events` and `covariate` must point to `n` readable values;
 * `out` must be writable.
 */
enum NmStatus nm_cox_univariate(const double *times,
                                const uint8_t *events,
                                const double *covariate,
                                size_t n,
                                struct NmCoxResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NUCMORPH_H */
