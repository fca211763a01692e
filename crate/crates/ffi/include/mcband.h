#ifndef MCBAND_H
#define MCBAND_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum McbStatus {
  MCB_STATUS_OK = 0,
  MCB_STATUS_INVALID_ARGUMENT = 1,
  MCB_STATUS_INSUFFICIENT_DATA = 2,
  MCB_STATUS_SINGULAR_DESIGN = 3,
  MCB_STATUS_NULL_POINTER = 4,
  MCB_STATUS_BUFFER_TOO_SMALL = 5,
  MCB_STATUS_FIT_FAILED = 6,
  MCB_STATUS_PANIC = 7,
} McbStatus;

typedef enum McbModelKind {
  MCB_MODEL_KIND_LINEAR = 0,
  MCB_MODEL_KIND_FOREST = 1,
} McbModelKind;

/**
 * Opaque dataset handle.
 */
typedef struct McbDataset McbDataset;

/**
 * Opaque handle to a finished study and its band curve.
 */
typedef struct McbStudy McbStudy;

typedef struct McbGenConfig {
  double intercept;
  double slope;
  double x_low;
  double x_high;
  double noise_sigma;
  size_t n_samples;
  uint64_t seed;
} McbGenConfig;

typedef struct McbLinearFit {
  double a;
  double b;
  double sigma_a;
  double sigma_b;
  double s;
  size_t n;
  double x_mean;
  double sxx;
} McbLinearFit;

typedef struct McbQuartileBand {
  double q1;
  double median;
  double q3;
  double iqr;
  double low;
  double high;
} McbQuartileBand;

typedef struct McbForestConfig {
  size_t n_trees;
  /**
   * Negative for unlimited depth.
   */
  int64_t max_depth;
  size_t min_samples_leaf;
  size_t min_samples_split;
  bool bootstrap;
  uint64_t seed;
} McbForestConfig;

typedef struct McbStudyConfig {
  /**
   * `gen.seed` is the master seed.
   */
  struct McbGenConfig gen;
  enum McbModelKind model;
  struct McbForestConfig forest;
  double grid_low;
  double grid_high;
  size_t grid_points;
  size_t replications;
  /**
   * Holdout fraction; zero or negative disables the split.
   */
  double test_fraction;
  /**
   * Worker cap; zero uses the default pool.
   */
  size_t threads;
} McbStudyConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *mcb_last_error_message(void);

uint64_t mcb_derive_seed(uint64_t master, uint64_t index);

struct McbGenConfig mcb_gen_config_default(void);

enum McbStatus mcb_dataset_generate(const struct McbGenConfig *config, struct McbDataset **out);

enum McbStatus mcb_dataset_new(const double *xs,
                               const double *ys,
                               size_t len,
                               struct McbDataset **out);

size_t mcb_dataset_len(const struct McbDataset *data);

enum McbStatus mcb_dataset_copy(const struct McbDataset *data,
                                double *xs_out,
                                double *ys_out,
                                size_t capacity);

void mcb_dataset_free(struct McbDataset *data);

enum McbStatus mcb_ols_fit(const struct McbDataset *data, struct McbLinearFit *out);

/**
 * Analytical band at `xs`; `observation != 0` selects the new-observation band.
 */
enum McbStatus mcb_ols_prediction_band(const struct McbLinearFit *fit,
                                       const double *xs,
                                       size_t len,
                                       double level,
                                       bool observation,
                                       double *lower_out,
                                       double *upper_out);

enum McbStatus mcb_quantile(const double *values, size_t len, double p, double *out);

enum McbStatus mcb_quartile_band(const double *values, size_t len, struct McbQuartileBand *out);

struct McbStudyConfig mcb_study_config_default(void);

enum McbStatus mcb_study_run(const struct McbStudyConfig *config, struct McbStudy **out);

size_t mcb_study_rows(const struct McbStudy *study);

size_t mcb_study_cols(const struct McbStudy *study);

/**
 * Number of recorded slope/intercept pairs (zero for forest studies).
 */
size_t mcb_study_coefficient_count(const struct McbStudy *study);

enum McbStatus mcb_study_copy_grid(const struct McbStudy *study, double *out, size_t capacity);

/**
 * Row-major `rows x cols` predictions.
 */
enum McbStatus mcb_study_copy_matrix(const struct McbStudy *study, double *out, size_t capacity);

enum McbStatus mcb_study_copy_slopes(const struct McbStudy *study, double *out, size_t capacity);

enum McbStatus mcb_study_copy_intercepts(const struct McbStudy *study,
                                         double *out,
                                         size_t capacity);

/**
 * One band per grid point.
 */
enum McbStatus mcb_study_copy_band(const struct McbStudy *study,
                                   struct McbQuartileBand *out,
                                   size_t capacity);

enum McbStatus mcb_study_band_slope(const struct McbStudy *study, double *out);

void mcb_study_free(struct McbStudy *study);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MCBAND_H */
