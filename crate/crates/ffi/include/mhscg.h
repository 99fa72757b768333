#ifndef MHSCG_H
#define MHSCG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MhscgStatus {
  MHSCG_STATUS_OK = 0,
  MHSCG_STATUS_NULL_POINTER = 1,
  MHSCG_STATUS_INVALID_ARGUMENT = 2,
  MHSCG_STATUS_IO = 3,
  MHSCG_STATUS_PARSE = 4,
  MHSCG_STATUS_NUMERICAL = 5,
  MHSCG_STATUS_PANIC = 6,
} MhscgStatus;

typedef enum MhscgMethod {
  MHSCG_METHOD_MHSCG = 0,
  MHSCG_METHOD_HSC = 1,
} MhscgMethod;

typedef enum MhscgRepeatScope {
  MHSCG_REPEAT_SCOPE_KMEANS = 0,
  MHSCG_REPEAT_SCOPE_PIPELINE = 1,
} MhscgRepeatScope;

// Opaque dataset under construction or loaded from disk.
typedef struct MhscgDataset MhscgDataset;

// Opaque outcome of `mhscg_cluster`.
typedef struct MhscgResult MhscgResult;

// Run options; start from `mhscg_options_default()`. `method` and
// `repeat_scope` hold `MhscgMethod` / `MhscgRepeatScope` values.
typedef struct MhscgOptions {
  uint32_t method;
  size_t sigma;
  // Optional per-view σ array of length `n_view_sigma`; NULL uses `sigma` for every view.
  const size_t *view_sigma;
  size_t n_view_sigma;
  double lambda0;
  size_t max_outer;
  double epsilon;
  double obj_tol;
  size_t kmeans_restarts;
  size_t repeats;
  uint32_t repeat_scope;
  uint64_t seed;
  bool minmax;
} MhscgOptions;

typedef struct MhscgSummary {
  double mean;
  double std;
} MhscgSummary;

typedef struct MhscgMetrics {
  struct MhscgSummary acc;
  struct MhscgSummary nmi;
  struct MhscgSummary fscore;
  struct MhscgSummary ari;
  size_t runs;
} MhscgMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer
// stays valid until the next API call on the same thread.
const char *mhscg_last_error(void);

// Library version as a static NUL-terminated string.
const char *mhscg_version(void);

struct MhscgOptions mhscg_options_default(void);

// Loads a dataset from a JSON manifest.
//
// # Safety
// `manifest_path` must be a NUL-terminated string; `out` must be writable.
enum MhscgStatus mhscg_dataset_load(const char *manifest_path, struct MhscgDataset **out);

// Gaussian-blob multi-view dataset with `n_views` views of `dims[l]` features.
//
// # Safety
// `dims` must point to `n_views` values; `out` must be writable.
enum MhscgStatus mhscg_dataset_synth(size_t n_per_cluster,
                                     size_t k,
                                     const size_t *dims,
                                     size_t n_views,
                                     double noise_std,
                                     uint64_t seed,
                                     struct MhscgDataset **out);

// Empty dataset with `k` clusters; add views with `mhscg_dataset_add_view`.
//
// # Safety
// `out` must be writable.
enum MhscgStatus mhscg_dataset_new(size_t k, struct MhscgDataset **out);

// Appends a view given as a row-major `n_rows × n_cols` array.
//
// # Safety
// `ds` must come from this library; `data` must hold `n_rows * n_cols` doubles.
enum MhscgStatus mhscg_dataset_add_view(struct MhscgDataset *ds,
                                        const double *data,
                                        size_t n_rows,
                                        size_t n_cols);

// Sets 0-based ground-truth labels.
//
// # Safety
// `ds` must come from this library; `labels` must hold `n` values.
enum MhscgStatus mhscg_dataset_set_labels(struct MhscgDataset *ds, const size_t *labels, size_t n);

// # Safety
// `ds` must come from this library; `out` must be writable.
enum MhscgStatus mhscg_dataset_n_samples(const struct MhscgDataset *ds, size_t *out);

// # Safety
// `ds` must come from this library; `out` must be writable.
enum MhscgStatus mhscg_dataset_n_views(const struct MhscgDataset *ds, size_t *out);

// # Safety
// `ds` must come from this library and not be used afterwards. NULL is a no-op.
void mhscg_dataset_free(struct MhscgDataset *ds);

// Clusters `ds` with `opts` (NULL for defaults).
//
// # Safety
// `ds` must come from this library; `opts` may be NULL, and a non-null
// `opts->view_sigma` must hold `opts->n_view_sigma` values; `out` must be writable.
enum MhscgStatus mhscg_cluster(const struct MhscgDataset *ds,
                               const struct MhscgOptions *opts,
                               struct MhscgResult **out);

// Copies the labels of the first repeat into `labels` (capacity `len`,
// at least the sample count).
//
// # Safety
// `res` must come from this library; `labels` must hold `len` values.
enum MhscgStatus mhscg_result_labels(const struct MhscgResult *res, size_t *labels, size_t len);

// # Safety
// `res` must come from this library; `out` must be writable.
enum MhscgStatus mhscg_result_n_samples(const struct MhscgResult *res, size_t *out);

// Outer iterations of the first repeat (0 for the HSC baseline).
//
// # Safety
// `res` must come from this library; `out` must be writable.
enum MhscgStatus mhscg_result_iterations(const struct MhscgResult *res, size_t *out);

// Metrics over all repeats; fails when the dataset had no labels.
//
// # Safety
// `res` must come from this library; `out` must be writable.
enum MhscgStatus mhscg_result_metrics(const struct MhscgResult *res, struct MhscgMetrics *out);

// # Safety
// `res` must come from this library and not be used afterwards. NULL is a no-op.
void mhscg_result_free(struct MhscgResult *res);

// ACC, NMI, F-score and ARI of one prediction (std fields are 0).
//
// # Safety
// `pred` and `truth` must hold `n` values; `out` must be writable.
enum MhscgStatus mhscg_metrics(const size_t *pred,
                               const size_t *truth,
                               size_t n,
                               struct MhscgMetrics *out);

// Nemenyi critical difference for `n_algorithms` compared over `n_datasets`.
double mhscg_nemenyi_cd(size_t n_algorithms, size_t n_datasets, double q_alpha);

// Iman-Davenport statistic from a Friedman χ².
//
// # Safety
// `out` must be writable.
enum MhscgStatus mhscg_iman_davenport(double chi2,
                                      size_t n_datasets,
                                      size_t n_algorithms,
                                      double *out);

// Friedman χ² and Iman-Davenport F_F from a row-major `n_datasets ×
// n_algorithms` score table. `ff` is NaN when complete rank agreement
// leaves F_F undefined. Either output pointer may be NULL.
//
// # Safety
// `scores` must hold `n_datasets * n_algorithms` doubles.
enum MhscgStatus mhscg_friedman(const double *scores,
                                size_t n_datasets,
                                size_t n_algorithms,
                                bool higher_is_better,
                                double *chi2,
                                double *ff);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MHSCG_H */
