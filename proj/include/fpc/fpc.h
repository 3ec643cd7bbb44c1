/* C interface to the finite-population cluster variance library. */
#ifndef FPC_FPC_H
#define FPC_FPC_H

#include <stddef.h>
#include <stdint.h>

#if defined(FPC_BUILDING_LIBRARY)
#define FPC_API __attribute__((visibility("default")))
#else
#define FPC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct fpc_dataset fpc_dataset;
typedef struct fpc_report fpc_report;
typedef struct fpc_summary fpc_summary;

typedef enum fpc_status {
  FPC_OK = 0,
  FPC_ERR_INPUT = 1,
  FPC_ERR_SINGULAR_DESIGN = 2,
  FPC_ERR_SINGULAR_HESSIAN = 3,
  FPC_ERR_SINGULAR_ATTRIBUTES = 4,
  FPC_ERR_SEPARATION = 5,
  FPC_ERR_NONCONVERGENCE = 6,
  FPC_ERR_DEGENERATE_DESIGN = 7,
  FPC_ERR_METADATA_REQUIRED = 8,
  FPC_ERR_SIZE_CAP = 9,
  FPC_ERR_EMPTY_SAMPLE = 10,
  FPC_ERR_STUDY_FAILED = 11,
  FPC_ERR_INTERNAL = 99
} fpc_status;

typedef enum fpc_model {
  FPC_MODEL_OLS = 0,
  FPC_MODEL_PROBIT = 1,
  FPC_MODEL_DIFF_IN_MEANS = 2,
  FPC_MODEL_ONE_WAY_FE = 3,
  FPC_MODEL_TWO_WAY_FE = 4
} fpc_model;

typedef enum fpc_family {
  FPC_FAMILY_EHW = 0,
  FPC_FAMILY_LZ_G = 1,
  FPC_FAMILY_LZ_H = 2,
  FPC_FAMILY_CGM = 3,
  FPC_FAMILY_CGM2 = 4,
  FPC_FAMILY_ADJ_ONEWAY_G = 5,
  FPC_FAMILY_ADJ_ONEWAY_H = 6,
  FPC_FAMILY_ADJ_TWOWAY = 7,
  FPC_FAMILY_ADJ_CGM = 8
} fpc_family;

/* Message of the last failure on the calling thread. */
FPC_API const char* fpc_last_error(void);
FPC_API const char* fpc_status_string(fpc_status status);
FPC_API const char* fpc_version(void);

/* Column names for CSV ingestion. `cluster_h` may be NULL (one-way data);
   `attrs` are the fixed attributes used by the adjusted families. */
typedef struct fpc_columns {
  const char* y;
  const char* const* x;
  size_t n_x;
  const char* const* z;
  size_t n_z;
  const char* cluster_g;
  const char* cluster_h;
  const char* const* attrs;
  size_t n_attrs;
} fpc_columns;

FPC_API fpc_status fpc_dataset_read_csv(const char* path, const fpc_columns* columns,
                                        fpc_dataset** out);

/* Row-major n x n_x, n x n_z and n x n_attrs blocks; h may be NULL. */
FPC_API fpc_status fpc_dataset_from_arrays(size_t n, const double* y,
                                           const double* x, size_t n_x,
                                           const double* z, size_t n_z,
                                           const double* attrs, size_t n_attrs,
                                           const int64_t* g, const int64_t* h,
                                           fpc_dataset** out);

/* Population size and cluster totals; zero leaves the observed count. */
FPC_API fpc_status fpc_dataset_set_population(fpc_dataset* data, int64_t population_size,
                                              int64_t total_g, int64_t total_h);
FPC_API size_t fpc_dataset_rows(const fpc_dataset* data);
FPC_API void fpc_dataset_free(fpc_dataset* data);

typedef struct fpc_estimate_options {
  fpc_model model;
  int intercept;            /* OLS/probit: prepend a constant (default 1) */
  const fpc_family* families;
  size_t n_families;
  int oneway_case;          /* 1-4, default 2 */
  int twoway_case;          /* 1-2, default 2 */
  int ape;                  /* probit: add APE rows for the first x column */
  int ape_treated_only;
  double level;             /* two-sided confidence level, default 0.95 */
  int small_sample;         /* G/(G-1) (N-1)/(N-k) multiplier, default 0 */
  int strict_projection;    /* error instead of dropping collinear attributes */
  int attrs_intercept;      /* prepend a constant to the attributes (default 1) */
} fpc_estimate_options;

FPC_API void fpc_estimate_options_init(fpc_estimate_options* options);
FPC_API fpc_status fpc_estimate(const fpc_dataset* data,
                                const fpc_estimate_options* options,
                                fpc_report** out);

/* Strings stay valid until the owning report is freed. */
typedef struct fpc_report_row {
  const char* target;
  const char* family;
  double estimate;
  double se;
  double dof;
  double critical_value;
  double ci_lower;
  double ci_upper;
  const char* flags;
} fpc_report_row;

FPC_API size_t fpc_report_rows(const fpc_report* report);
FPC_API fpc_status fpc_report_row_at(const fpc_report* report, size_t i,
                                     fpc_report_row* out);
/* format: "csv" or "json"; path "-" writes to standard output */
FPC_API fpc_status fpc_report_write(const fpc_report* report, const char* path,
                                    const char* format);
FPC_API void fpc_report_free(fpc_report* report);

FPC_API fpc_status fpc_simulate(const char* design, uint64_t reps, uint64_t seed,
                                int workers, double level, fpc_summary** out);
FPC_API fpc_status fpc_simulate_range(const char* design, uint64_t first,
                                      uint64_t count, uint64_t seed, int workers,
                                      double level, fpc_summary** out);

typedef struct fpc_summary_row {
  const char* target;
  const char* family;
  double truth;
  double mean_se;
  double coverage;
  double sd;
  uint64_t reps;
  uint64_t nan_se;
} fpc_summary_row;

FPC_API size_t fpc_summary_rows(const fpc_summary* summary);
FPC_API fpc_status fpc_summary_row_at(const fpc_summary* summary, size_t i,
                                      fpc_summary_row* out);
FPC_API uint64_t fpc_summary_failed_reps(const fpc_summary* summary);
FPC_API int fpc_summary_sd_undefined(const fpc_summary* summary);
FPC_API fpc_status fpc_summary_write(const fpc_summary* summary, const char* path,
                                     const char* format);
FPC_API void fpc_summary_free(fpc_summary* summary);

#ifdef __cplusplus
}
#endif

#endif
