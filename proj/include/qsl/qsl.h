/* C interface to the qudit speed-limit toolkit. All functions are thread-safe
 * with respect to distinct handles; the last-error message is per thread. */
#ifndef QSL_QSL_H
#define QSL_QSL_H

#include <stddef.h>
#include <stdint.h>

#if defined(QSL_BUILDING_LIBRARY)
#define QSL_API __attribute__((visibility("default")))
#else
#define QSL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qsl_status {
  QSL_OK = 0,
  QSL_ERR_IO = 1,
  QSL_ERR_CONFIG = 2,
  QSL_ERR_NUMERICAL = 3,
  QSL_ERR_INVALID_ARGUMENT = 4,
  QSL_ERR_INTERNAL = 5
} qsl_status;

typedef enum qsl_darkening {
  QSL_DARKEN_COMPUTATIONAL = 0, /* |00> <-> |01> */
  QSL_DARKEN_LEAKAGE = 1        /* |11> <-> |21> */
} qsl_darkening;

typedef struct qsl_config qsl_config;
typedef struct qsl_report qsl_report;

QSL_API const char* qsl_version(void);
/* Message for the most recent failure on this thread; "" if none. */
QSL_API const char* qsl_last_error(void);

QSL_API qsl_status qsl_config_from_file(const char* path, qsl_config** out);
QSL_API qsl_status qsl_config_from_json(const char* text, qsl_config** out);
/* Names: fig1a, fig2a, fig4, fig5, fig6, each also with a "-desk" suffix. */
QSL_API qsl_status qsl_config_from_preset(const char* name, qsl_config** out);
QSL_API void qsl_config_free(qsl_config* config);

QSL_API qsl_status qsl_config_set_seed(qsl_config* config, uint64_t seed);
QSL_API qsl_status qsl_config_set_workers(qsl_config* config, int workers);
QSL_API qsl_status qsl_config_set_output_dir(qsl_config* config, const char* dir);
QSL_API qsl_status qsl_config_apply_desk_scale(qsl_config* config);
/* Output directory from the config; owned by the handle. */
QSL_API const char* qsl_config_output_dir(const qsl_config* config);
/* Canonical JSON; owned by the handle, valid until the next call on it. */
QSL_API const char* qsl_config_json(qsl_config* config);

/* out_dir may be NULL to use the config's output directory. */
QSL_API qsl_status qsl_run_grape_sweep(const qsl_config* config, const char* out_dir, qsl_report** out);
QSL_API qsl_status qsl_run_crsd_scan(const qsl_config* config, const char* out_dir, qsl_report** out);
/* Filters are n_filters (low, high) pairs; NaN marks an open edge. With
 * n_filters == 0 a default set is used. */
QSL_API qsl_status qsl_analyze(const char* pulse_path, const char* out_dir, const double* cuts,
                               size_t n_filters, qsl_report** out);

QSL_API size_t qsl_report_points(const qsl_report* report);
QSL_API qsl_status qsl_report_point(const qsl_report* report, size_t index, double* x, double* y);
QSL_API size_t qsl_report_files(const qsl_report* report);
QSL_API const char* qsl_report_file(const qsl_report* report, size_t index);
QSL_API void qsl_report_free(qsl_report* report);

/* Darkening ratio eps2/eps1 for the reference system with the given level
 * count and state-2 anharmonicity. */
QSL_API qsl_status qsl_darkening_ratio(int levels, double eta2, qsl_darkening mode, double* out);

#ifdef __cplusplus
}
#endif

#endif /* QSL_QSL_H */
