#ifndef METRIKOS_H
#define METRIKOS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MK_API __declspec(dllexport)
#else
#define MK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values match metrikos::ErrorCode. */
typedef enum mk_status {
  MK_OK = 0,
  MK_ERR_INVALID_INPUT = 1,
  MK_ERR_INFEASIBLE = 2,
  MK_ERR_NO_CONVERGENCE = 3,
  MK_ERR_DEGENERATE = 4,
  MK_ERR_DIVISION_BY_ZERO = 5,
  MK_ERR_EVALUATION_FAILURE = 6,
  MK_ERR_EMPTY_LOCUS = 7,
  MK_ERR_PARSE = 8,
  MK_ERR_IO = 9,
  MK_ERR_INTERNAL = 10
} mk_status;

typedef enum mk_format { MK_FORMAT_CSV = 0, MK_FORMAT_JSON = 1 } mk_format;

typedef struct mk_system mk_system;
typedef struct mk_report mk_report;

typedef struct mk_options {
  int has_seed;
  uint64_t seed;
  int has_tol;
  double tol;
  const char* out_dir; /* NULL or "": no files */
  mk_format format;
  unsigned threads; /* 0: METRIKOS_THREADS or hardware concurrency */
} mk_options;

/* Message of the last failure on the calling thread; "" after success. */
MK_API const char* mk_last_error(void);
MK_API const char* mk_status_name(mk_status status);
/* CLI exit code for a failure status: 2 input error, 3 runtime error. */
MK_API int mk_exit_code_for(mk_status status);
MK_API void mk_options_init(mk_options* opts);

/* Systems. The config text is a scenario document; only its space,
   coordinatizing points and base point are used. */
MK_API mk_status mk_system_from_config(const char* config_text, mk_system** out);
MK_API mk_status mk_system_hilbert(size_t n, mk_system** out);
MK_API void mk_system_free(mk_system* sys);
MK_API size_t mk_system_size(const mk_system* sys);
MK_API size_t mk_system_point_size(const mk_system* sys);
MK_API const char* mk_system_name(const mk_system* sys, size_t index);

/* Point arrays have mk_system_point_size values, coordinate arrays
   mk_system_size values. */
MK_API mk_status mk_coords_of(const mk_system* sys, const double* point, double* coords_out);
MK_API mk_status mk_d_C(const mk_system* sys, const double* x, const double* y, double* out);
MK_API mk_status mk_embed(const mk_system* sys, const double* point, double* out);
/* feasible_out is 1 or 0; violations_out (optional) counts failed inequalities.
   The first violation is described by mk_last_error when infeasible. */
MK_API mk_status mk_check_feasible(const mk_system* sys, const double* coords, double tol,
                                   int* feasible_out, size_t* violations_out);
MK_API mk_status mk_multilaterate(const mk_system* sys, const double* coords, const double* guess,
                                  double* point_out, double* residual_out);

/* w has n values, coords n + 1 (unit basis points e_1..e_n, then the origin). */
MK_API mk_status mk_hilbert_to_metric(const double* w, size_t n, double* coords_out);
MK_API mk_status mk_metric_to_hilbert(const double* coords, size_t n, double* w_out);

/* Samples `count` points of the locus into points_out (count * point_size
   values). i and j name coordinatizing points; j may be NULL for spheres. */
MK_API mk_status mk_locus_sample(const mk_system* sys, const char* kind, const char* i,
                                 const char* j, double param, size_t count, uint64_t seed,
                                 double* points_out);

/* Scenario execution and demos. */
MK_API mk_status mk_scenario_run_file(const char* path, const mk_options* opts, mk_report** out);
MK_API mk_status mk_scenario_run_text(const char* text, const mk_options* opts, mk_report** out);
MK_API size_t mk_demo_count(void);
MK_API const char* mk_demo_name(size_t index);
MK_API mk_status mk_demo_run(const char* name, const mk_options* opts, mk_report** out);
/* Bundled scenario JSON by file stem, or NULL. */
MK_API const char* mk_bundled_scenario(const char* stem);

MK_API void mk_report_free(mk_report* report);
/* 0 success, 1 check failure, 3 runtime error. */
MK_API int mk_report_exit_code(const mk_report* report);
/* PASS/FAIL lines. */
MK_API const char* mk_report_text(const mk_report* report);
/* Scenario report document; "" for demos. */
MK_API const char* mk_report_json(const mk_report* report);
MK_API size_t mk_report_run_count(const mk_report* report);
MK_API const char* mk_report_run_name(const mk_report* report, size_t index);
MK_API const char* mk_report_run_csv(const mk_report* report, size_t index);
MK_API size_t mk_report_check_count(const mk_report* report);
MK_API const char* mk_report_check_name(const mk_report* report, size_t index);
MK_API int mk_report_check_passed(const mk_report* report, size_t index);

/* 17 significant digits, locale independent. Returns the length written
   (excluding the terminator) or the needed length when buf is too small. */
MK_API size_t mk_format_number(double value, char* buf, size_t len);

#ifdef __cplusplus
}
#endif

#endif
