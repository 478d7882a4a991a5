#ifndef KJET_KJET_H
#define KJET_KJET_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define KJET_API __declspec(dllexport)
#else
#define KJET_API __attribute__((visibility("default")))
#endif

typedef enum kjet_status {
  KJET_OK = 0,
  KJET_ERR_SYNTAX,
  KJET_ERR_COORD_OUT_OF_RANGE,
  KJET_ERR_EVAL,
  KJET_ERR_SHAPE_MISMATCH,
  KJET_ERR_INDEX_OUT_OF_RANGE,
  KJET_ERR_INVALID_CHART,
  KJET_ERR_INVALID_DOMAIN,
  KJET_ERR_SINGULAR_JACOBIAN,
  KJET_ERR_SINGULAR_METRIC,
  KJET_ERR_FINSLER_AXIOM_VIOLATION,
  KJET_ERR_PRECONDITION,
  KJET_ERR_IO,
  KJET_ERR_USAGE,
  KJET_ERR_INVALID_ARGUMENT,
  KJET_ERR_INTERNAL
} kjet_status;

typedef struct kjet_problem kjet_problem;
typedef struct kjet_options kjet_options;
typedef struct kjet_report kjet_report;
typedef struct kjet_expr kjet_expr;

KJET_API const char* kjet_version(void);
KJET_API const char* kjet_status_string(kjet_status status);
/* Message of the most recent failure on the calling thread; "" if none. */
KJET_API const char* kjet_last_error(void);

/* Problem files. */
KJET_API kjet_status kjet_problem_load(const char* path, kjet_problem** out);
KJET_API kjet_status kjet_problem_parse(const char* text, kjet_problem** out);
KJET_API kjet_status kjet_problem_set_seed(kjet_problem* problem, uint64_t seed);
KJET_API kjet_status kjet_problem_dimensions(const kjet_problem* problem, int* n, int* k);
KJET_API void kjet_problem_free(kjet_problem* problem);

/* Command options, set by name: method, iterations, kind, form, init, t0,
   t1, step, out. */
KJET_API kjet_status kjet_options_create(kjet_options** out);
KJET_API kjet_status kjet_options_set(kjet_options* options, const char* key, const char* value);
KJET_API void kjet_options_free(kjet_options* options);

/* Runs semispray, connection, sequence, integrate or verify. Returns
   KJET_ERR_USAGE for an unknown command or invalid options. Failures inside
   the computation still produce a report, whose exit code classifies them:
   0 ok, 1 usage or parse, 2 singular metric, 3 Finsler violation, 4 slit
   exit. options may be NULL. */
KJET_API kjet_status kjet_run(const kjet_problem* problem, const char* command, const kjet_options* options,
                              kjet_report** out);
KJET_API int kjet_report_exit_code(const kjet_report* report);
/* Strings owned by the report. */
KJET_API const char* kjet_report_json(const kjet_report* report);
KJET_API const char* kjet_report_table(const kjet_report* report);
KJET_API size_t kjet_report_check_count(const kjet_report* report);
/* status is "pass", "fail" or "error"; residual is NaN when absent. Any
   output pointer may be NULL. */
KJET_API kjet_status kjet_report_check(const kjet_report* report, size_t index, const char** name,
                                       const char** status, double* residual);
KJET_API void kjet_report_free(kjet_report* report);

/* Expressions over the natural coordinates x(i), y(m,i) of order k in
   dimension n. */
KJET_API kjet_status kjet_expr_parse(int n, int k, const char* text, kjet_expr** out);
KJET_API kjet_status kjet_expr_derivative(const kjet_expr* expr, int level, int index, kjet_expr** out);
/* values in natural-frame order (x, y(1), ..., y(k)), (k+1)n entries. */
KJET_API kjet_status kjet_expr_evaluate(const kjet_expr* expr, const double* values, size_t count, double* out);
/* Canonical text, owned by the handle. */
KJET_API const char* kjet_expr_string(const kjet_expr* expr);
KJET_API int kjet_expr_equal(const kjet_expr* a, const kjet_expr* b);
KJET_API void kjet_expr_free(kjet_expr* expr);

#ifdef __cplusplus
}
#endif

#endif
