/* SPDX-License-Identifier: Apache-2.0 */
/*
 * C interface to the contract-hierarchy synthesizer.
 *
 * All objects are opaque handles owned by the caller and released with the
 * matching *_free function. Functions return a hiercon_status; on failure a
 * human-readable message is available from hiercon_last_error() until the
 * next call on the same thread. Strings returned through char** are
 * heap-allocated and must be released with hiercon_string_free().
 */
#ifndef HIERCON_H
#define HIERCON_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(HIERCON_BUILDING)
#    define HIERCON_API __declspec(dllexport)
#  else
#    define HIERCON_API __declspec(dllimport)
#  endif
#else
#  define HIERCON_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values 0-3 double as CLI exit codes and are stable. */
typedef enum hiercon_status {
    HIERCON_OK = 0,
    HIERCON_INVALID = 1,       /* validation, domain, chain or feasibility failure */
    HIERCON_NOT_CONVERGED = 2, /* dual ascent ran out of iterations or stalled */
    HIERCON_IO_ERROR = 3,      /* unreadable file, malformed or schema-violating document */
    HIERCON_BAD_ARGUMENT = 4,  /* null handle, index out of range, buffer too small */
    HIERCON_INTERNAL = 5
} hiercon_status;

typedef struct hiercon_project hiercon_project;
typedef struct hiercon_solution hiercon_solution;
typedef struct hiercon_monitor hiercon_monitor;
typedef struct hiercon_sweep hiercon_sweep;

/* Inclusive arithmetic range lo, lo + step, ..., <= hi. */
typedef struct hiercon_range {
    double lo;
    double hi;
    double step;
} hiercon_range;

HIERCON_API const char *hiercon_version(void);
HIERCON_API const char *hiercon_last_error(void);
HIERCON_API const char *hiercon_status_name(hiercon_status status);
HIERCON_API void hiercon_string_free(char *s);

/* ---- project ------------------------------------------------------------ */

HIERCON_API hiercon_status hiercon_project_load(const char *path, hiercon_project **out);
HIERCON_API hiercon_status hiercon_project_parse(const char *text, size_t length, hiercon_project **out);
HIERCON_API void hiercon_project_free(hiercon_project *project);
HIERCON_API hiercon_status hiercon_project_serialize(const hiercon_project *project, char **out);

/* Overrides. hiercon_project_set_theta applies one weight to every component,
 * dropping per-component weights from the file. */
HIERCON_API hiercon_status hiercon_project_set_theta(hiercon_project *project, double theta);
HIERCON_API hiercon_status hiercon_project_set_root_threshold(hiercon_project *project, double xbar_r);
HIERCON_API hiercon_status hiercon_project_set_flexibility(hiercon_project *project, double phi);
HIERCON_API hiercon_status hiercon_project_set_alpha(hiercon_project *project, double alpha);
HIERCON_API hiercon_status hiercon_project_set_epsilon(hiercon_project *project, double epsilon);
HIERCON_API hiercon_status hiercon_project_set_max_iterations(hiercon_project *project, int max_iterations);
HIERCON_API hiercon_status hiercon_project_set_runs(hiercon_project *project, uint64_t runs);
HIERCON_API hiercon_status hiercon_project_set_seed(hiercon_project *project, uint64_t seed);

HIERCON_API double hiercon_project_root_threshold(const hiercon_project *project);
HIERCON_API uint64_t hiercon_project_runs(const hiercon_project *project);
HIERCON_API uint64_t hiercon_project_seed(const hiercon_project *project);

/* ---- check: validation, chain discovery, feasibility -------------------- */

/* Writes a line-oriented report ("key: value") to *report even on
 * HIERCON_INVALID. *report may be NULL if the caller does not want it. */
HIERCON_API hiercon_status hiercon_check(const hiercon_project *project, char **report);

/* "CP -> BS -> EC" */
HIERCON_API hiercon_status hiercon_chain(const hiercon_project *project, char **out);

/* ---- refine ------------------------------------------------------------- */

/* On HIERCON_NOT_CONVERGED *out still receives the partial solution. */
HIERCON_API hiercon_status hiercon_refine(const hiercon_project *project, hiercon_solution **out);
HIERCON_API void hiercon_solution_free(hiercon_solution *solution);
HIERCON_API size_t hiercon_solution_size(const hiercon_solution *solution);
HIERCON_API hiercon_status hiercon_solution_threshold(const hiercon_solution *solution, size_t index, double *out);
HIERCON_API hiercon_status hiercon_solution_component(const hiercon_solution *solution, size_t index,
                                                      const char **out);
HIERCON_API double hiercon_solution_multiplier(const hiercon_solution *solution);
HIERCON_API double hiercon_solution_objective(const hiercon_solution *solution);
HIERCON_API int hiercon_solution_iterations(const hiercon_solution *solution);
HIERCON_API int hiercon_solution_converged(const hiercon_solution *solution);
/* 1 valid, 0 invalid, -1 no verdict (not converged). */
HIERCON_API int hiercon_solution_valid(const hiercon_solution *solution);
HIERCON_API hiercon_status hiercon_solution_report(const hiercon_solution *solution, char **out);

/* ---- simulate ----------------------------------------------------------- */

/* Accepts a JSON array, a refine report, or its machine-readable section.
 * *count receives the number of thresholds even when capacity is too small. */
HIERCON_API hiercon_status hiercon_parse_thresholds(const char *text, size_t length, double *out, size_t capacity,
                                                    size_t *count);

/* Thresholds in chain order; runs and seed come from the project. */
HIERCON_API hiercon_status hiercon_simulate(const hiercon_project *project, const double *thresholds, size_t count,
                                            hiercon_monitor **out);
HIERCON_API void hiercon_monitor_free(hiercon_monitor *monitor);
HIERCON_API size_t hiercon_monitor_size(const hiercon_monitor *monitor);
HIERCON_API hiercon_status hiercon_monitor_far(const hiercon_monitor *monitor, size_t index, double *out);
HIERCON_API double hiercon_monitor_root_far(const hiercon_monitor *monitor);
HIERCON_API double hiercon_monitor_flex_rate(const hiercon_monitor *monitor);
HIERCON_API uint64_t hiercon_monitor_runs(const hiercon_monitor *monitor);
/* Whether the simulated thresholds form a valid hierarchy (sum + phi <= xbar_r). */
HIERCON_API int hiercon_monitor_hierarchy_valid(const hiercon_monitor *monitor);
/* Runs with a root violation but no component violation. */
HIERCON_API uint64_t hiercon_monitor_uncovered_root_violations(const hiercon_monitor *monitor);
HIERCON_API hiercon_status hiercon_monitor_csv(const hiercon_monitor *monitor, char **out);

/* ---- sweep -------------------------------------------------------------- */

HIERCON_API hiercon_status hiercon_sweep_run(const hiercon_project *project, hiercon_range theta,
                                             hiercon_range root_threshold, hiercon_sweep **out);
HIERCON_API void hiercon_sweep_free(hiercon_sweep *sweep);
HIERCON_API size_t hiercon_sweep_rows(const hiercon_sweep *sweep);
HIERCON_API size_t hiercon_sweep_columns(const hiercon_sweep *sweep);
HIERCON_API hiercon_status hiercon_sweep_csv(const hiercon_sweep *sweep, char **out);
/* For root-threshold column `column`: smallest theta with zero multiplier
 * (NaN if none) and the analytic bound. */
HIERCON_API hiercon_status hiercon_sweep_boundary(const hiercon_sweep *sweep, size_t column, double *xbar_r,
                                                  double *observed, double *predicted);

#ifdef __cplusplus
}
#endif

#endif /* HIERCON_H */
