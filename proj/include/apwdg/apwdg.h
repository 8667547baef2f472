#ifndef APWDG_APWDG_H
#define APWDG_APWDG_H

#include <stddef.h>

#if defined(APWDG_BUILDING)
#define APWDG_API __attribute__((visibility("default")))
#else
#define APWDG_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum apwdg_status {
  APWDG_OK = 0,
  APWDG_CONFIG_PARSE = 1,
  APWDG_OVERLAPPING_SPHERES = 2,
  APWDG_SPHERE_OUTSIDE_CELL = 3,
  APWDG_INVALID_INDEX = 4,
  APWDG_OUT_OF_RANGE = 5,
  APWDG_INVALID_ARGUMENT = 6,
  APWDG_GRID_TOO_COARSE = 7,
  APWDG_AT_SINGULARITY = 8,
  APWDG_QUADRATURE_UNDER_RESOLVED = 9,
  APWDG_MASS_NOT_POSITIVE_DEFINITE = 10,
  APWDG_CONVERGENCE_FAILURE = 11,
  APWDG_NOT_CONVERGED = 12,
  APWDG_ZERO_VECTOR = 13,
  APWDG_INDEX_MISMATCH = 14,
  APWDG_SYMMETRY_MISMATCH = 15,
  APWDG_IO = 16,
  APWDG_NULL_ARGUMENT = 17,
  APWDG_INTERNAL = 18
} apwdg_status;

typedef struct apwdg_problem apwdg_problem;
typedef struct apwdg_solution apwdg_solution;
typedef struct apwdg_report apwdg_report;

APWDG_API const char* apwdg_version(void);

/* Message of the last failed call on the calling thread ("" when none). */
APWDG_API const char* apwdg_last_error(void);
APWDG_API const char* apwdg_status_name(apwdg_status status);
/* Process exit code for a status: 0 ok, 2 config parse, 3 validation, 4 numerical, 1 otherwise. */
APWDG_API int apwdg_exit_code(apwdg_status status);

APWDG_API apwdg_status apwdg_set_threads(int n);

/* Overrides are "section.key=value" strings; n_overrides may be 0 with overrides NULL.
   The parsed problem is validated (sites, ranges) before it is returned. */
APWDG_API apwdg_status apwdg_problem_from_file(const char* path, const char* const* overrides, size_t n_overrides,
                                              apwdg_problem** out);
APWDG_API apwdg_status apwdg_problem_from_string(const char* text, const char* const* overrides,
                                                size_t n_overrides, apwdg_problem** out);
APWDG_API void apwdg_problem_free(apwdg_problem* problem);
APWDG_API apwdg_status apwdg_problem_dim(const apwdg_problem* problem, size_t* dim);

/* Linear eigenproblem for the configured potential; nev <= 0 uses solver.nev. */
APWDG_API apwdg_status apwdg_solve(const apwdg_problem* problem, int nev, apwdg_solution** out);
APWDG_API void apwdg_solution_free(apwdg_solution* solution);
APWDG_API size_t apwdg_solution_count(const apwdg_solution* solution);
APWDG_API size_t apwdg_solution_dim(const apwdg_solution* solution);
APWDG_API apwdg_status apwdg_solution_eigenvalue(const apwdg_solution* solution, size_t i, double* value);
APWDG_API apwdg_status apwdg_solution_residual(const apwdg_solution* solution, size_t i, double* relative);
/* Coefficients of pair i as interleaved (re, im); buffer holds 2 * dim doubles. */
APWDG_API apwdg_status apwdg_solution_vector(const apwdg_solution* solution, size_t i, double* buffer,
                                            size_t buffer_len);
/* Value of eigenfunction i at a point (inside limit on sphere surfaces). */
APWDG_API apwdg_status apwdg_solution_eval(const apwdg_solution* solution, size_t i, const double point[3],
                                          double* re, double* im);

/* Runs a subcommand (solve, converge, scf, inverse-estimate, line-plot) writing into out_dir. */
APWDG_API apwdg_status apwdg_run_command(const apwdg_problem* problem, const char* command, const char* out_dir,
                                        int dump_matrices, apwdg_report** report);
APWDG_API void apwdg_report_free(apwdg_report* report);
APWDG_API size_t apwdg_report_count(const apwdg_report* report, int kind);
/* kind 0: files written, 1: warnings, 2: summary lines. NULL when out of range. */
APWDG_API const char* apwdg_report_item(const apwdg_report* report, int kind, size_t i);

#ifdef __cplusplus
}
#endif

#endif
