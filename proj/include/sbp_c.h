#ifndef SBP_C_H
#define SBP_C_H

/* C interface to the slender-body perfusion solver.
 *
 * All objects are opaque handles created and released through this API.
 * Every function returns an sbp_status; on failure a description of the most
 * recent error on the calling thread is available from sbp_last_error(). */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SBP_API __declspec(dllexport)
#else
#define SBP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sbp_status {
  SBP_OK = 0,
  SBP_ERR_ARGUMENT = 1,   /* malformed input or bad call */
  SBP_ERR_VALIDATION = 2, /* scene rejected by the geometry or parameter checks */
  SBP_ERR_NUMERICAL = 3,  /* quadrature or linear-solver failure */
  SBP_ERR_IO = 4,         /* file could not be read or written */
  SBP_ERR_INTERNAL = 5    /* unexpected failure */
} sbp_status;

typedef struct sbp_scene sbp_scene;
typedef struct sbp_solution sbp_solution;
typedef struct sbp_report sbp_report;

typedef enum sbp_run_mode {
  SBP_MODE_SOLVE = 0,
  SBP_MODE_SWEEP_EPS = 1,
  SBP_MODE_SWEEP_MESH = 2,
  SBP_MODE_SLICE = 3,
  SBP_MODE_RESIDUALS = 4,
  SBP_MODE_FIGURES = 5
} sbp_run_mode;

typedef struct sbp_run_config {
  const char* scene;        /* scene file path or "builtin:NAME"; may be NULL for figures */
  sbp_run_mode mode;
  const double* eps;        /* eps overrides (may be NULL) */
  size_t eps_count;
  const int* nodes;         /* node-count overrides (may be NULL) */
  size_t nodes_count;
  int theta_order;          /* 0 keeps the scene value */
  const char* out_dir;      /* NULL: scene output_dir or "out" */
  uint64_t seed;
} sbp_run_config;

/* Thread-local message of the last failure (empty string when none). */
SBP_API const char* sbp_last_error(void);
SBP_API const char* sbp_status_name(sbp_status status);

/* Scenes */
SBP_API sbp_status sbp_scene_load(const char* path, sbp_scene** out);
SBP_API sbp_status sbp_scene_builtin(const char* name, sbp_scene** out);
SBP_API sbp_status sbp_scene_from_json(const char* json_text, sbp_scene** out);
/* Keys: "eps", "eta", "omega", "p0", "length", "gamma", "panel_ratio". */
SBP_API sbp_status sbp_scene_set_double(sbp_scene* scene, const char* key, double value);
/* Keys: "nodes", "theta_order", "geometry_samples". */
SBP_API sbp_status sbp_scene_set_int(sbp_scene* scene, const char* key, int value);
SBP_API sbp_status sbp_scene_get_double(const sbp_scene* scene, const char* key, double* value);
/* Writes the physical-problem hash (16 hex digits plus NUL) into buf. */
SBP_API sbp_status sbp_scene_hash(const sbp_scene* scene, char* buf, size_t len);
/* Validates the scene; on rejection returns SBP_ERR_VALIDATION with the
 * failing diagnostics in sbp_last_error(). */
SBP_API sbp_status sbp_scene_validate(const sbp_scene* scene);
SBP_API void sbp_scene_free(sbp_scene* scene);

/* Solutions */
SBP_API sbp_status sbp_solve(const sbp_scene* scene, sbp_solution** out);
SBP_API sbp_status sbp_solution_size(const sbp_solution* sol, size_t* nodes);
/* Copies physical-unit columns (s, a, p, a4ps, a4ps_s); any pointer may be NULL. */
SBP_API sbp_status sbp_solution_columns(const sbp_solution* sol, double* s, double* a, double* p,
                                        double* a4ps, double* a4ps_s, size_t capacity);
/* q^SB at a physical point x[3] outside the vessel with z >= 0. */
SBP_API sbp_status sbp_solution_field(const sbp_solution* sol, const double x[3], double* q);
SBP_API sbp_status sbp_solution_condition(const sbp_solution* sol, double* estimate);
SBP_API void sbp_solution_free(sbp_solution* sol);

/* Runs */
SBP_API sbp_status sbp_run(const sbp_run_config* config, sbp_report** out);
/* JSON text of the report; valid until the report is freed. */
SBP_API const char* sbp_report_json(const sbp_report* report);
SBP_API size_t sbp_report_file_count(const sbp_report* report);
SBP_API const char* sbp_report_file(const sbp_report* report, size_t index);
SBP_API void sbp_report_free(sbp_report* report);

/* Compares two solve-report files of the same scene; the JSON summary is
 * returned as a report handle. */
SBP_API sbp_status sbp_compare_reports(const char* path_a, const char* path_b, sbp_report** out);

/* Names of the built-in scenes, NULL-terminated. */
SBP_API const char* const* sbp_builtin_scenes(void);

#ifdef __cplusplus
}
#endif

#endif /* SBP_C_H */
