#ifndef NLSEG_H
#define NLSEG_H

#include <stddef.h>

#if defined(_WIN32)
#  ifdef NLSEG_BUILDING
#    define NLSEG_API __declspec(dllexport)
#  else
#    define NLSEG_API __declspec(dllimport)
#  endif
#else
#  define NLSEG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nlseg_status {
  NLSEG_OK = 0,
  NLSEG_CHECKS_FAILED = 1, /* run finished, at least one counted check failed */
  NLSEG_ERR_INVALID_ARGUMENT = 2,
  NLSEG_ERR_CONFIG = 3,
  NLSEG_ERR_IO = 4,
  NLSEG_ERR_NOT_CONVERGED = 5,
  NLSEG_ERR_DOMAIN = 6,    /* geometry, norm or boundary data rejected */
  NLSEG_ERR_NO_ROOT = 7,
  NLSEG_ERR_INTERNAL = 8
} nlseg_status;

typedef struct nlseg_experiment nlseg_experiment;
typedef struct nlseg_radial nlseg_radial;

typedef void (*nlseg_log_fn)(const char* line, void* user);

NLSEG_API const char* nlseg_version(void);

/* Message of the last failure on the calling thread; never NULL. */
NLSEG_API const char* nlseg_last_error(void);

/* Worker threads for later calls; n <= 0 restores the default. */
NLSEG_API nlseg_status nlseg_set_threads(int n);

/* Progress lines go to fn; NULL silences them. */
NLSEG_API void nlseg_set_log(nlseg_log_fn fn, void* user);

NLSEG_API nlseg_status nlseg_experiment_load(const char* path, nlseg_experiment** out);
NLSEG_API nlseg_status nlseg_experiment_parse(const char* json_text, const char* base_dir, nlseg_experiment** out);
NLSEG_API void nlseg_experiment_free(nlseg_experiment* e);

/* Canonical JSON of the effective configuration; owned by the handle. */
NLSEG_API const char* nlseg_experiment_config_json(const nlseg_experiment* e);

/* output_dir may be NULL to use the configured directory. With strict set,
   informational checks count toward the status. The report text stays
   readable through nlseg_experiment_report until the next call. */
NLSEG_API nlseg_status nlseg_experiment_run(nlseg_experiment* e, const char* output_dir, int strict);
NLSEG_API nlseg_status nlseg_experiment_validate(nlseg_experiment* e, int strict);
NLSEG_API const char* nlseg_experiment_report(const nlseg_experiment* e);
NLSEG_API const char* nlseg_experiment_report_json(const nlseg_experiment* e);

/* Re-analyses a state directory. report_text may be NULL; otherwise it gets
   a malloc'd copy of the report that the caller releases with nlseg_free. */
NLSEG_API nlseg_status nlseg_analyze_dir(const char* dir, int strict, char** report_text);
NLSEG_API void nlseg_free(void* p);

/* Limit free-boundary radius R of the radial problem. */
NLSEG_API nlseg_status nlseg_radial_limit(double a, double b, double fa, double fb, double* R);

/* Solves the radial epsilon problem with continuation from 0.2 down to
   epsilon (halving); n_r <= 0 picks the default resolution. */
NLSEG_API nlseg_status nlseg_radial_solve(double a, double b, double fa, double fb, double epsilon, int n_r,
                                          nlseg_radial** out);
NLSEG_API size_t nlseg_radial_size(const nlseg_radial* s);
/* r, u1 and u2 arrays of nlseg_radial_size entries; any may be NULL. */
NLSEG_API nlseg_status nlseg_radial_data(const nlseg_radial* s, const double** r, const double** u1,
                                         const double** u2);
NLSEG_API nlseg_status nlseg_radial_edges(const nlseg_radial* s, double delta_rel, double* r1, double* r2);
NLSEG_API nlseg_status nlseg_radial_write_csv(const nlseg_radial* s, const char* path);
NLSEG_API void nlseg_radial_free(nlseg_radial* s);

#ifdef __cplusplus
}
#endif

#endif
