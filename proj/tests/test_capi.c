/* Exercises the public C interface only. */
#include <math.h>
#include <stdio.h>
#include <string.h>

#include "nlseg/nlseg.h"

static int failures = 0;

#define EXPECT(cond)                                               \
  do {                                                             \
    if (!(cond)) {                                                 \
      fprintf(stderr, "%s:%d: failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                  \
    }                                                              \
  } while (0)

static int log_lines = 0;
static void count_lines(const char* line, void* user) {
  (void)line;
  ++*(int*)user;
}

int main(void) {
  EXPECT(strlen(nlseg_version()) > 0);
  EXPECT(nlseg_last_error() != NULL);

  double R = 0;
  EXPECT(nlseg_radial_limit(1, 6, 1, 1, &R) == NLSEG_OK);
  EXPECT(fabs(R - 2) < 1e-10);
  EXPECT(nlseg_radial_limit(1, 2.5, 1, 1, &R) == NLSEG_ERR_NO_ROOT);
  EXPECT(strlen(nlseg_last_error()) > 0);
  EXPECT(nlseg_radial_limit(1, 6, 1, 1, NULL) == NLSEG_ERR_INVALID_ARGUMENT);

  nlseg_radial* rs = NULL;
  EXPECT(nlseg_radial_solve(1, 6, 1, 1, 0.05, 2240, &rs) == NLSEG_OK);
  if (rs) {
    const double *r = NULL, *u1 = NULL;
    EXPECT(nlseg_radial_size(rs) == 2240);
    EXPECT(nlseg_radial_data(rs, &r, &u1, NULL) == NLSEG_OK);
    EXPECT(r && u1 && r[1] > r[0]);
    double r1 = 0, r2 = 0;
    EXPECT(nlseg_radial_edges(rs, 1e-3, &r1, &r2) == NLSEG_OK);
    EXPECT(r1 > 1 && r1 < 6 && r2 > 1 && r2 < 6);
    nlseg_radial_free(rs);
  }

  nlseg_experiment* e = NULL;
  EXPECT(nlseg_experiment_parse("{\"schema_version\": 1, \"bogus\": 2}", ".", &e) == NLSEG_ERR_CONFIG);
  EXPECT(e == NULL);
  EXPECT(strstr(nlseg_last_error(), "bogus") != NULL);

  const char* cfg =
      "{\"schema_version\": 1, \"name\": \"capi\","
      " \"domain\": {\"shape\": \"strip\", \"width\": 5.0, \"height\": 4.0, \"h\": 0.03125},"
      " \"data\": {\"preset\": \"strip_linear\"}, \"eps_schedule\": [0.5, 0.375],"
      " \"output\": {\"dump_fields\": false}}";
  EXPECT(nlseg_experiment_parse(cfg, ".", &e) == NLSEG_OK);
  if (e) {
    EXPECT(strstr(nlseg_experiment_config_json(e), "\"schema_version\"") != NULL);
    nlseg_status v = nlseg_experiment_validate(e, 0);
    EXPECT(v == NLSEG_OK);
    nlseg_set_log(count_lines, &log_lines);
    nlseg_status s = nlseg_experiment_run(e, NLSEG_WORK_DIR "/capi", 0);
    nlseg_set_log(NULL, NULL);
    EXPECT(s == NLSEG_OK || s == NLSEG_CHECKS_FAILED);
    EXPECT(log_lines > 0);
    EXPECT(strstr(nlseg_experiment_report(e), "overall:") != NULL);
    EXPECT(strstr(nlseg_experiment_report_json(e), "\"provenance\"") != NULL);
    char* again = NULL;
    EXPECT(nlseg_analyze_dir(NLSEG_WORK_DIR "/capi", 0, &again) == s);
    EXPECT(again && strcmp(again, nlseg_experiment_report(e)) == 0);
    nlseg_free(again);
    nlseg_experiment_free(e);
  }
  EXPECT(nlseg_analyze_dir(NLSEG_WORK_DIR "/does_not_exist", 0, NULL) == NLSEG_ERR_IO);

  if (failures) fprintf(stderr, "%d failures\n", failures);
  else printf("C interface: all checks passed\n");
  return failures ? 1 : 0;
}
