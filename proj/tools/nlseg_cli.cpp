#include <cstdio>
#include <cstdlib>
#include <string>

#include "CLI11.hpp"
#include "nlseg/nlseg.h"

namespace {

enum { kPass = 0, kChecksFailed = 1, kUsage = 2, kError = 3 };

int exit_code(nlseg_status s) {
  switch (s) {
    case NLSEG_OK: return kPass;
    case NLSEG_CHECKS_FAILED: return kChecksFailed;
    case NLSEG_ERR_CONFIG:
    case NLSEG_ERR_INVALID_ARGUMENT: return kUsage;
    default: return kError;
  }
}

int report_error(nlseg_status s) {
  std::fprintf(stderr, "nlseg: %s\n", nlseg_last_error());
  return exit_code(s);
}

void log_line(const char* line, void*) { std::fprintf(stderr, "%s\n", line); }

int default_threads() {
  const char* env = std::getenv("NLSEG_THREADS");
  if (!env || !*env) return 0;
  char* end = nullptr;
  long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) {
    std::fprintf(stderr, "nlseg: ignoring NLSEG_THREADS=%s (expected a positive integer)\n", env);
    return 0;
  }
  return static_cast<int>(n);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal segregation solver"};
  app.require_subcommand(1);
  int threads = default_threads();
  std::string output;
  bool strict = false, quiet = false;
  app.add_option("--threads", threads, "worker threads (default: NLSEG_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--output", output, "output directory");
  app.add_flag("--strict", strict, "informational checks become failures");
  app.add_flag("-q,--quiet", quiet, "no progress lines on stderr");
  app.add_flag_callback("--version", [] {
    std::printf("nlseg %s\n", nlseg_version());
    std::exit(0);
  });

  std::string path;
  auto* run = app.add_subcommand("run", "solve every stage, then analyse");
  run->add_option("config", path, "experiment config")->required();
  auto* validate = app.add_subcommand("validate", "check a config without solving");
  validate->add_option("config", path, "experiment config")->required();
  auto* analyze = app.add_subcommand("analyze", "re-analyse a state directory");
  analyze->add_option("state-dir", path, "directory written by run")->required();

  auto* oracle = app.add_subcommand("oracle", "reference solutions");
  oracle->require_subcommand(1);
  auto* radial = oracle->add_subcommand("radial", "radial reduction on an annulus");
  double a = 1, b = 6, fa = 1, fb = 1, epsilon = 0, delta_rel = 1e-3;
  int n_r = 0;
  radial->add_option("--a", a, "inner radius")->required();
  radial->add_option("--b", b, "outer radius")->required();
  radial->add_option("--fa", fa, "inner data level")->required();
  radial->add_option("--fb", fb, "outer data level")->required();
  radial->add_option("--epsilon", epsilon, "also solve the epsilon problem");
  radial->add_option("--n-r", n_r, "radial cells (epsilon problem)");
  radial->add_option("--delta-rel", delta_rel, "support threshold relative to max u");

  // flags are accepted after the subcommand as well
  for (auto* sub : {run, validate, analyze, radial}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  if (threads > 0) {
    nlseg_status s = nlseg_set_threads(threads);
    if (s != NLSEG_OK) return report_error(s);
  }
  if (!quiet) nlseg_set_log(log_line, nullptr);
  const int strict_flag = strict ? 1 : 0;

  if (*run || *validate) {
    nlseg_experiment* e = nullptr;
    nlseg_status s = nlseg_experiment_load(path.c_str(), &e);
    if (s != NLSEG_OK) return report_error(s);
    s = *run ? nlseg_experiment_run(e, output.empty() ? nullptr : output.c_str(), strict_flag)
             : nlseg_experiment_validate(e, strict_flag);
    if (s == NLSEG_OK || s == NLSEG_CHECKS_FAILED) std::fputs(nlseg_experiment_report(e), stdout);
    else
      std::fprintf(stderr, "nlseg: %s\n", nlseg_last_error());
    nlseg_experiment_free(e);
    return exit_code(s);
  }

  if (*analyze) {
    char* text = nullptr;
    nlseg_status s = nlseg_analyze_dir(path.c_str(), strict_flag, &text);
    if (text) std::fputs(text, stdout);
    nlseg_free(text);
    if (s != NLSEG_OK && s != NLSEG_CHECKS_FAILED) return report_error(s);
    return exit_code(s);
  }

  if (*radial) {
    double R = 0;
    nlseg_status s = nlseg_radial_limit(a, b, fa, fb, &R);
    if (s != NLSEG_OK) return report_error(s);
    std::printf("limit R = %.12g\nlimit R+1 = %.12g\n", R, R + 1);
    if (epsilon > 0) {
      nlseg_radial* sol = nullptr;
      s = nlseg_radial_solve(a, b, fa, fb, epsilon, n_r, &sol);
      if (s != NLSEG_OK) return report_error(s);
      double r1 = 0, r2 = 0;
      nlseg_radial_edges(sol, delta_rel, &r1, &r2);
      std::printf("epsilon = %.6g\nsupport edge u1 = %.6g\nsupport edge u2 = %.6g\ngap = %.6g\n", epsilon, r1, r2,
                  r2 - r1);
      if (!output.empty()) {
        std::string csv = output + "/radial.csv";
        s = nlseg_radial_write_csv(sol, csv.c_str());
        if (s != NLSEG_OK) {
          nlseg_radial_free(sol);
          return report_error(s);
        }
        std::printf("wrote %s\n", csv.c_str());
      }
      nlseg_radial_free(sol);
    }
    return kPass;
  }
  return kUsage;
}
