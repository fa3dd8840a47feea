#include "nlseg/nlseg.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <mutex>
#include <new>
#include <string>

#include "nlseg/config.hpp"
#include "nlseg/errors.hpp"
#include "nlseg/io.hpp"
#include "nlseg/parallel.hpp"
#include "nlseg/radial.hpp"
#include "nlseg/runner.hpp"

struct nlseg_experiment {
  nlseg::ExperimentConfig cfg;
  std::string config_json;
  std::string report_text, report_json;
};

struct nlseg_radial {
  nlseg::RadialSolution sol;
};

namespace {

thread_local std::string g_last_error;

std::mutex g_log_mu;
nlseg_log_fn g_log_fn = nullptr;
void* g_log_user = nullptr;

nlseg_status map_code(nlseg::ErrorCode c) {
  using nlseg::ErrorCode;
  switch (c) {
    case ErrorCode::InvalidArgument: return NLSEG_ERR_INVALID_ARGUMENT;
    case ErrorCode::ConfigError: return NLSEG_ERR_CONFIG;
    case ErrorCode::IoError: return NLSEG_ERR_IO;
    case ErrorCode::NotConverged:
    case ErrorCode::SolverDiverged: return NLSEG_ERR_NOT_CONVERGED;
    case ErrorCode::NoRoot: return NLSEG_ERR_NO_ROOT;
    case ErrorCode::DegenerateNorm:
    case ErrorCode::ResolutionTooCoarse:
    case ErrorCode::GeometryTooThin:
    case ErrorCode::SeparationViolation:
    case ErrorCode::NegativeData:
    case ErrorCode::EmptySupport:
    case ErrorCode::EmptySet:
    case ErrorCode::FocalSingularity: return NLSEG_ERR_DOMAIN;
    default: return NLSEG_ERR_INTERNAL;
  }
}

template <class F>
nlseg_status guarded(F&& f) {
  try {
    g_last_error.clear();
    return f();
  } catch (const nlseg::Error& e) {
    g_last_error = e.what();
    return map_code(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return NLSEG_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return NLSEG_ERR_INTERNAL;
  }
}

nlseg_status null_arg(const char* what) {
  g_last_error = std::string("InvalidArgument: ") + what + " is null";
  return NLSEG_ERR_INVALID_ARGUMENT;
}

nlseg::RunOptions options(const char* output_dir, int strict) {
  nlseg::RunOptions o;
  if (output_dir) o.output_dir = output_dir;
  o.strict = strict != 0;
  o.log = [](const std::string& line) {
    std::lock_guard<std::mutex> lk(g_log_mu);
    if (g_log_fn) g_log_fn(line.c_str(), g_log_user);
  };
  return o;
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p) std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

}  // namespace

extern "C" {

NLSEG_API const char* nlseg_version(void) { return "1.0.0"; }

NLSEG_API const char* nlseg_last_error(void) { return g_last_error.c_str(); }

NLSEG_API nlseg_status nlseg_set_threads(int n) {
  return guarded([&] {
    nlseg::set_threads(n);
    return NLSEG_OK;
  });
}

NLSEG_API void nlseg_set_log(nlseg_log_fn fn, void* user) {
  std::lock_guard<std::mutex> lk(g_log_mu);
  g_log_fn = fn;
  g_log_user = user;
}

NLSEG_API nlseg_status nlseg_experiment_load(const char* path, nlseg_experiment** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    auto e = std::make_unique<nlseg_experiment>();
    e->cfg = nlseg::load_config(path);
    e->config_json = nlseg::config_to_json(e->cfg);
    *out = e.release();
    return NLSEG_OK;
  });
}

NLSEG_API nlseg_status nlseg_experiment_parse(const char* json_text, const char* base_dir, nlseg_experiment** out) {
  if (!json_text) return null_arg("json_text");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    auto e = std::make_unique<nlseg_experiment>();
    e->cfg = nlseg::parse_config(json_text, "<config>", base_dir ? base_dir : ".");
    e->config_json = nlseg::config_to_json(e->cfg);
    *out = e.release();
    return NLSEG_OK;
  });
}

NLSEG_API void nlseg_experiment_free(nlseg_experiment* e) { delete e; }

NLSEG_API const char* nlseg_experiment_config_json(const nlseg_experiment* e) {
  return e ? e->config_json.c_str() : "";
}

NLSEG_API nlseg_status nlseg_experiment_run(nlseg_experiment* e, const char* output_dir, int strict) {
  if (!e) return null_arg("experiment");
  return guarded([&] {
    e->report_text.clear();
    e->report_json.clear();
    nlseg::Report r = nlseg::run_experiment(e->cfg, options(output_dir, strict));
    e->report_text = r.to_text(strict != 0);
    e->report_json = r.to_json(strict != 0);
    return r.passed(strict != 0) ? NLSEG_OK : NLSEG_CHECKS_FAILED;
  });
}

NLSEG_API nlseg_status nlseg_experiment_validate(nlseg_experiment* e, int strict) {
  if (!e) return null_arg("experiment");
  return guarded([&] {
    e->report_text.clear();
    e->report_json.clear();
    nlseg::Report r = nlseg::validate_experiment(e->cfg, options(nullptr, strict));
    e->report_text = r.to_text(strict != 0);
    e->report_json = r.to_json(strict != 0);
    return r.passed(strict != 0) ? NLSEG_OK : NLSEG_CHECKS_FAILED;
  });
}

NLSEG_API const char* nlseg_experiment_report(const nlseg_experiment* e) { return e ? e->report_text.c_str() : ""; }

NLSEG_API const char* nlseg_experiment_report_json(const nlseg_experiment* e) {
  return e ? e->report_json.c_str() : "";
}

NLSEG_API nlseg_status nlseg_analyze_dir(const char* dir, int strict, char** report_text) {
  if (!dir) return null_arg("dir");
  if (report_text) *report_text = nullptr;
  return guarded([&] {
    nlseg::Report r = nlseg::analyze_run(dir, options(nullptr, strict));
    if (report_text) *report_text = dup(r.to_text(strict != 0));
    return r.passed(strict != 0) ? NLSEG_OK : NLSEG_CHECKS_FAILED;
  });
}

NLSEG_API void nlseg_free(void* p) { std::free(p); }

NLSEG_API nlseg_status nlseg_radial_limit(double a, double b, double fa, double fb, double* R) {
  if (!R) return null_arg("R");
  return guarded([&] {
    *R = nlseg::solve_radial_limit(a, b, fa, fb);
    return NLSEG_OK;
  });
}

NLSEG_API nlseg_status nlseg_radial_solve(double a, double b, double fa, double fb, double epsilon, int n_r,
                                          nlseg_radial** out) {
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    if (!(epsilon > 0)) nlseg::fail(nlseg::ErrorCode::InvalidArgument, "epsilon must be positive");
    nlseg::RadialProblem rp;
    rp.a = a;
    rp.b = b;
    rp.fa = fa;
    rp.fb = fb;
    if (n_r > 0) rp.n_r = n_r;
    auto h = std::make_unique<nlseg_radial>();
    bool warm = false;
    for (double eps = 0.2; ; eps /= 2) {
      const bool final = eps / 2 < epsilon;
      rp.epsilon = final ? epsilon : eps;
      h->sol = nlseg::solve_radial_epsilon(rp, {}, warm ? &h->sol : nullptr);
      warm = true;
      if (final) break;
    }
    *out = h.release();
    return NLSEG_OK;
  });
}

NLSEG_API size_t nlseg_radial_size(const nlseg_radial* s) { return s ? s->sol.r.size() : 0; }

NLSEG_API nlseg_status nlseg_radial_data(const nlseg_radial* s, const double** r, const double** u1,
                                         const double** u2) {
  if (!s) return null_arg("radial");
  if (r) *r = s->sol.r.data();
  if (u1) *u1 = s->sol.u1.data();
  if (u2) *u2 = s->sol.u2.data();
  return NLSEG_OK;
}

NLSEG_API nlseg_status nlseg_radial_edges(const nlseg_radial* s, double delta_rel, double* r1, double* r2) {
  if (!s) return null_arg("radial");
  return guarded([&] {
    nlseg::RadialEdges e = nlseg::radial_support_edges(s->sol, 0.0, delta_rel);
    if (r1) *r1 = e.r1;
    if (r2) *r2 = e.r2;
    return NLSEG_OK;
  });
}

NLSEG_API nlseg_status nlseg_radial_write_csv(const nlseg_radial* s, const char* path) {
  if (!s) return null_arg("radial");
  if (!path) return null_arg("path");
  return guarded([&] {
    nlseg::write_radial_csv(path, s->sol);
    return NLSEG_OK;
  });
}

NLSEG_API void nlseg_radial_free(nlseg_radial* s) { delete s; }

}  // extern "C"
