#include "nlseg/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "json.hpp"

#include "nlseg/analysis.hpp"
#include "nlseg/errors.hpp"
#include "nlseg/io.hpp"
#include "nlseg/morphology.hpp"
#include "nlseg/obstacle.hpp"
#include "nlseg/parallel.hpp"
#include "nlseg/radial.hpp"

namespace nlseg {

using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

void say(const RunOptions& o, const std::string& s) {
  if (o.log) o.log(s);
}

std::string fmt(const char* f, double v) {
  char b[64];
  std::snprintf(b, sizeof b, f, v);
  return b;
}

std::string stage_dir(const std::string& root, std::size_t k) {
  char b[32];
  std::snprintf(b, sizeof b, "/stage_%02zu", k);
  return root + b;
}

std::string config_hash(const ExperimentConfig& c) {
  ExperimentConfig d = c;
  d.output.dir.clear();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : config_to_json(d)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char b[24];
  std::snprintf(b, sizeof b, "%016llx", static_cast<unsigned long long>(h));
  return b;
}

GridDomain stage_domain(const ExperimentConfig& c, double eps) {
  DomainSpec ds = c.domain;
  ds.h = grid_spacing(c, eps);
  return build_domain(ds, c.norm);
}

double data_level(const ExperimentConfig& c, int i) {
  return i < static_cast<int>(c.data.values.size()) ? c.data.values[i] : 1.0;
}

// The annulus can be compared with the radial reduction only for the
// configuration that reduction models.
bool radial_eligible(const ExperimentConfig& c) {
  return c.domain.shape == "annulus" && c.data.preset == "annulus_rims" && c.norm.is_euclidean() &&
         c.interaction.form == HForm::Integral && c.interaction.p == 1 && c.interaction.phi.q == 0 &&
         c.interaction.phi.C == 1 && !c.obstacle.enabled;
}

bool fb_in_scope(const ExperimentConfig& c) {
  return c.data.K == 2 && c.norm.is_euclidean() && c.interaction.form == HForm::Integral && c.interaction.p == 1 &&
         c.interaction.phi.q == 0;
}

struct Stage {
  double eps = 0;
  Grid grid;
  std::vector<Field> u, psi;
  json meta;
};

bool load_stage(const std::string& dir, const std::string& hash, double eps, int K, Stage& st) {
  if (!file_exists(dir + "/stage.json")) return false;
  json m;
  try {
    m = json::parse(read_text(dir + "/stage.json"));
  } catch (const json::exception&) {
    return false;
  }
  if (m.value("config_hash", "") != hash || m.value("epsilon", -1.0) != eps || m.value("K", -1) != K) return false;
  st.eps = eps;
  st.meta = m;
  st.u.clear();
  st.psi.clear();
  for (int i = 0; i < K; ++i) {
    FieldMeta fm;
    st.u.push_back(read_field(dir + "/u" + std::to_string(i + 1), &fm));
    st.grid = fm.grid;
  }
  if (m.value("obstacles", false))
    for (int i = 0; i < K; ++i) st.psi.push_back(read_field(dir + "/psi" + std::to_string(i + 1)));
  return true;
}

void write_stage(const std::string& dir, const ExperimentConfig& c, const Problem& pb, const PopulationState& s,
                 const std::vector<Field>& psi, const std::string& hash) {
  make_dirs(dir);
  const int K = pb.K();
  for (int i = 0; i < K; ++i) {
    const std::string n = std::to_string(i + 1);
    write_field(dir + "/u" + n, s.u[i], {"u", pb.grid(), s.epsilon, i + 1, s.iterations});
    if (!psi.empty()) write_field(dir + "/psi" + n, psi[i], {"psi", pb.grid(), s.epsilon, i + 1, -1});
    if (c.output.dump_fields) write_field(dir + "/phi" + n, pb.phi[i], {"phi", pb.grid(), s.epsilon, i + 1, -1});
  }
  if (c.output.dump_fields) {
    write_pgm(dir + "/omega.pgm", pb.gd.omega, pb.grid());
    write_pgm(dir + "/extended.pgm", pb.gd.extended, pb.grid());
  }
  json m;
  m["config_hash"] = hash;
  m["epsilon"] = s.epsilon;
  m["K"] = K;
  m["h"] = pb.grid().h;
  m["nx"] = pb.grid().nx;
  m["ny"] = pb.grid().ny;
  m["iterations"] = s.iterations;
  m["residual"] = s.residual;
  m["converged"] = s.converged;
  m["pde_residual"] = s.pde_residual;
  m["obstacle_excess"] = s.obstacle_excess;
  m["obstacles"] = !psi.empty();
  m["history"] = s.history;
  // written last: its presence marks the stage as complete
  write_text(dir + "/stage.json", m.dump(2) + "\n");
}

void add(Report& r, const std::string& name, double measured, double target, double tol, bool pass,
         const std::string& prov, bool info = false, const std::string& detail = "", double tol_high = -1) {
  CheckResult c;
  c.name = name;
  c.measured = measured + 0.0;  // no negative zero in reports
  c.target = target;
  c.tol = tol;
  c.tol_high = tol_high;
  c.pass = pass;
  c.provenance = prov;
  c.informational = info;
  c.detail = detail;
  r.checks.push_back(c);
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Seeded probe points inside Omega; the raw engine output keeps the sequence
// identical across standard libraries.
std::vector<Vec2> random_probes(const GridDomain& gd, std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const Grid& g = gd.grid;
  std::vector<Vec2> out;
  const double xlo = g.mirror_x ? g.x0 - g.nx * g.h : g.x0, xhi = g.x0 + g.nx * g.h;
  const double ylo = g.mirror_y ? g.y0 - g.ny * g.h : g.y0, yhi = g.y0 + g.ny * g.h;
  for (int tries = 0; static_cast<int>(out.size()) < n && tries < 100000; ++tries) {
    Vec2 p{xlo + (xhi - xlo) * uniform(), ylo + (yhi - ylo) * uniform()};
    int i = static_cast<int>(std::floor((p.x - g.x0) / g.h));
    int j = static_cast<int>(std::floor((p.y - g.y0) / g.h));
    i = g.fold_x(i);
    j = g.fold_y(j);
    if (i >= 0 && j >= 0 && gd.omega[g.idx(i, j)]) out.push_back(p);
  }
  return out;
}

std::vector<Vec2> default_decay_probes(const ExperimentConfig& c) {
  if (!c.analysis.decay_probes.empty()) return c.analysis.decay_probes;
  if (c.data.preset == "annulus_rims") {
    // inside each limit support, 0.2 from its free boundary
    double R = solve_radial_limit(c.domain.a, c.domain.b, data_level(c, 0), data_level(c, 1));
    const double d1 = (R - 0.2) / std::sqrt(2.0), d2 = (R + 1.2) / std::sqrt(2.0);
    return {{d1, d1}, {d2, d2}};
  }
  if (c.data.preset == "strip_linear") {
    double R = (c.domain.width - 1.0) / 2.0;
    return {{R - 0.3, c.domain.height / 2}, {R + 1.3, c.domain.height / 2}};
  }
  return {};
}

double sample(const Field& f, const Grid& g, Vec2 p) { return sample_bilinear(f, g, p.x, p.y); }

struct StageMetrics {
  double eps = 0, h = 0;
  int nx = 0, ny = 0, iterations = 0;
  double residual = 0, pde_residual = 0, obstacle_excess = 0;
  bool converged = false;
  std::vector<double> threshold;
  std::vector<std::size_t> support_cells;
  double separation = kNaN;
  double overlap = kNaN;
  std::vector<std::vector<double>> grad;  // [i][radius] r * max |grad u_i|
  double grad_max = 0;
  std::vector<std::vector<double>> decay_values;  // [probe][population]
  std::vector<std::vector<double>> probe_values;  // [probe][population]
  std::vector<double> iface_length, iface_radius;
};

}  // namespace

bool Report::passed(bool strict) const {
  if (checks.empty()) return false;
  for (const auto& c : checks)
    if ((strict || !c.informational) && !c.pass) return false;
  return true;
}

std::string Report::to_json(bool strict) const {
  json j;
  j["name"] = name;
  j["strict"] = strict;
  j["pass"] = passed(strict);
  j["warnings"] = warnings;
  json arr = json::array();
  for (const auto& c : checks) {
    json e;
    e["name"] = c.name;
    e["measured"] = num(c.measured);
    e["target"] = num(c.target);
    e["tol"] = num(c.tol);
    if (c.tol_high >= 0) e["tol_high"] = c.tol_high;
    e["pass"] = c.pass;
    e["informational"] = c.informational;
    e["provenance"] = c.provenance;
    if (!c.detail.empty()) e["detail"] = c.detail;
    arr.push_back(e);
  }
  j["checks"] = arr;
  return j.dump(2) + "\n";
}

std::string Report::to_text(bool strict) const {
  std::string out = "report: " + name + "\n";
  std::size_t failed = 0, counted = 0;
  for (const auto& c : checks) {
    const bool counts = strict || !c.informational;
    counted += counts;
    failed += counts && !c.pass;
    char line[512];
    std::snprintf(line, sizeof line, "%-5s %-32s measured %-12.6g target %-10.6g tol %-10.6g (%s)",
                  c.informational && !strict ? "info" : (c.pass ? "PASS" : "FAIL"), c.name.c_str(), c.measured,
                  c.target, c.tol, c.provenance.c_str());
    out += line;
    if (c.informational && !strict) out += c.pass ? " ok" : " not met";
    if (!c.detail.empty()) out += "  " + c.detail;
    out += "\n";
  }
  for (const auto& w : warnings) out += "warning: " + w + "\n";
  if (checks.empty()) out += "overall: FAIL (no checks ran)\n";
  else
    out += "overall: " + std::string(passed(strict) ? "PASS" : "FAIL") + " (" + std::to_string(failed) + " of " +
           std::to_string(counted) + " counted checks failed)\n";
  return out;
}

namespace {

Report analyze_impl(const std::string& dir, const ExperimentConfig& cfg, const RunOptions& opt) {
  Report rep;
  rep.name = cfg.name;
  const auto& A = cfg.analysis;
  const auto& sched = cfg.solver.eps_schedule;
  const int K = cfg.data.K;
  const std::string hash = config_hash(cfg);

  if (cfg.interaction.form == HForm::Integral && cfg.interaction.p != 1)
    rep.warnings.push_back("analysis assumes p=1; free-boundary checks are informational");
  if (!cfg.norm.is_euclidean()) rep.warnings.push_back("the free-boundary condition assumes the Euclidean norm");
  for (double e : sched)
    if (grid_spacing(cfg, e) > e / 8 * (1 + 1e-12))
      rep.warnings.push_back("resolution: h = " + fmt("%.6g", grid_spacing(cfg, e)) + " exceeds eps/8 at eps = " +
                             fmt("%.6g", e));

  const std::vector<double> radii = A.gradient_radii.empty() ? std::vector<double>{0.25, 0.5, 1.0} : A.gradient_radii;
  const std::vector<Vec2> dprobes = A.decay ? default_decay_probes(cfg) : std::vector<Vec2>{};
  std::vector<Vec2> rprobes;

  std::vector<StageMetrics> metrics;
  Stage last;
  GridDomain last_gd;
  BoundaryData last_bd;
  std::vector<InterfaceSet> last_iface;
  std::vector<Mask> last_support;
  json stage_json = json::array();

  for (std::size_t k = 0; k < sched.size(); ++k) {
    Stage st;
    const std::string sd = stage_dir(dir, k);
    if (!load_stage(sd, hash, sched[k], K, st))
      fail(ErrorCode::IoError, "stage " + std::to_string(k) + " is missing or was written by another configuration in " + dir);
    GridDomain gd = stage_domain(cfg, sched[k]);
    if (!same_grid(gd.grid, st.grid)) fail(ErrorCode::IoError, "stage " + std::to_string(k) + " grid does not match the configuration");
    BoundaryData bd = make_boundary_data(gd, cfg.data);
    const Grid& g = gd.grid;
    if (k == 0) rprobes = random_probes(gd, cfg.rng_seed, A.random_probes);

    StageMetrics m;
    m.eps = sched[k];
    m.h = g.h;
    m.nx = g.nx;
    m.ny = g.ny;
    m.iterations = st.meta.value("iterations", 0);
    m.residual = st.meta.value("residual", 0.0);
    m.converged = st.meta.value("converged", false);
    m.pde_residual = st.meta.value("pde_residual", 0.0);
    m.obstacle_excess = st.meta.value("obstacle_excess", 0.0);

    std::vector<Mask> S;
    for (int i = 0; i < K; ++i) {
      Support s = extract_support(st.u[i], gd.omega, A.delta_abs, A.delta_rel);
      m.threshold.push_back(s.threshold);
      m.support_cells.push_back(count(s.mask));
      S.push_back(std::move(s.mask));
    }
    if (K >= 2) {
      double best = kNaN;
      for (int i = 0; i < K; ++i)
        for (int j = i + 1; j < K; ++j)
          if (count(S[i]) && count(S[j])) {
            double d = set_distance(S[i], S[j], g, cfg.norm);
            best = std::isnan(best) ? d : std::min(best, d);
          }
      m.separation = best;
      double num = 0, den = 0;
      for (std::size_t p = 0; p < g.size(); ++p)
        if (gd.omega[p]) {
          num += st.u[0][p] * st.u[1][p];
          den += st.u[0][p];
        }
      m.overlap = den > 0 ? num / den : 0;
    }
    const Field dist = rho_distance_field(mask_not(gd.omega), g, cfg.norm);
    for (int i = 0; i < K; ++i) {
      auto gp = gradient_profile(st.u[i], g, gd.omega, dist, radii);
      std::vector<double> row;
      for (std::size_t r = 0; r < radii.size(); ++r) {
        row.push_back(radii[r] * gp[r]);
        m.grad_max = std::max(m.grad_max, row.back());
      }
      m.grad.push_back(row);
    }
    for (auto& p : dprobes) {
      std::vector<double> v;
      for (int i = 0; i < K; ++i) v.push_back(sample(st.u[i], g, p));
      m.decay_values.push_back(v);
    }
    for (auto& p : rprobes) {
      std::vector<double> v;
      for (int i = 0; i < K; ++i) v.push_back(sample(st.u[i], g, p));
      m.probe_values.push_back(v);
    }

    // interfaces on the full plane
    std::vector<InterfaceSet> ifs;
    if (A.interfaces || A.fb_condition || A.singular_points) {
      const Grid gu = unfolded_grid(g);
      const Mask om = unfold(gd.omega, g), ex = unfold(gd.extended, g);
      for (int i = 0; i < K; ++i) {
        InterfaceSet is;
        try {
          is = extract_interface(unfold(st.u[i], g), gu, om, ex, m.threshold[i], i);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::DegenerateContour) throw;
          is.population = i;
          is.h = g.h;
        }
        m.iface_length.push_back(is.total_length());
        double rs = 0;
        std::size_t nv = 0;
        for (auto& c : is.curves)
          for (auto& v : c.v) {
            rs += std::hypot(v.x.x, v.x.y);
            ++nv;
          }
        m.iface_radius.push_back(nv ? rs / nv : kNaN);
        write_interface_csv(sd + "/interface_" + std::to_string(i + 1) + ".csv", is);
        if (cfg.output.dump_fields) write_pgm(sd + "/support_" + std::to_string(i + 1) + ".pgm", S[i], g);
        ifs.push_back(std::move(is));
      }
    }

    json sj;
    sj["epsilon"] = m.eps;
    sj["h"] = m.h;
    sj["nx"] = m.nx;
    sj["ny"] = m.ny;
    sj["iterations"] = m.iterations;
    sj["residual"] = m.residual;
    sj["converged"] = m.converged;
    sj["pde_residual"] = m.pde_residual;
    sj["obstacle_excess"] = m.obstacle_excess;
    sj["support_threshold"] = m.threshold;
    sj["support_cells"] = m.support_cells;
    sj["separation"] = num(m.separation);
    sj["overlap_ratio"] = num(m.overlap);
    sj["gradient_r_max"] = m.grad;
    sj["gradient_radii"] = radii;
    sj["decay_probe_values"] = m.decay_values;
    sj["probe_values"] = m.probe_values;
    sj["interface_length"] = m.iface_length;
    json ir = json::array();
    for (double r : m.iface_radius) ir.push_back(num(r));
    sj["interface_mean_radius"] = ir;
    stage_json.push_back(sj);
    metrics.push_back(m);

    say(opt, "analysed stage " + std::to_string(k) + " (eps " + fmt("%g", m.eps) + ")");
    if (k + 1 == sched.size()) {
      last = std::move(st);
      last_gd = std::move(gd);
      last_bd = std::move(bd);
      last_iface = std::move(ifs);
      last_support = std::move(S);
    }
  }

  const StageMetrics& L = metrics.back();
  const Grid& g = last_gd.grid;
  const double h = g.h;
  const bool fb_scope = fb_in_scope(cfg);

  // solver postconditions
  {
    bool all = true;
    for (auto& m : metrics) all = all && m.converged;
    add(rep, "converged", all ? 1 : 0, 1, 0, all, "postcondition", false,
        std::to_string(metrics.size()) + " stages");
    double tol = 10 * cfg.solver.lin.tol;
    add(rep, "pde_residual", L.pde_residual, 0, tol, L.pde_residual <= tol, "postcondition");
  }

  // sharp separation
  if (A.separation && K >= 2) {
    double lo = 2 * h + 0.05, hi = 0.05;
    bool ok = std::isfinite(L.separation) && L.separation >= 1 - lo && L.separation <= 1 + hi;
    std::string trend;
    for (auto& m : metrics) trend += (trend.empty() ? "" : " ") + fmt("%.4g", m.separation);
    add(rep, "separation", L.separation, 1, lo, ok, "law", false, "per stage: " + trend, hi);
  }

  // radial reduction
  json radial_json;
  if (A.radial_crosscheck && radial_eligible(cfg)) {
    const double a = cfg.domain.a, b = cfg.domain.b, fa = data_level(cfg, 0), fb = data_level(cfg, 1);
    const double R = solve_radial_limit(a, b, fa, fb);
    add(rep, "limit_radius_inner", L.iface_radius.size() > 0 ? L.iface_radius[0] : kNaN, R, 0.1,
        L.iface_radius.size() > 0 && std::fabs(L.iface_radius[0] - R) <= 0.1, "oracle");
    add(rep, "limit_radius_outer", L.iface_radius.size() > 1 ? L.iface_radius[1] : kNaN, R + 1, 0.1,
        L.iface_radius.size() > 1 && std::fabs(L.iface_radius[1] - R - 1) <= 0.1, "oracle");
    RadialProblem rp;
    rp.a = a;
    rp.b = b;
    rp.fa = fa;
    rp.fb = fb;
    rp.n_r = std::max(64, static_cast<int>(std::ceil((b + 1 - std::max(a - 1, 0.0)) / h)));
    RadialSolution prev;
    json rstages = json::array();
    RadialEdges edges;
    for (std::size_t k = 0; k < sched.size(); ++k) {
      rp.epsilon = sched[k];
      RadialSolution s = solve_radial_epsilon(rp, {}, k ? &prev : nullptr);
      edges = radial_support_edges(s, A.delta_abs, A.delta_rel);
      rstages.push_back({{"epsilon", sched[k]}, {"r1", edges.r1}, {"r2", edges.r2}, {"iterations", s.iterations}});
      prev = std::move(s);
    }
    write_radial_csv(dir + "/radial.csv", prev);
    radial_json = {{"R", R}, {"n_r", rp.n_r}, {"stages", rstages}};
    double dev = std::max(std::fabs(edges.r1 - R), std::fabs(edges.r2 - R - 1));
    add(rep, "radial_epsilon_vs_limit", dev, 0, 0.02, dev <= 0.02, "oracle", false,
        "radial edges " + fmt("%.5g", edges.r1) + ", " + fmt("%.5g", edges.r2) + " vs " + fmt("%.5g", R) + ", " +
            fmt("%.5g", R + 1));
    if (L.iface_radius.size() > 1) {
      double d2 = std::max(std::fabs(L.iface_radius[0] - edges.r1), std::fabs(L.iface_radius[1] - edges.r2));
      add(rep, "radial_epsilon_vs_2d", d2, 0, 4 * h, d2 <= 4 * h, "oracle", true,
          "2D interface radii against the radial solution at the same epsilon");
    }
  }

  // ball regularisation of every support
  if (A.ball_regularization)
    for (int i = 0; i < K; ++i) {
      if (!count(last_support[i])) {
        add(rep, "ball_regularization_u" + std::to_string(i + 1), kNaN, 0, 0, false, "law", false, "empty support");
        continue;
      }
      BallRegularity br = check_ball_regularization(last_support[i], g, cfg.norm, &last_gd.omega, 2);
      add(rep, "ball_regularization_u" + std::to_string(i + 1), static_cast<double>(br.outside_collar), 0, 0, br.pass,
          "law", false, std::to_string(br.diff_cells) + " differing cells, all within the 2-cell collar: " +
                            (br.pass ? "yes" : "no"));
    }

  // free-boundary condition on the smallest epsilon
  if (A.fb_condition && K == 2 && last_iface.size() == 2) {
    try {
      if (last_iface[0].curves.empty() || last_iface[1].curves.empty())
        fail(ErrorCode::DegenerateContour, "missing interface");
      FbReport fr = check_fb_condition(last_iface[0], last_iface[1], 2 * h, 0.1, 0.02, 0.25);
      const std::size_t total = fr.pairs.size() + fr.unpaired;
      add(rep, "fb_condition", fr.pairs.empty() ? kNaN : fr.median_ratio, fr.pairs.empty() ? kNaN : fr.median_target,
          0.1 * fr.median_target, fr.pass, "law", !fb_scope,
          std::to_string(fr.pairs.size()) + " of " + std::to_string(total) + " vertices paired within 2h; " +
              fmt("%.3g", fr.pass_fraction) + " of pairs within 10%");
    } catch (const Error& e) {
      add(rep, "fb_condition", kNaN, kNaN, kNaN, false, "law", !fb_scope, e.what());
    }
  }

  // mass balance across the gap
  if (A.mass_balance && K == 2 && (cfg.data.preset == "annulus_rims" || cfg.data.preset == "strip_linear")) {
    Mask D(g.size(), 0), E(g.size(), 0);
    if (cfg.data.preset == "annulus_rims") {
      const double R = solve_radial_limit(cfg.domain.a, cfg.domain.b, data_level(cfg, 0), data_level(cfg, 1));
      for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
          double r = std::hypot(g.xc(i), g.yc(j));
          D[g.idx(i, j)] = r > cfg.domain.a + 0.25 && r < R + 1.5;
          E[g.idx(i, j)] = r > R + 0.25 && r < cfg.domain.b - 0.25;
        }
    } else {
      const double R = (cfg.domain.width - 1) / 2;
      for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
          double x = g.xc(i);
          D[g.idx(i, j)] = x > 0.25 && x < R + 0.5;
          E[g.idx(i, j)] = x > R + 0.5 && x < cfg.domain.width - 0.25;
        }
    }
    try {
      MassBalance mb = check_mass_balance(last.u[0], last.u[1], g, last_gd.omega, D, E);
      add(rep, "mass_balance", mb.rel_diff, 0, 0.05, mb.rel_diff <= 0.05, "oracle", false,
          "masses " + fmt("%.6g", mb.mass1) + " and " + fmt("%.6g", mb.mass2));
    } catch (const Error& e) {
      add(rep, "mass_balance", kNaN, 0, 0.05, false, "oracle", false, e.what());
    }
  }

  // exponential decay at fixed probes
  if (A.decay && K >= 2) {
    if (sched.size() < 3) {
      rep.warnings.push_back("decay fit needs at least three epsilon values");
    } else {
      std::vector<Mask> region(K);
      for (int i = 0; i < K; ++i) region[i] = erode_by_ball(last_support[i], g, 0.2, cfg.norm);
      bool any = false;
      for (std::size_t p = 0; p < dprobes.size(); ++p)
        for (int j = 0; j < K; ++j) {
          Mask reg(g.size(), 0), data(g.size(), 0);
          for (int i = 0; i < K; ++i)
            if (i != j) reg = mask_or(reg, region[i]);
          for (std::size_t q = 0; q < g.size(); ++q) data[q] = last_bd.f[j][q] > 0;
          std::vector<double> vals;
          for (auto& m : metrics) vals.push_back(m.decay_values[p][j]);
          const std::string name = "decay_u" + std::to_string(j + 1) + "_probe" + std::to_string(p + 1);
          try {
            DecayEstimate de = fit_decay(sched, vals, dprobes[p], g, reg, data);
            any = true;
            add(rep, name, de.r2, 0.99, 0, de.slope < 0 && de.r2 >= 0.99, "law", false,
                "slope " + fmt("%.6g", de.slope) + " (must be negative); measured is R^2 at (" +
                    fmt("%.4g", dprobes[p].x) + ", " + fmt("%.4g", dprobes[p].y) + ")");
          } catch (const Error& e) {
            if (e.code() == ErrorCode::ProbeOutsideDecayRegion) continue;
            any = true;
            add(rep, name, kNaN, 0.99, 0, false, "law", false, e.what());
          }
        }
      if (!any && !dprobes.empty()) rep.warnings.push_back("no decay probe lies in a decay region");
    }
  }

  // gradient bound with a constant fitted on the first half of the schedule
  if (A.gradient_bound) {
    const std::size_t nfit = (metrics.size() + 1) / 2;
    double C0 = 0, worst = 0;
    for (std::size_t k = 0; k < metrics.size(); ++k) {
      if (k < nfit) C0 = std::max(C0, metrics[k].grad_max);
      worst = std::max(worst, metrics[k].grad_max);
    }
    const double ratio = C0 > 0 ? worst / C0 : kNaN;
    std::string series;
    for (auto& m : metrics) series += (series.empty() ? "" : " ") + fmt("%.4g", m.grad_max);
    add(rep, "gradient_bound", ratio, 1, 0.1, std::isfinite(ratio) && ratio <= 1.1, "law", metrics.size() < 2,
        "C0 = " + fmt("%.5g", C0) + " from " + std::to_string(nfit) + " stage(s); max r|grad u| per stage: " + series);
  }

  // singular points
  if (A.singular_points && K == 2 && last_iface.size() == 2 && !last_iface[0].curves.empty() &&
      !last_iface[1].curves.empty()) {
    std::vector<SingularPoint> sp;
    for (int i = 0; i < 2; ++i) {
      auto s = detect_singular_points(last_iface[i], last_iface[1 - i], cfg.norm);
      sp.insert(sp.end(), s.begin(), s.end());
    }
    double min_angle = kPi;
    for (auto& s : sp)
      if (std::isfinite(s.theta)) min_angle = std::min(min_angle, s.theta);
    if (cfg.obstacle.enabled) {
      // every vertex with a full fit window on both sides, not only singular ones
      double vmin = min_angle;
      for (const auto& is : last_iface)
        for (const auto& c : is.curves) {
          std::vector<Vec2> pts;
          for (const auto& v : c.v) pts.push_back(v.x);
          for (int k = 0; k < static_cast<int>(pts.size()); ++k) {
            double t = tangent_cone_angle(pts, c.closed, k, 5 * h, 20 * h);
            if (std::isfinite(t)) vmin = std::min(vmin, t);
          }
        }
      add(rep, "lipschitz_angles", vmin * 180 / kPi, 20, 0, vmin * 180 / kPi >= 20, "law", false,
          std::to_string(sp.size()) + " singular point(s); measured is the smallest tangent-cone angle in degrees");
    } else if (cfg.data.preset == "strip_linear") {
      add(rep, "c1_no_singular_points", static_cast<double>(sp.size()), 0, 0, sp.empty(), "law");
    } else {
      add(rep, "singular_points", static_cast<double>(sp.size()), 0, 0, true, "law", true,
          "count only; smallest angle " + fmt("%.4g", min_angle * 180 / kPi) + " degrees");
    }
  }

  // obstacle strictness
  if (cfg.obstacle.enabled && !last.psi.empty()) {
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < K; ++i) {
      Mask Ai(g.size(), 0);
      for (std::size_t p = 0; p < g.size(); ++p) Ai[p] = last_gd.omega[p] && last.psi[i][p] > 0;
      // closure: add the 8-neighbour ring
      Mask closure = Ai;
      for (int j = 0; j < g.ny; ++j)
        for (int ii = 0; ii < g.nx; ++ii) {
          if (!Ai[g.idx(ii, j)]) continue;
          for (int dj = -1; dj <= 1; ++dj)
            for (int di = -1; di <= 1; ++di) {
              int a = g.fold_x(ii + di), b = g.fold_y(j + dj);
              if (a >= 0 && b >= 0) closure[g.idx(a, b)] = 1;
            }
        }
      for (std::size_t p = 0; p < g.size(); ++p)
        if (closure[p] && last_gd.omega[p]) worst = std::min(worst, last.u[i][p] - last.psi[i][p]);
    }
    add(rep, "obstacle_strictness", worst, 0, 0, worst > 0, "law", false, "min(u_i - psi_i) over the closed A_i in Omega");
  }

  // threshold robustness
  if (A.threshold_robustness)
    for (int i = 0; i < K; ++i) {
      double s = threshold_shift_cells(last.u[i], g, last_gd.omega, A.delta_abs, A.delta_rel);
      add(rep, "threshold_robustness_u" + std::to_string(i + 1), s, 0, 2, s <= 2, "postcondition", false,
          "interface shift in cells when delta_rel is halved");
    }

  json mj;
  mj["name"] = cfg.name;
  mj["stages"] = stage_json;
  if (!radial_json.is_null()) mj["radial"] = radial_json;
  json rp = json::array();
  for (auto& p : rprobes) rp.push_back({p.x, p.y});
  mj["probe_points"] = rp;
  json dp = json::array();
  for (auto& p : dprobes) dp.push_back({p.x, p.y});
  mj["decay_probe_points"] = dp;
  write_text(dir + "/metrics.json", mj.dump(2) + "\n");
  write_text(dir + "/report.json", rep.to_json(opt.strict));
  write_text(dir + "/report.txt", rep.to_text(opt.strict));
  return rep;
}

}  // namespace

Report run_experiment(const ExperimentConfig& cfg, const RunOptions& opt) {
  if (opt.threads > 0) set_threads(opt.threads);
  const std::string out = opt.output_dir.empty() ? cfg.output.dir : opt.output_dir;
  make_dirs(out);
  write_text(out + "/config.json", config_to_json(cfg));
  const std::string hash = config_hash(cfg);
  const auto& sched = cfg.solver.eps_schedule;
  const int K = cfg.data.K;

  Grid prev_grid;
  std::vector<Field> prev_u;
  bool have_prev = false;
  for (std::size_t k = 0; k < sched.size(); ++k) {
    const double eps = sched[k];
    const std::string sd = stage_dir(out, k);
    Stage st;
    if (load_stage(sd, hash, eps, K, st)) {
      say(opt, "stage " + std::to_string(k) + " (eps " + fmt("%g", eps) + "): resumed from checkpoint");
      prev_grid = st.grid;
      prev_u = std::move(st.u);
      have_prev = true;
      continue;
    }
    Problem pb = make_problem(stage_domain(cfg, eps), make_boundary_data(stage_domain(cfg, eps), cfg.data),
                              cfg.interaction, cfg.solver.lin);
    if (k == 0) validate_boundary_data(pb.bd, pb.gd, cfg.norm, cfg.density_c, true);
    std::vector<Field> psi;
    if (cfg.obstacle.enabled)
      psi = build_obstacles(pb.gd, pb.bd, cfg.obstacle.mu, cfg.obstacle.lambda, cfg.norm, cfg.solver.lin).psi;
    std::vector<Field> warm;
    if (have_prev) warm = transfer_state(prev_u, prev_grid, pb);
    PopulationState s = solve_system(pb, cfg.solver, eps, have_prev ? &warm : nullptr, psi.empty() ? nullptr : &psi);
    say(opt, "stage " + std::to_string(k) + " (eps " + fmt("%g", eps) + ", h " + fmt("%g", pb.grid().h) + ", " +
                 std::to_string(pb.grid().nx) + "x" + std::to_string(pb.grid().ny) + "): " +
                 std::to_string(s.iterations) + " iterations, residual " + fmt("%.3g", s.residual) +
                 (s.converged ? "" : " (not converged)"));
    write_stage(sd, cfg, pb, s, psi, hash);
    prev_grid = s.grid;
    prev_u = std::move(s.u);
    have_prev = true;
  }
  return analyze_impl(out, cfg, opt);
}

Report analyze_run(const std::string& dir, const RunOptions& opt) {
  if (opt.threads > 0) set_threads(opt.threads);
  ExperimentConfig cfg = parse_config(read_text(dir + "/config.json"), dir + "/config.json", dir);
  return analyze_impl(dir, cfg, opt);
}

Report validate_experiment(const ExperimentConfig& cfg, const RunOptions& opt) {
  if (opt.threads > 0) set_threads(opt.threads);
  Report rep;
  rep.name = cfg.name;
  try {
    ConvexityBounds cb = estimate_convexity_bounds(cfg.norm, 64, cfg.convexity_floor);
    add(rep, "norm_convexity", cb.a, cfg.convexity_floor, 0, true, "analytic", false,
        "a = " + fmt("%.6g", cb.a) + ", A = " + fmt("%.6g", cb.A));
  } catch (const Error& e) {
    add(rep, "norm_convexity", kNaN, cfg.convexity_floor, 0, false, "analytic", false, e.what());
  }
  const auto& sched = cfg.solver.eps_schedule;
  std::vector<double> probe = {sched.front()};
  if (sched.size() > 1) probe.push_back(sched.back());
  for (double eps : probe) {
    const std::string tag = "eps " + fmt("%g", eps);
    const double h = grid_spacing(cfg, eps);
    add(rep, "resolution_coupling (" + tag + ")", h, eps / 8, 0, h <= eps / 8 * (1 + 1e-12), "postcondition", true,
        "h must not exceed eps/8");
    try {
      GridDomain gd = stage_domain(cfg, eps);
      add(rep, "domain (" + tag + ")", static_cast<double>(count(gd.omega)), 0, 0, true, "postcondition", false,
          std::to_string(gd.grid.nx) + "x" + std::to_string(gd.grid.ny) + " cells, h " + fmt("%g", gd.grid.h));
      BoundaryData bd = make_boundary_data(gd, cfg.data);
      ValidationReport vr = validate_boundary_data(bd, gd, cfg.norm, cfg.density_c, false);
      for (const auto& it : vr.items)
        add(rep, it.name + " (" + tag + ")", it.margin, 0, 0, it.pass, "postcondition", it.name.rfind("density", 0) == 0,
            it.detail);
      if (cfg.obstacle.enabled && eps == sched.front()) {
        try {
          ObstacleSpec os = build_obstacles(gd, bd, cfg.obstacle.mu, cfg.obstacle.lambda, cfg.norm, cfg.solver.lin);
          double mn = kPi;
          for (auto& v : os.angles)
            for (double a : v) mn = std::min(mn, a);
          add(rep, "obstacles (" + tag + ")", mn * 180 / kPi, 0, 0, true, "postcondition", false,
              "smallest corner angle in degrees");
        } catch (const Error& e) {
          add(rep, "obstacles (" + tag + ")", kNaN, 0, 0, false, "postcondition", false, e.what());
        }
      }
    } catch (const Error& e) {
      add(rep, "domain (" + tag + ")", kNaN, 0, 0, false, "postcondition", false, e.what());
    }
  }
  say(opt, "validated " + cfg.name);
  return rep;
}

}  // namespace nlseg
