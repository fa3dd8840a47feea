#include "nlseg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nlseg/anderson.hpp"
#include "nlseg/errors.hpp"
#include "nlseg/parallel.hpp"

namespace nlseg {

namespace {

void check_state(const Problem& pb, const std::vector<Field>& u, const char* what) {
  if (static_cast<int>(u.size()) != pb.K()) fail(ErrorCode::InvalidArgument, std::string(what) + ": wrong population count");
  for (const auto& f : u)
    if (f.size() != pb.grid().size()) fail(ErrorCode::InvalidArgument, std::string(what) + ": field does not match grid");
}

// Restores the invariants max(0, psi_i) <= u_i <= phi_i on Omega.
void clip(const Problem& pb, std::vector<Field>& u, const std::vector<Field>* psi) {
  for (int i = 0; i < pb.K(); ++i)
    for (std::size_t p : pb.cells) {
      double lo = psi ? std::max(0.0, (*psi)[i][p]) : 0.0;
      u[i][p] = std::clamp(u[i][p], std::min(lo, pb.phi[i][p]), pb.phi[i][p]);
    }
}

std::vector<Field> sweep(Problem& pb, const std::vector<Field>& u, double eps, int* lin_iters) {
  std::vector<Field> c = interaction_coefficients(pb, u, eps);
  std::vector<Field> v(pb.K());
  for (int i = 0; i < pb.K(); ++i) {
    LinearStats st;
    v[i] = pb.lin->solve(c[i], pb.bd.f[i], &u[i], &st);
    if (lin_iters) *lin_iters += st.iterations;
  }
  return v;
}

void finish_diagnostics(Problem& pb, PopulationState& s) {
  std::vector<Field> c = interaction_coefficients(pb, s.u, s.epsilon);
  const bool obst = !s.psi.empty();
  double pde = 0, excess = 0;
  for (int i = 0; i < pb.K(); ++i) {
    Field r = screened_residual(s.u[i], c[i], pb.grid(), pb.gd.omega);
    for (std::size_t p : pb.cells) {
      bool free = !obst || s.u[i][p] > s.psi[i][p] + 1e-12 * pb.scale;
      if (free) pde = std::max(pde, std::fabs(r[p]));
      excess = std::max(excess, r[p]);
    }
  }
  s.pde_residual = pde / pb.scale;
  s.obstacle_excess = excess / pb.scale;
}

}  // namespace

Problem make_problem(GridDomain gd, BoundaryData bd, const InteractionSpec& inter, const LinearOptions& lin,
                     HOperator::Mode hmode) {
  Problem pb;
  pb.gd = std::move(gd);
  pb.bd = std::move(bd);
  pb.inter = inter;
  const Grid& g = pb.gd.grid;
  if (pb.bd.K < 1 || static_cast<int>(pb.bd.f.size()) != pb.bd.K)
    fail(ErrorCode::InvalidArgument, "boundary data has no populations");
  pb.stencil = build_ball_stencil(pb.gd.norm, g.h, inter.form, inter.p, inter.phi);
  pb.hop = std::make_shared<HOperator>(g, pb.stencil, hmode);
  pb.lin = std::make_shared<ScreenedSolver>(g, pb.gd.omega, lin);
  for (std::size_t p = 0; p < g.size(); ++p)
    if (pb.gd.omega[p]) pb.cells.push_back(p);
  pb.scale = 0;
  const Field zero(g.size(), 0.0);
  for (int i = 0; i < pb.bd.K; ++i) {
    Field f = pb.bd.f[i];
    double fmax = 0;
    for (std::size_t p = 0; p < g.size(); ++p) {
      if (pb.gd.omega[p]) f[p] = 0;
      fmax = std::max(fmax, f[p]);
    }
    pb.bd.f[i] = f;
    pb.scale = std::max(pb.scale, fmax);
    Field phi = pb.lin->solve(zero, f);
    for (std::size_t p : pb.cells) {
      if (phi[p] < -1e-8 * fmax || phi[p] > fmax * (1 + 1e-8)) {
        std::ostringstream os;
        os << "harmonic majorant leaves [0, max f]: " << phi[p];
        fail(ErrorCode::SolverDiverged, os.str());
      }
      phi[p] = std::clamp(phi[p], 0.0, fmax);
    }
    pb.phi.push_back(std::move(phi));
  }
  if (!(pb.scale > 0)) pb.scale = 1;
  return pb;
}

std::vector<Field> interaction_coefficients(Problem& pb, const std::vector<Field>& u, double eps) {
  check_state(pb, u, "interaction");
  const int K = pb.K();
  const std::size_t N = pb.grid().size();
  std::vector<Field> c(K, Field(N, 0.0));
  if (K == 1) return c;
  const double ie2 = 1.0 / (eps * eps);
  if (K == 2) {
    c[0] = pb.hop->apply(u[1], &pb.gd.omega);
    c[1] = pb.hop->apply(u[0], &pb.gd.omega);
    for (auto& ci : c)
      for (std::size_t p : pb.cells) ci[p] *= ie2;
    return c;
  }
  Field total(N, 0.0);
  std::vector<Field> Hj(K);
  for (int j = 0; j < K; ++j) {
    Hj[j] = pb.hop->apply(u[j], &pb.gd.omega);
    for (std::size_t p : pb.cells) total[p] += Hj[j][p];
  }
  for (int i = 0; i < K; ++i)
    for (std::size_t p : pb.cells) c[i][p] = std::max(0.0, total[p] - Hj[i][p]) * ie2;
  return c;
}

PopulationState initial_state(const Problem& pb, double eps) {
  if (!(eps > 0)) fail(ErrorCode::InvalidArgument, "epsilon must be positive");
  PopulationState s;
  s.epsilon = eps;
  s.grid = pb.grid();
  s.u = pb.phi;
  s.phi = pb.phi;
  return s;
}

PopulationState apply_T(Problem& pb, const PopulationState& s, double damping) {
  if (!(damping > 0 && damping <= 1)) fail(ErrorCode::InvalidArgument, "damping must lie in (0, 1]");
  check_state(pb, s.u, "apply_T");
  std::vector<Field> v = sweep(pb, s.u, s.epsilon, nullptr);
  PopulationState out = s;
  double res = 0;
  for (int i = 0; i < pb.K(); ++i)
    for (std::size_t p : pb.cells) {
      double d = v[i][p] - s.u[i][p];
      res = std::max(res, std::fabs(d));
      out.u[i][p] = s.u[i][p] + damping * d;
    }
  clip(pb, out.u, s.psi.empty() ? nullptr : &s.psi);
  out.residual = res / pb.scale;
  out.iterations = s.iterations + 1;
  out.history.push_back(out.residual);
  return out;
}

PopulationState solve_system(Problem& pb, const SolverConfig& cfg, double eps, const std::vector<Field>* warm,
                             const std::vector<Field>* psi) {
  if (!(cfg.fp_tol > 0)) fail(ErrorCode::InvalidArgument, "fp_tol must be positive");
  if (cfg.max_outer < 1) fail(ErrorCode::InvalidArgument, "max_outer must be >= 1");
  if (psi) check_state(pb, *psi, "obstacles");
  PopulationState s = initial_state(pb, eps);
  if (psi) s.psi = *psi;
  if (warm) {
    check_state(pb, *warm, "warm start");
    for (int i = 0; i < pb.K(); ++i)
      for (std::size_t p : pb.cells) s.u[i][p] = (*warm)[i][p];
  }
  clip(pb, s.u, psi);

  const int K = pb.K();
  const std::size_t n = pb.cells.size();
  std::vector<double> x(K * n), g(K * n);
  Anderson acc(cfg.anderson_depth, cfg.damping);
  double prev = 1e300;
  std::vector<Field> v;
  for (int it = 1; it <= cfg.max_outer; ++it) {
    v = sweep(pb, s.u, eps, nullptr);
    double res = 0;
    for (int i = 0; i < K; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = pb.cells[k];
        x[i * n + k] = s.u[i][p];
        g[i * n + k] = v[i][p] - s.u[i][p];
        res = std::max(res, std::fabs(g[i * n + k]));
      }
    res /= pb.scale;
    if (!std::isfinite(res)) fail(ErrorCode::SolverDiverged, "non-finite fixed-point residual");
    s.iterations = it;
    s.residual = res;
    s.history.push_back(res);
    if (res <= cfg.fp_tol) {
      s.converged = true;
      break;
    }
    if (it == cfg.max_outer) break;
    if (res > 2 * prev) acc.reset();
    prev = res;
    acc.step(x, g);
    for (int i = 0; i < K; ++i)
      for (std::size_t k = 0; k < n; ++k) s.u[i][pb.cells[k]] = x[i * n + k];
    clip(pb, s.u, psi);
  }
  // the accepted state is the image of the last iterate
  s.u = std::move(v);
  clip(pb, s.u, psi);
  finish_diagnostics(pb, s);
  return s;
}

std::vector<Field> transfer_state(const std::vector<Field>& u, const Grid& from, const Problem& to) {
  std::vector<Field> out(to.K());
  for (int i = 0; i < to.K(); ++i) {
    out[i] = same_grid(from, to.grid()) ? u[i] : resample(u[i], from, to.grid());
    for (std::size_t p = 0; p < out[i].size(); ++p)
      if (!to.gd.omega[p]) out[i][p] = to.bd.f[i][p];
  }
  clip(to, out, nullptr);
  return out;
}

std::vector<PopulationState> run_continuation(const ProblemFactory& make, const SolverConfig& cfg,
                                              const StageCallback& on_stage, bool keep_states,
                                              const ObstacleFactory& obstacles) {
  const auto& sch = cfg.eps_schedule;
  if (sch.empty()) fail(ErrorCode::InvalidArgument, "empty epsilon schedule");
  for (std::size_t k = 0; k < sch.size(); ++k) {
    if (!(sch[k] > 0)) fail(ErrorCode::InvalidArgument, "epsilon values must be positive");
    if (k && !(sch[k] < sch[k - 1])) fail(ErrorCode::InvalidArgument, "epsilon schedule must be strictly decreasing");
  }
  std::vector<PopulationState> states;
  PopulationState last;
  bool have_last = false;
  for (std::size_t k = 0; k < sch.size(); ++k) {
    Problem pb = make(sch[k]);
    std::vector<Field> warm;
    if (have_last) warm = transfer_state(last.u, last.grid, pb);
    std::vector<Field> psi;
    if (obstacles) psi = obstacles(pb);
    PopulationState s = solve_system(pb, cfg, sch[k], have_last ? &warm : nullptr, obstacles ? &psi : nullptr);
    if (on_stage) on_stage(static_cast<int>(k), pb, s);
    last = s;
    have_last = true;
    if (keep_states) states.push_back(std::move(s));
  }
  if (!keep_states) states.push_back(std::move(last));
  return states;
}

}  // namespace nlseg
