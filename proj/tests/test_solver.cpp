#include "doctest.h"

#include <cmath>
#include <functional>
#include <random>
#include <set>

#include "nlseg/domain.hpp"
#include "nlseg/errors.hpp"
#include "nlseg/linsolve.hpp"
#include "nlseg/nonlocal.hpp"
#include "nlseg/solver.hpp"

using namespace nlseg;
using doctest::Approx;

namespace {

constexpr double kPi = 3.14159265358979323846;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Ok;
}

Grid box(int nx, int ny, double h, double x0 = 0, double y0 = 0) {
  Grid g;
  g.nx = nx;
  g.ny = ny;
  g.h = h;
  g.x0 = x0;
  g.y0 = y0;
  return g;
}

GridDomain annulus(double h) {
  DomainSpec s;
  s.shape = "annulus";
  s.a = 1;
  s.b = 6;
  s.h = h;
  return build_domain(s, Norm::euclidean());
}

}  // namespace

TEST_CASE("ball stencil weights") {
  BallStencil s = build_ball_stencil(Norm::euclidean(), 1.0 / 64, HForm::Integral);
  CHECK(std::fabs(s.weight_sum() - kPi) <= 0.02);
  BallStencil q = build_ball_stencil(Norm::euclidean(), 1.0 / 64, HForm::Integral, 1.0, {1.0, 1.0});
  CHECK(std::fabs(q.weight_sum() - kPi / 3) <= 0.02);
  BallStencil sup = build_ball_stencil(Norm::euclidean(), 1.0 / 64, HForm::Sup);
  CHECK(sup.weight_sum() == Approx(static_cast<double>(sup.offsets.size())));
  for (double w : sup.weights) CHECK(w == 1.0);
  // symmetric offsets
  std::set<std::pair<int, int>> offs(s.offsets.begin(), s.offsets.end());
  for (auto [i, j] : s.offsets) CHECK(offs.count({-i, -j}));
  // O(h) convergence of the weight sum
  BallStencil c1 = build_ball_stencil(Norm::euclidean(), 1.0 / 32, HForm::Integral);
  CHECK(std::fabs(s.weight_sum() - kPi) <= std::fabs(c1.weight_sum() - kPi) + 1e-3);
  CHECK(code_of([] { build_ball_stencil(Norm::euclidean(), 1.0 / 16, HForm::Integral); }) ==
        ErrorCode::ResolutionTooCoarse);
}

TEST_CASE("H on simple fields") {
  const double h = 1.0 / 32;
  Grid g = box(192, 192, h, -3, -3);
  BallStencil s = build_ball_stencil(Norm::euclidean(), h, HForm::Integral);
  Field one(g.size(), 1.0), half(g.size(), 0.0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) half[g.idx(i, j)] = g.yc(j) > 0 ? 1.0 : 0.0;
  Field a = apply_H(one, g, s), b = apply_H(half, g, s);
  CHECK(a[g.idx(96, 96)] == Approx(s.weight_sum()).epsilon(1e-12));
  // cell row just above the dividing line; its ball is half covered up to O(h)
  CHECK(std::fabs(b[g.idx(96, 96)] - kPi / 2) <= 0.03 + 2 * h);
}

TEST_CASE("H properties") {
  const double h = 1.0 / 40;
  Grid g = box(128, 96, h);
  g.mirror_x = true;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(0, 1);
  Field w1(g.size()), w2(g.size());
  for (std::size_t p = 0; p < g.size(); ++p) {
    w1[p] = U(rng);
    w2[p] = w1[p] + U(rng);
  }
  for (HForm form : {HForm::Integral, HForm::Sup}) {
    BallStencil st = build_ball_stencil(Norm::ellipse(1.2, 0.9), h, form);
    HOperator fast(g, st, HOperator::Mode::Fast), direct(g, st, HOperator::Mode::Direct);
    Field a = fast.apply(w1), b = fast.apply(w2), d = direct.apply(w1);
    double scale = 0, diff = 0;
    for (std::size_t p = 0; p < g.size(); ++p) {
      CHECK(a[p] <= b[p] + 1e-12);  // monotone
      scale = std::max(scale, std::fabs(d[p]));
      diff = std::max(diff, std::fabs(a[p] - d[p]));
    }
    if (form == HForm::Sup) CHECK(diff == 0);
    else
      CHECK(diff <= 1e-12 * scale);
    // scaling
    Field w3 = w1;
    for (auto& x : w3) x *= 2.5;
    Field c = direct.apply(w3);
    for (std::size_t p = 0; p < g.size(); ++p) CHECK(c[p] == Approx(2.5 * d[p]).epsilon(1e-12));
    // locality: a change outside the ball of cell (40, 48) leaves it bit-exact
    Field w4 = w1;
    w4[g.idx(40 + 56, 48)] += 10;
    CHECK(direct.apply(w4)[g.idx(40, 48)] == d[g.idx(40, 48)]);
  }
}

TEST_CASE("screened solve") {
  const double h = 1.0 / 64;
  Grid g = box(66, 12, h, -h / 2, -h / 2);  // cell i at x = i h
  Mask unknown(g.size(), 0);
  Field lin(g.size()), zero(g.size(), 0.0);
  const double L = (g.nx - 1) * h;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      lin[g.idx(i, j)] = g.xc(i) / L;
      unknown[g.idx(i, j)] = i > 0 && i < g.nx - 1 && j > 0 && j < g.ny - 1;
    }
  ScreenedSolver solver(g, unknown, {LinearMethod::Multigrid, 1e-13, 0});
  Field v = solver.solve(zero, lin);
  for (std::size_t p = 0; p < g.size(); ++p)
    if (unknown[p]) CHECK(std::fabs(v[p] - lin[p]) <= 1e-10);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(0, 50);
  Field c(g.size());
  for (auto& x : c) x = U(rng);
  Field w = solver.solve(c, lin);
  for (std::size_t p = 0; p < g.size(); ++p) {
    CHECK(w[p] >= -1e-12);
    CHECK(w[p] <= 1 + 1e-12);
  }
  Field neg = c;
  neg[g.idx(10, 5)] = -1;
  CHECK(code_of([&] { solver.solve(neg, lin); }) == ErrorCode::NegativeCoefficient);
}

TEST_CASE("fixed-point sweep") {
  GridDomain gd = annulus(1.0 / 32);
  SUBCASE("zero competitor data") {
    BoundaryData bd = make_boundary_data(gd, {"annulus_rims", {1.0, 0.0}, 2, ""});
    Problem pb = make_problem(gd, bd, {}, {});
    PopulationState s0 = initial_state(pb, 0.1);
    PopulationState s1 = apply_T(pb, s0, 1.0);
    for (std::size_t p = 0; p < pb.grid().size(); ++p) {
      if (!pb.gd.omega[p]) continue;
      CHECK(s1.u[0][p] == Approx(pb.phi[0][p]).epsilon(1e-9));
      CHECK(s1.u[1][p] == 0);
    }
  }
  SUBCASE("sandwich and iteration cap") {
    BoundaryData bd = make_boundary_data(gd, {"annulus_rims", {}, 2, ""});
    Problem pb = make_problem(gd, bd, {}, {});
    SolverConfig cfg;
    cfg.max_outer = 1;
    PopulationState capped = solve_system(pb, cfg, 0.2);
    CHECK_FALSE(capped.converged);
    cfg.max_outer = 500;
    PopulationState s = solve_system(pb, cfg, 0.2);
    CHECK(s.converged);
    CHECK(s.pde_residual <= 10 * cfg.lin.tol);
    for (int i = 0; i < 2; ++i)
      for (std::size_t p = 0; p < pb.grid().size(); ++p) {
        CHECK(s.u[i][p] >= 0);
        CHECK(s.u[i][p] <= s.phi[i][p] + 1e-12);
        if (pb.gd.extended[p] && !pb.gd.omega[p]) CHECK(s.u[i][p] == bd.f[i][p]);
      }
    // a zero obstacle changes nothing
    std::vector<Field> psi(2, Field(pb.grid().size(), 0.0));
    PopulationState o = solve_system(pb, cfg, 0.2, nullptr, &psi);
    CHECK(o.iterations == s.iterations);
    CHECK(o.u == s.u);
  }
}

TEST_CASE("competition is monotone in the data") {
  GridDomain gd = annulus(1.0 / 32);
  SolverConfig cfg;
  BoundaryData lo = make_boundary_data(gd, {"annulus_rims", {1.0, 1.0}, 2, ""});
  BoundaryData hi = make_boundary_data(gd, {"annulus_rims", {1.0, 1.5}, 2, ""});
  Problem pl = make_problem(gd, lo, {}, {}), ph = make_problem(gd, hi, {}, {});
  PopulationState sl = solve_system(pl, cfg, 0.2), sh = solve_system(ph, cfg, 0.2);
  for (std::size_t p = 0; p < pl.grid().size(); ++p)
    if (gd.omega[p]) CHECK(sh.u[0][p] <= sl.u[0][p] + 1e-7);
}

TEST_CASE("continuation") {
  GridDomain gd = annulus(1.0 / 32);
  BoundaryData bd = make_boundary_data(gd, {"annulus_rims", {}, 2, ""});
  SolverConfig cfg;
  cfg.eps_schedule = {0.3};
  auto states = run_continuation([&](double) { return make_problem(gd, bd, {}, {}); }, cfg);
  Problem pb = make_problem(gd, bd, {}, {});
  PopulationState direct = solve_system(pb, cfg, 0.3);
  REQUIRE(states.size() == 1);
  CHECK(states[0].u == direct.u);
}
