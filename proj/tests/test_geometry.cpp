#include "doctest.h"

#include <cmath>
#include <functional>
#include <random>

#include "nlseg/domain.hpp"
#include "nlseg/errors.hpp"
#include "nlseg/linsolve.hpp"
#include "nlseg/morphology.hpp"
#include "nlseg/norm.hpp"

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

Grid box(int nx, int ny, double h, double x0, double y0) {
  Grid g;
  g.nx = nx;
  g.ny = ny;
  g.h = h;
  g.x0 = x0;
  g.y0 = y0;
  return g;
}

Mask disk_mask(const Grid& g, double r) {
  Mask m(g.size(), 0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) m[g.idx(i, j)] = std::hypot(g.xc(i), g.yc(j)) < r;
  return m;
}

std::size_t count_set(const Mask& m) {
  std::size_t n = 0;
  for (auto v : m) n += v != 0;
  return n;
}

}  // namespace

TEST_CASE("norm values") {
  CHECK(eval_norm(Norm::euclidean(), 3, 4) == Approx(5));
  CHECK(eval_norm(Norm::ellipse(2, 1), 2, 0) == Approx(1));
  CHECK(eval_norm(Norm::smoothed_p(4, 0), 1, 1) == Approx(std::pow(2.0, 0.25)).epsilon(1e-12));
}

TEST_CASE("norm symmetry and homogeneity") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-3, 3);
  for (const Norm& n : {Norm::euclidean(), Norm::ellipse(2, 1), Norm::smoothed_p(4, 0.5)})
    for (int t = 0; t < 200; ++t) {
      const double x = U(rng), y = U(rng), s = std::fabs(U(rng)) + 0.1;
      CHECK(n(-x, -y) == Approx(n(x, y)).epsilon(1e-14));
      CHECK(std::fabs(n(s * x, s * y) - s * n(x, y)) <= 1e-12 * s * n(x, y));
    }
  CHECK(Norm::ellipse(2, 1)(0, 0) == 0);
}

TEST_CASE("convexity bounds") {
  ConvexityBounds e = estimate_convexity_bounds(Norm::euclidean(), 64);
  CHECK(e.a == Approx(1).epsilon(1e-4));
  CHECK(e.A == Approx(1).epsilon(1e-4));
  ConvexityBounds el = estimate_convexity_bounds(Norm::ellipse(2, 1), 64);
  CHECK(el.a == Approx(0.25).epsilon(1e-3));
  CHECK(el.A == Approx(1).epsilon(1e-3));
  CHECK(code_of([] { estimate_convexity_bounds(Norm::smoothed_p(4, 0), 64); }) == ErrorCode::DegenerateNorm);
  EquivalenceConstants ec = estimate_equivalence(Norm::ellipse(2, 1), 256);
  CHECK(ec.c1 <= 1.0 + 1e-12);
  CHECK(ec.c2 >= 1.0 - 1e-12);
}

TEST_CASE("curvature transport") {
  CHECK(curvature_transport(0, 1) == 0);
  CHECK(curvature_transport(0.5, 1) == Approx(1));
  CHECK(curvature_transport(-0.5, 1) == Approx(-1.0 / 3));
  CHECK(code_of([] { curvature_transport(1, 1); }) == ErrorCode::FocalSingularity);
  for (double k0 : {-0.7, -0.2, 0.1, 0.3})
    for (double k1 : {0.2, 0.5})
      for (double k2 : {0.1, 0.4}) {
        if (1 - k0 * (k1 + k2) <= 0.05) continue;
        CHECK(std::fabs(curvature_transport(curvature_transport(k0, k1), k2) - curvature_transport(k0, k1 + k2)) <=
              1e-12);
      }
}

TEST_CASE("distance field") {
  const double h = 1.0 / 16;
  Grid g = box(160, 160, h, -5, -5);
  SUBCASE("single cell") {
    Mask m(g.size(), 0);
    m[g.idx(80, 80)] = 1;  // centre (h/2, h/2)
    Field d = rho_distance_field(m, g, Norm::euclidean());
    const int i = 80 + 48, j = 80 + 64;  // query (3, 4) relative to the cell
    CHECK(d[g.idx(i, j)] == Approx(5).epsilon(h));
  }
  SUBCASE("disk radius 1") {
    Mask m = disk_mask(g, 1);
    Field d = rho_distance_field(m, g, Norm::euclidean());
    for (int i = 0; i < g.nx; ++i) {
      const double x = g.xc(i), y = g.yc(80);
      if (std::fabs(std::hypot(x, y) - 2.5) < h / 2) CHECK(std::fabs(d[g.idx(i, 80)] - 1.5) <= h);
    }
  }
  SUBCASE("ellipse norm against brute force") {
    const Norm n = Norm::ellipse(2, 1);
    Mask m = disk_mask(g, 1);
    Field d = rho_distance_field(m, g, n);
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> I(0, 159);
    for (int t = 0; t < 60; ++t) {
      const int qi = I(rng), qj = I(rng);
      double best = 1e300;
      for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
          if (m[g.idx(i, j)]) best = std::min(best, n((qi - i) * h, (qj - j) * h));
      CHECK(std::fabs(d[g.idx(qi, qj)] - best) <= 1e-12);
    }
    // query (3, 0)
    const int qi = 80 + 47, qj = 80;
    CHECK(d[g.idx(qi, qj)] >= 1.0 - h);
    CHECK(d[g.idx(qi, qj)] <= 2.0);
  }
  CHECK(code_of([&] { rho_distance_field(Mask(g.size(), 0), g, Norm::euclidean()); }) == ErrorCode::EmptySet);
}

TEST_CASE("distance field is 1-Lipschitz") {
  const double h = 1.0 / 16;
  Grid g = box(96, 96, h, -3, -3);
  const Norm n = Norm::smoothed_p(4, 0.5);
  Mask m = disk_mask(g, 0.7);
  Field d = rho_distance_field(m, g, n);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> I(0, 95);
  for (int t = 0; t < 500; ++t) {
    const int a = I(rng), b = I(rng), c = I(rng), e = I(rng);
    CHECK(std::fabs(d[g.idx(a, b)] - d[g.idx(c, e)]) <= n((a - c) * h, (b - e) * h) + 1e-12);
  }
}

TEST_CASE("ball morphology") {
  const double h = 1.0 / 32;
  Grid g = box(256, 256, h, -4, -4);
  const Norm n = Norm::euclidean();
  SUBCASE("dilated point is the unit disk") {
    Mask p(g.size(), 0);
    p[g.idx(128, 128)] = 1;
    Mask d = dilate_by_ball(p, g, 1, n);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        CHECK(d[g.idx(i, j)] == (std::hypot((i - 128) * h, (j - 128) * h) <= 1));
  }
  SUBCASE("area of the dilated unit disk") {
    Mask d = dilate_by_ball(disk_mask(g, 1), g, 1, n);
    CHECK(std::fabs(count_set(d) * h * h - 4 * kPi) <= 2 * kPi * 2 * h);
  }
  SUBCASE("closing keeps ball-regular sets") {
    Mask s = disk_mask(g, 1.5);
    CHECK(erode_by_ball(dilate_by_ball(s, g, 1, n), g, 1, n) == s);
  }
  SUBCASE("erosion is the complement dual") {
    Mask s = disk_mask(g, 2);
    Mask e = erode_by_ball(s, g, 0.5, n);
    Mask dual = mask_not(dilate_by_ball(mask_not(s), g, 0.5, n));
    // cells within 0.5 of the box edge differ: the box exterior counts as outside
    for (int j = 16; j < g.ny - 16; ++j)
      for (int i = 16; i < g.nx - 16; ++i) CHECK(e[g.idx(i, j)] == dual[g.idx(i, j)]);
  }
}

TEST_CASE("domain construction") {
  SUBCASE("rectangle cell count") {
    DomainSpec s;
    s.shape = "rectangle";
    s.width = 6;
    s.height = 4;
    s.h = 1.0 / 64;
    s.use_symmetry = false;
    GridDomain gd = build_domain(s, Norm::euclidean());
    CHECK(count_set(gd.omega) == 384u * 256u);
    for (std::size_t p = 0; p < gd.omega.size(); ++p)
      if (gd.omega[p]) CHECK(gd.extended[p]);
  }
  SUBCASE("annulus extended region") {
    DomainSpec s;
    s.shape = "annulus";
    s.a = 1;
    s.b = 6;
    s.h = 1.0 / 64;
    GridDomain gd = build_domain(s, Norm::euclidean());
    const Grid& g = gd.grid;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const double r = std::hypot(g.xc(i), g.yc(j));
        if (r < 7 - g.h && r > g.h) CHECK(gd.extended[g.idx(i, j)]);
        if (r > 7 + g.h) CHECK_FALSE(gd.extended[g.idx(i, j)]);
        if (r > 1 + g.h && r < 6 - g.h) CHECK(gd.omega[g.idx(i, j)]);
      }
  }
  SUBCASE("errors") {
    DomainSpec s;
    s.shape = "strip";
    s.width = 5;
    s.height = 3;
    s.h = 1.0 / 64;
    CHECK(code_of([&] { build_domain(s, Norm::euclidean()); }) == ErrorCode::GeometryTooThin);
    s.height = 4;
    s.h = 1.0 / 16;
    CHECK(code_of([&] { build_domain(s, Norm::euclidean()); }) == ErrorCode::ResolutionTooCoarse);
    DomainSpec an;
    an.shape = "annulus";
    an.a = 1;
    an.b = 2.5;
    an.h = 1.0 / 64;
    CHECK(code_of([&] { build_domain(an, Norm::euclidean()); }) == ErrorCode::GeometryTooThin);
  }
}

TEST_CASE("boundary data validation") {
  DomainSpec s;
  s.shape = "annulus";
  s.a = 1;
  s.b = 6;
  s.h = 1.0 / 32;
  GridDomain gd = build_domain(s, Norm::euclidean());
  BoundaryData bd = make_boundary_data(gd, {"annulus_rims", {}, 2, ""});
  ValidationReport ok = validate_boundary_data(bd, gd, Norm::euclidean());
  CHECK(ok.ok());

  SUBCASE("negative data") {
    BoundaryData bad = bd;
    for (std::size_t p = 0; p < bad.f[0].size(); ++p)
      if (bad.f[0][p] > 0) {
        bad.f[0][p] = -1;
        break;
      }
    CHECK(code_of([&] { validate_boundary_data(bad, gd, Norm::euclidean()); }) == ErrorCode::NegativeData);
  }
  SUBCASE("empty support") {
    BoundaryData bad = bd;
    std::fill(bad.f[1].begin(), bad.f[1].end(), 0.0);
    CHECK(code_of([&] { validate_boundary_data(bad, gd, Norm::euclidean()); }) == ErrorCode::EmptySupport);
  }
  SUBCASE("supports at distance 0.9") {
    DomainSpec r;
    r.shape = "rectangle";
    r.width = 6;
    r.height = 4;
    r.h = 1.0 / 32;
    r.use_symmetry = false;
    GridDomain gr = build_domain(r, Norm::euclidean());
    BoundaryData b2;
    b2.K = 2;
    b2.f.assign(2, Field(gr.grid.size(), 0.0));
    const Mask strip = gr.strip();
    for (int j = 0; j < gr.grid.ny; ++j)
      for (int i = 0; i < gr.grid.nx; ++i) {
        const std::size_t p = gr.grid.idx(i, j);
        if (!strip[p]) continue;
        const double x = gr.grid.xc(i), y = gr.grid.yc(j);
        if (x < 0) b2.f[0][p] = 1;
        if (y > 4 && x > 0.9) b2.f[1][p] = 1;
      }
    CHECK(code_of([&] { validate_boundary_data(b2, gr, Norm::euclidean()); }) == ErrorCode::SeparationViolation);
  }
}

TEST_CASE("harmonic majorant") {
  DomainSpec s;
  s.shape = "annulus";
  s.a = 1;
  s.b = 6;
  s.h = 1.0 / 32;
  GridDomain gd = build_domain(s, Norm::euclidean());
  const Grid& g = gd.grid;
  const Mask strip = gd.strip();
  SUBCASE("constant data") {
    Field f(g.size(), 0.0);
    for (std::size_t p = 0; p < f.size(); ++p) f[p] = strip[p] ? 1.0 : 0.0;
    Field phi = harmonic_majorant(f, gd);
    for (std::size_t p = 0; p < f.size(); ++p)
      if (gd.omega[p]) CHECK(phi[p] == Approx(1).epsilon(1e-9));
  }
  SUBCASE("radial closed form") {
    Field f(g.size(), 0.0);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        if (strip[g.idx(i, j)] && std::hypot(g.xc(i), g.yc(j)) <= 1) f[g.idx(i, j)] = 1;
    Field phi = harmonic_majorant(f, gd);
    double err = 0;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const std::size_t p = g.idx(i, j);
        if (!gd.omega[p]) continue;
        CHECK(phi[p] >= 0);
        CHECK(phi[p] <= 1);
        err = std::max(err, std::fabs(phi[p] - std::log(6 / std::hypot(g.xc(i), g.yc(j))) / std::log(6.0)));
      }
    // the boundary is resolved to cell accuracy, so the error is O(h)
    CHECK(err <= 2 * g.h);
  }
}
