#include "doctest.h"

#include <cmath>
#include <functional>

#include "nlseg/analysis.hpp"
#include "nlseg/contour.hpp"
#include "nlseg/errors.hpp"
#include "nlseg/morphology.hpp"

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

template <class F>
Field sample(const Grid& g, F f) {
  Field u(g.size());
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) u[g.idx(i, j)] = f(g.xc(i), g.yc(j));
  return u;
}

InterfaceSet contour(const Field& u, const Grid& g, double level, int pop = 0) {
  Mask all(g.size(), 1);
  return extract_interface(u, g, all, all, level, pop);
}

}  // namespace

TEST_CASE("support extraction") {
  Grid g = box(64, 64, 1.0 / 16, -2, -2);
  Mask omega(g.size(), 1);
  Support z = extract_support(Field(g.size(), 0.0), omega, 0, 1e-3);
  for (auto v : z.mask) CHECK(v == 0);
  Support p = extract_support(sample(g, [](double x, double) { return 2 + x; }), omega, 0, 1e-3);
  for (auto v : p.mask) CHECK(v == 1);
  CHECK(p.threshold == Approx(1e-3 * (2 + g.xc(63))));
}

TEST_CASE("support separation") {
  const double h = 1.0 / 16;
  Grid g = box(128, 64, h, 0, 0);
  Mask a(g.size(), 0), b(g.size(), 0), c(g.size(), 0);
  a[g.idx(10, 10)] = 1;
  b[g.idx(10 + 48, 10)] = 1;  // 3 units to the right
  c[g.idx(11, 10)] = 1;
  auto d = support_separation({a, b, c}, g, Norm::euclidean());
  CHECK(d[0][1] == Approx(3).epsilon(h));
  CHECK(d[1][0] == d[0][1]);
  CHECK(d[0][0] == 0);
  Mask ab = mask_or(a, c);
  CHECK(support_separation({ab, c}, g, Norm::euclidean())[0][1] == 0);
}

TEST_CASE("ball regularization") {
  const double h = 1.0 / 32;
  Grid g = box(256, 256, h, -4, -4);
  Mask disk(g.size()), notched(g.size());
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double x = g.xc(i), y = g.yc(j);
      disk[g.idx(i, j)] = std::hypot(x, y) < 2;
      const bool square = std::fabs(x) < 2.5 && std::fabs(y) < 2.5;
      const bool notch = std::fabs(x) < 0.25 && y > 1;
      notched[g.idx(i, j)] = square && !notch;
    }
  CHECK(check_ball_regularization(disk, g, Norm::euclidean()).pass);
  BallRegularity n = check_ball_regularization(notched, g, Norm::euclidean());
  CHECK_FALSE(n.pass);
  CHECK(n.outside_collar > 0);
}

TEST_CASE("interface of a cone field") {
  const double h = 1.0 / 64;
  Grid g = box(384, 384, h, -3, -3);
  // the cone (2 - r)^+ continued linearly, so the level set is the circle itself
  InterfaceSet is = contour(sample(g, [](double x, double y) { return 2 - std::hypot(x, y); }), g, 0);
  REQUIRE(is.curves.size() == 1);
  for (const auto& v : is.curves[0].v) {
    CHECK(std::hypot(v.x.x, v.x.y) == Approx(2).epsilon(1e-3));
    CHECK(v.kappa == Approx(-0.5).epsilon(0.05));
    CHECK(v.u_nu == Approx(-1).epsilon(0.05));
  }
  InterfaceSet flat = contour(sample(g, [](double x, double) { return 1 - x; }), g, 0);
  for (const auto& c : flat.curves)
    for (const auto& v : c.v) CHECK(std::fabs(v.kappa) <= 0.02);
  CHECK(code_of([&] { contour(Field(g.size(), 1.0), g, 0.5); }) == ErrorCode::DegenerateContour);
}

TEST_CASE("interface length stability") {
  auto circle = [](double h) {
    Grid g = box(static_cast<int>(6 / h), static_cast<int>(6 / h), h, -3, -3);
    return contour(sample(g, [](double x, double y) { return 2 - std::hypot(x, y); }), g, 0);
  };
  LengthStability ls = interface_length_stability(circle(1.0 / 32), circle(1.0 / 64));
  CHECK(ls.pass);
  CHECK(ls.length_h == Approx(4 * kPi).epsilon(0.01));
  auto checker = [](double h) {
    Grid g = box(static_cast<int>(4 / h), static_cast<int>(4 / h), h, 0, 0);
    return contour(sample(g, [h](double x, double y) {
                     const int cx = static_cast<int>(std::floor(x / (4 * h))), cy = static_cast<int>(std::floor(y / (4 * h)));
                     return ((cx + cy) % 2) ? 1.0 : 0.0;
                   }),
                   g, 0.5);
  };
  CHECK_FALSE(interface_length_stability(checker(1.0 / 16), checker(1.0 / 32)).pass);
}

TEST_CASE("cone exponent") {
  CHECK(cone_growth_exponent(kPi) == Approx(0));
  CHECK(cone_growth_exponent(kPi / 2) == Approx(1));
  CHECK(code_of([] { cone_growth_exponent(0); }) == ErrorCode::ZeroAngle);
  for (double t0 : {kPi / 2, 2 * kPi / 3, kPi}) {
    WedgeFit wf = fit_wedge_exponent(t0, 1.0 / 256);
    CHECK(std::fabs(wf.exponent - kPi / t0) <= 0.05);
    CHECK(wf.r2 >= 0.999);
  }
}

TEST_CASE("tangent cone angle") {
  std::vector<Vec2> line, corner;
  for (int k = -40; k <= 40; ++k) {
    line.push_back({k * 0.01, 0});
    corner.push_back({std::fabs(k) * 0.01, k * 0.01});
  }
  CHECK(tangent_cone_angle(line, false, 40, 0.05, 0.2) == Approx(kPi));
  CHECK(tangent_cone_angle(corner, false, 40, 0.05, 0.2) == Approx(kPi / 2));
  CHECK(std::isnan(tangent_cone_angle(line, false, 0, 0.05, 0.2)));
}

TEST_CASE("singular points") {
  const double h = 1.0 / 64;
  Grid g = box(384, 384, h, -3, -3);
  SUBCASE("parallel interfaces") {
    InterfaceSet a = contour(sample(g, [](double x, double) { return -x - 0.5; }), g, 0, 0);
    InterfaceSet b = contour(sample(g, [](double x, double) { return x - 0.5; }), g, 0, 1);
    CHECK(detect_singular_points(a, b, Norm::euclidean()).empty());
  }
  SUBCASE("crossing cones") {
    // population 1 occupies two right-angle cones opening along the x axis with
    // tips at (+-1/sqrt 2, 0); population 2 the two along the y axis
    const double t = 1 / std::sqrt(2.0);
    auto cones = [t](double x, double y, bool horizontal) {
      const double u = horizontal ? std::fabs(x) : std::fabs(y), v = horizontal ? std::fabs(y) : std::fabs(x);
      // signed distance-like field, positive inside {u - t > v}
      return ((u - t) - v) / std::sqrt(2.0);
    };
    InterfaceSet a = contour(sample(g, [&](double x, double y) { return cones(x, y, true); }), g, 0, 0);
    InterfaceSet b = contour(sample(g, [&](double x, double y) { return cones(x, y, false); }), g, 0, 1);
    // points where the cones leave the box are truncation artefacts
    std::vector<SingularPoint> sp;
    for (const auto& s : detect_singular_points(a, b, Norm::euclidean()))
      if (std::hypot(s.location.x, s.location.y) < 1.5) sp.push_back(s);
    REQUIRE(sp.size() == 2);
    for (const auto& s : sp) {
      CHECK(std::fabs(s.theta - kPi / 2) <= 10 * kPi / 180);
      CHECK(std::fabs(s.partner_theta - s.theta) <= 10 * kPi / 180);
      CHECK(s.distance == Approx(1).epsilon(2 * h));
    }
    for (std::size_t i = 0; i < sp.size(); ++i)
      for (std::size_t j = i + 1; j < sp.size(); ++j)
        CHECK(std::hypot(sp[i].location.x - sp[j].location.x, sp[i].location.y - sp[j].location.y) >= 10 * h);
  }
}

TEST_CASE("free-boundary pairing") {
  auto line_set = [](double x0, double nx, double kappa, int pop) {
    InterfaceSet s;
    s.population = pop;
    s.h = 1.0 / 64;
    InterfaceCurve c;
    for (int k = 0; k < 65; ++k) {
      InterfaceVertex v;
      v.x = {x0, k / 64.0};
      v.n = {nx, 0};
      v.kappa = kappa;
      v.u_nu = -1;
      c.v.push_back(v);
    }
    s.curves.push_back(c);
    return s;
  };
  FbReport flat = check_fb_condition(line_set(0, 1, 0, 0), line_set(1, -1, 0, 1), 2.0 / 64);
  CHECK(flat.pass);
  CHECK(flat.median_ratio == Approx(1));
  CHECK(code_of([&] { check_fb_condition(line_set(0, 1, 0.95, 0), line_set(1, -1, 0, 1), 2.0 / 64); }) ==
        ErrorCode::CurvatureNearFocal);
}

TEST_CASE("mass balance") {
  const double h = 1.0 / 32;
  Grid g = box(192, 64, h, 0, 0);
  Mask omega(g.size(), 1);
  // mirror-image profiles across x = 3
  Field u1 = sample(g, [](double x, double) { return x < 2.5 ? (2.5 - x) * (2.5 - x) : 0.0; });
  Field u2 = sample(g, [](double x, double) { return x > 3.5 ? (x - 3.5) * (x - 3.5) : 0.0; });
  Mask d(g.size()), e(g.size()), tiny(g.size(), 0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double x = g.xc(i), y = g.yc(j);
      const bool band = y > 0.25 && y < 1.75;
      d[g.idx(i, j)] = band && x > 0.25 && x < 3;
      e[g.idx(i, j)] = band && x > 3 && x < 5.75;
    }
  MassBalance mb = check_mass_balance(u1, u2, g, omega, d, e);
  CHECK(mb.rel_diff <= 0.05);
  tiny[g.idx(20, 20)] = 1;
  CHECK(code_of([&] { check_mass_balance(u1, u2, g, omega, tiny, e); }) == ErrorCode::PatchTooSmall);
}

TEST_CASE("area ratio") {
  const double h = 1.0 / 64;
  Grid g = box(640, 640, h, -5, -5);
  for (double R : {2.0, 4.0}) {
    InterfaceSet is = contour(sample(g, [R](double x, double y) { return R - std::hypot(x, y); }), g, 0);
    const auto& c = is.curves.at(0);
    const int n = static_cast<int>(c.v.size());
    AreaRatio ar = check_area_ratio(c, n / 3, n / 3 + n / 6);
    CHECK(ar.ratio == Approx(1 + 1 / R).epsilon(0.05));
    CHECK(ar.target == Approx(1 + 1 / R).epsilon(0.05));
  }
}

TEST_CASE("decay fit") {
  const double h = 1.0 / 16;
  Grid g = box(64, 64, h, 0, 0);
  Mask region(g.size(), 0), data(g.size(), 0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      region[g.idx(i, j)] = g.xc(i) > 2;
      data[g.idx(i, j)] = g.xc(i) < 0.5;
    }
  std::vector<double> eps = {0.2, 0.1, 0.05, 0.025}, vals;
  for (double e : eps) vals.push_back(0.3 * std::exp(-0.4 / e));
  DecayEstimate de = fit_decay(eps, vals, {3, 2}, g, region, data);
  CHECK(de.slope == Approx(-0.4));
  CHECK(de.r2 == Approx(1));
  CHECK(code_of([&] { fit_decay(eps, vals, {0.2, 2}, g, region, data); }) == ErrorCode::ProbeOutsideDecayRegion);
  CHECK(code_of([&] { fit_decay(eps, vals, {1.0, 2}, g, region, data); }) == ErrorCode::ProbeOutsideDecayRegion);
}

TEST_CASE("line fit") {
  LineFit lf = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(lf.slope == Approx(2));
  CHECK(lf.intercept == Approx(1));
  CHECK(lf.r2 == Approx(1));
}
