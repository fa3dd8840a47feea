#include "doctest.h"

#include <cmath>

#include "nlseg/domain.hpp"
#include "nlseg/errors.hpp"
#include "nlseg/obstacle.hpp"

using namespace nlseg;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Disk {
  GridDomain gd;
  BoundaryData bd;
};

Disk disk(double h) {
  DomainSpec s;
  s.shape = "disk";
  s.radius = 3;
  s.h = h;
  Disk d;
  d.gd = build_domain(s, Norm::euclidean());
  d.bd = make_boundary_data(d.gd, {"disk_sectors", {}, 2, ""});
  return d;
}

}  // namespace

TEST_CASE("obstacle invariants") {
  Disk d = disk(1.0 / 32);
  ObstacleSpec sp = build_obstacles(d.gd, d.bd, 0.25, 0.5, Norm::euclidean());
  REQUIRE(sp.A.size() == 2);
  CHECK(sp.a == doctest::Approx(0.25));
  for (int i = 0; i < 2; ++i)
    for (std::size_t p = 0; p < d.gd.grid.size(); ++p) {
      if (sp.A[i][p]) CHECK(d.gd.omega[p]);
      CHECK(sp.psi[i][p] >= -1e-12);
      CHECK(sp.psi[i][p] <= 1 + 1e-12);
      if (d.gd.omega[p] && !sp.A[i][p]) CHECK(sp.psi[i][p] == 0);
      if (!d.gd.omega[p] && d.gd.extended[p]) CHECK(sp.psi[i][p] == d.bd.f[i][p]);
    }
  ObstacleSpec wide = build_obstacles(d.gd, d.bd, 0.25, 0.7, Norm::euclidean());
  for (int i = 0; i < 2; ++i)
    for (std::size_t p = 0; p < d.gd.grid.size(); ++p)
      if (sp.A[i][p]) CHECK(wide.A[i][p]);
  // the barrier is exact up to the O(h) placement of the discrete boundary,
  // where its slope is 1 / (mu log(lambda / mu))
  const double slope = 1 / (0.25 * std::log(2.0));
  const double coarse = barrier_margin(sp, d.gd, 0);
  CHECK(coarse >= -slope * d.gd.grid.h);
  Disk f = disk(1.0 / 64);
  const double fine = barrier_margin(build_obstacles(f.gd, f.bd, 0.25, 0.5, Norm::euclidean()), f.gd, 0);
  CHECK(fine >= -slope * f.gd.grid.h);
  MESSAGE("barrier margin " << coarse << " at h = 1/32, " << fine << " at h = 1/64");
}

TEST_CASE("obstacle corner angles") {
  Disk d = disk(1.0 / 64);
  ObstacleSpec near_zero_mu = build_obstacles(d.gd, d.bd, 0.02, 0.5, Norm::euclidean());
  ObstacleSpec near_lambda = build_obstacles(d.gd, d.bd, 0.48, 0.5, Norm::euclidean());
  for (const auto& v : near_zero_mu.angles)
    for (double a : v) CHECK(std::fabs(a - kPi / 2) <= 10 * kPi / 180);
  for (const auto& v : near_lambda.angles)
    for (double a : v) CHECK(a <= 10 * kPi / 180 + 0.2);
}

TEST_CASE("obstacle slope grows like 1/a") {
  Disk d = disk(1.0 / 64);
  SlopeReport wide = check_obstacle_gradient(build_obstacles(d.gd, d.bd, 0.1, 0.5, Norm::euclidean()), d.gd);
  SlopeReport narrow = check_obstacle_gradient(build_obstacles(d.gd, d.bd, 0.3, 0.5, Norm::euclidean()), d.gd);
  for (int i = 0; i < 2; ++i) {
    REQUIRE(wide.min_slope[i] > 0);
    const double ratio = narrow.min_slope[i] / wide.min_slope[i];
    CHECK(ratio >= 1.6);
    CHECK(ratio <= 2.4);
  }
}

TEST_CASE("obstacle errors") {
  Disk d = disk(1.0 / 32);
  auto code = [&](double mu, double lambda) {
    try {
      build_obstacles(d.gd, d.bd, mu, lambda, Norm::euclidean());
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Ok;
  };
  CHECK(code(0.5, 0.4) == ErrorCode::InvalidArgument);
  CHECK(code(0.1, 1.2) == ErrorCode::InvalidArgument);
}
