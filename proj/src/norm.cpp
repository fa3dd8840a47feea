#include "nlseg/norm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nlseg/errors.hpp"

namespace nlseg {

Norm Norm::ellipse(double ax, double ay) {
  if (!(ax > 0) || !(ay > 0)) fail(ErrorCode::InvalidArgument, "ellipse semi-axes must be positive");
  Norm n;
  n.kind = Kind::Ellipse;
  n.ax = ax;
  n.ay = ay;
  return n;
}

Norm Norm::smoothed_p(double p, double blend) {
  if (!(p >= 2)) fail(ErrorCode::InvalidArgument, "smoothed_p needs p >= 2");
  if (!(blend >= 0 && blend <= 1)) fail(ErrorCode::InvalidArgument, "blend must lie in [0,1]");
  Norm n;
  n.kind = Kind::SmoothedP;
  n.p = p;
  n.blend = blend;
  return n;
}

double Norm::operator()(double x, double y) const {
  switch (kind) {
    case Kind::Euclidean:
      return std::sqrt(x * x + y * y);
    case Kind::Ellipse: {
      double u = x / ax, v = y / ay;
      return std::sqrt(u * u + v * v);
    }
    case Kind::SmoothedP: {
      double X = std::fabs(x), Y = std::fabs(y);
      double m = std::max(X, Y);
      if (m == 0) return 0;
      double lp = m * std::pow(std::pow(X / m, p) + std::pow(Y / m, p), 1.0 / p);
      return std::sqrt((1 - blend) * lp * lp + blend * (x * x + y * y));
    }
  }
  return 0;
}

std::string Norm::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Euclidean: os << "euclidean"; break;
    case Kind::Ellipse: os << "ellipse(" << ax << "," << ay << ")"; break;
    case Kind::SmoothedP: os << "smoothed_p(" << p << "," << blend << ")"; break;
  }
  return os.str();
}

double eval_norm(const Norm& n, double x, double y) { return n(x, y); }

ConvexityBounds estimate_convexity_bounds(const Norm& n, int n_samples, double floor) {
  if (n_samples < 8) fail(ErrorCode::InvalidArgument, "need at least 8 samples");
  auto f = [&](double x, double y) {
    double r = n(x, y);
    return 0.5 * r * r;
  };
  ConvexityBounds b{1e300, -1e300};
  for (int k = 0; k < n_samples; ++k) {
    double t = 2 * std::numbers::pi * k / n_samples;
    double x = std::cos(t), y = std::sin(t);
    const double s = 1e-4;  // relative to the unit evaluation radius
    double f0 = f(x, y);
    double fxx = (f(x + s, y) - 2 * f0 + f(x - s, y)) / (s * s);
    double fyy = (f(x, y + s) - 2 * f0 + f(x, y - s)) / (s * s);
    double fxy = (f(x + s, y + s) - f(x + s, y - s) - f(x - s, y + s) + f(x - s, y - s)) / (4 * s * s);
    double tr = 0.5 * (fxx + fyy);
    double disc = std::sqrt(0.25 * (fxx - fyy) * (fxx - fyy) + fxy * fxy);
    b.a = std::min(b.a, tr - disc);
    b.A = std::max(b.A, tr + disc);
  }
  if (b.a < floor) {
    std::ostringstream os;
    os << n.describe() << ": estimated a = " << b.a << " below floor " << floor;
    fail(ErrorCode::DegenerateNorm, os.str());
  }
  return b;
}

EquivalenceConstants estimate_equivalence(const Norm& n, int n_samples) {
  EquivalenceConstants c{1e300, 0};
  for (int k = 0; k < n_samples; ++k) {
    double t = 2 * std::numbers::pi * k / n_samples;
    double r = n(std::cos(t), std::sin(t));
    c.c1 = std::min(c.c1, r);
    c.c2 = std::max(c.c2, r);
  }
  return c;
}

EquivalenceConstants exact_equivalence(const Norm& n) {
  switch (n.kind) {
    case Norm::Kind::Euclidean: return {1, 1};
    case Norm::Kind::Ellipse: return {1 / std::max(n.ax, n.ay), 1 / std::min(n.ax, n.ay)};
    case Norm::Kind::SmoothedP: {
      // 2^(1/p - 1/2) |x| <= lp(x) <= |x| for p >= 2
      double lo = std::pow(2.0, 2.0 / n.p - 1.0);
      return {std::sqrt((1 - n.blend) * lo + n.blend), 1};
    }
  }
  return {1, 1};
}

double ball_extent_x(const Norm& n) { return 1.0 / n(1, 0); }
double ball_extent_y(const Norm& n) { return 1.0 / n(0, 1); }

double curvature_transport(double kappa0, double k) {
  double d = 1 - kappa0 * k;
  if (std::fabs(d) < 1e-14) {
    std::ostringstream os;
    os << "1 - kappa0*k = 0 at kappa0=" << kappa0 << ", k=" << k;
    fail(ErrorCode::FocalSingularity, os.str());
  }
  return kappa0 / d;
}

}  // namespace nlseg
