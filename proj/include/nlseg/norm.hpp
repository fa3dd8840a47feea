#pragma once

#include <string>

namespace nlseg {

struct Norm {
  enum class Kind { Euclidean, Ellipse, SmoothedP };
  Kind kind = Kind::Euclidean;
  double ax = 1, ay = 1;      // ellipse semi-axes
  double p = 2, blend = 1;    // smoothed_p: rho^2 = (1-blend) lp^2 + blend |x|^2

  static Norm euclidean() { return {}; }
  static Norm ellipse(double ax, double ay);
  static Norm smoothed_p(double p, double blend);

  double operator()(double x, double y) const;
  bool is_euclidean() const { return kind == Kind::Euclidean; }
  std::string describe() const;
};

double eval_norm(const Norm& n, double x, double y);

struct ConvexityBounds {
  double a = 0, A = 0;
};

// Extreme eigenvalues of finite-difference Hessians of rho^2/2 sampled on the
// unit circle. Throws DegenerateNorm when a < floor.
ConvexityBounds estimate_convexity_bounds(const Norm& n, int n_samples, double floor = 1e-3);

struct EquivalenceConstants {
  double c1 = 1, c2 = 1;  // c1 |x| <= rho(x) <= c2 |x|
};

EquivalenceConstants estimate_equivalence(const Norm& n, int n_samples);
// Closed-form bounds, valid for every x (used to prefilter exact morphology).
EquivalenceConstants exact_equivalence(const Norm& n);

// Largest |x| (resp. |y|) coordinate reached by the closed unit ball.
double ball_extent_x(const Norm& n);
double ball_extent_y(const Norm& n);

// Curvature of the level set at distance k along the normal from a curve of
// signed curvature kappa0: kappa0 / (1 - kappa0 k).
double curvature_transport(double kappa0, double k);

}  // namespace nlseg
