#pragma once

#include <string>
#include <vector>

namespace nlseg {

// Annulus a < r < b with data f_a on the inner strip and f_b on the outer.
struct RadialProblem {
  double a = 1, b = 6;
  double fa = 1, fb = 1;
  double epsilon = 0.1;
  int n_r = 2240;  // cells over [max(a-1, 0), b+1]
};

struct RadialOptions {
  double tol = 1e-8;  // max |T(u) - u| / max(f_a, f_b)
  int max_iter = 20000;
  int anderson_depth = 4;
  double mixing = 0.9;
};

struct RadialSolution {
  double lo = 0, dr = 0;
  std::vector<double> r, u1, u2;
  int first = 0, last = -1;  // Omega cells are [first, last]
  double residual = 0;
  int iterations = 0;
  bool converged = false;
};

// Length of {|y| = s} inside the unit disk centred at (r, 0).
double ring_kernel(double r, double s);

// Throws NotConverged (the unconverged solution is attached only through the
// message). A warm start must have the same grid.
RadialSolution solve_radial_epsilon(const RadialProblem& rp, const RadialOptions& opt = {},
                                    const RadialSolution* warm = nullptr);

// Inner free-boundary radius R of the limit problem: f_a/log(R/a) = f_b/log(b/(R+1)).
// Throws NoRoot.
double solve_radial_limit(double a, double b, double fa, double fb);
double radial_flux_balance(double R, double a, double b, double fa, double fb);

struct LimitProfile {
  double u1 = 0, u2 = 0;
  double du1 = 0, du2 = 0;  // radial derivatives
};
LimitProfile radial_limit_profile(double a, double b, double fa, double fb, double R, double r);

// Outer edge of supp u1 and inner edge of supp u2 inside the annulus, with the
// threshold max(delta_abs, delta_rel * max u_i) and linear interpolation
// between cell centres.
struct RadialEdges {
  double r1 = 0, r2 = 0;
};
RadialEdges radial_support_edges(const RadialSolution& s, double delta_abs, double delta_rel);

void write_radial_csv(const std::string& path, const RadialSolution& s);

}  // namespace nlseg
