#include "nlseg/radial.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nlseg/anderson.hpp"
#include "nlseg/errors.hpp"

namespace nlseg {

namespace {

// Banded interaction matrix: c(r_i) = sum_k w[i][k] u(r_{k0[i] + k}).
struct Band {
  std::vector<int> k0;
  std::vector<std::vector<double>> w;

  void apply(const std::vector<double>& u, std::vector<double>& out) const {
    for (std::size_t i = 0; i < k0.size(); ++i) {
      double s = 0;
      const auto& wi = w[i];
      for (std::size_t k = 0; k < wi.size(); ++k) s += wi[k] * u[k0[i] + k];
      out[i] = s;
    }
  }
};

Band build_band(const std::vector<double>& r, double dr) {
  const int n = static_cast<int>(r.size());
  Band B;
  B.k0.resize(n);
  B.w.resize(n);
  for (int i = 0; i < n; ++i) {
    int lo = std::max(0, static_cast<int>(std::floor((r[i] - 1.0 - r[0]) / dr)) - 1);
    int hi = std::min(n - 1, static_cast<int>(std::ceil((r[i] + 1.0 - r[0]) / dr)) + 1);
    B.k0[i] = lo;
    for (int k = lo; k <= hi; ++k) B.w[i].push_back(ring_kernel(r[i], r[k]) * dr);
  }
  return B;
}

// Solves (1/r)(r v')' = c v on cells [first, last] with v frozen elsewhere.
void screened_1d(const std::vector<double>& r, double dr, const std::vector<double>& c, int first, int last,
                 std::vector<double>& v) {
  const int m = last - first + 1;
  std::vector<double> lo(m), di(m), up(m), rhs(m);
  for (int k = 0; k < m; ++k) {
    int i = first + k;
    double rm = r[i] - 0.5 * dr, rp = r[i] + 0.5 * dr;
    lo[k] = -rm;
    up[k] = -rp;
    di[k] = rm + rp + c[i] * r[i] * dr * dr;
    rhs[k] = 0;
  }
  rhs[0] -= lo[0] * v[first - 1];
  rhs[m - 1] -= up[m - 1] * v[last + 1];
  // Thomas algorithm; diagonally dominant since c >= 0
  for (int k = 1; k < m; ++k) {
    double f = lo[k] / di[k - 1];
    di[k] -= f * up[k - 1];
    rhs[k] -= f * rhs[k - 1];
  }
  v[last] = rhs[m - 1] / di[m - 1];
  for (int k = m - 2; k >= 0; --k) v[first + k] = (rhs[k] - up[k] * v[first + k + 1]) / di[k];
}

}  // namespace

double ring_kernel(double r, double s) {
  if (!(r > 0) || !(s > 0)) return 0.0;
  if (std::fabs(r - s) >= 1.0) return 0.0;
  double c = (r * r + s * s - 1.0) / (2.0 * r * s);
  c = std::clamp(c, -1.0, 1.0);
  return 2.0 * s * std::acos(c);
}

RadialSolution solve_radial_epsilon(const RadialProblem& rp, const RadialOptions& opt, const RadialSolution* warm) {
  if (!(rp.a > 0) || !(rp.b > rp.a)) fail(ErrorCode::InvalidArgument, "need 0 < a < b");
  if (!(rp.b - rp.a > 2)) fail(ErrorCode::GeometryTooThin, "need b - a > 2");
  if (!(rp.fa >= 0) || !(rp.fb >= 0)) fail(ErrorCode::NegativeData, "boundary densities must be >= 0");
  if (!(rp.epsilon > 0)) fail(ErrorCode::InvalidArgument, "epsilon must be positive");
  if (rp.n_r < 16) fail(ErrorCode::InvalidArgument, "n_r too small");

  RadialSolution s;
  s.lo = std::max(rp.a - 1.0, 0.0);
  s.dr = (rp.b + 1.0 - s.lo) / rp.n_r;
  const int n = rp.n_r;
  s.r.resize(n);
  for (int i = 0; i < n; ++i) s.r[i] = s.lo + (i + 0.5) * s.dr;
  s.first = n;
  s.last = -1;
  for (int i = 0; i < n; ++i)
    if (s.r[i] > rp.a && s.r[i] < rp.b) {
      s.first = std::min(s.first, i);
      s.last = std::max(s.last, i);
    }
  if (s.last - s.first < 4) fail(ErrorCode::ResolutionTooCoarse, "too few radial cells in the annulus");

  s.u1.assign(n, 0.0);
  s.u2.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    if (s.r[i] <= rp.a) s.u1[i] = rp.fa;
    if (s.r[i] >= rp.b) s.u2[i] = rp.fb;
  }
  // harmonic majorants as the start (and the upper clip)
  std::vector<double> zero(n, 0.0), phi1 = s.u1, phi2 = s.u2;
  screened_1d(s.r, s.dr, zero, s.first, s.last, phi1);
  screened_1d(s.r, s.dr, zero, s.first, s.last, phi2);
  s.u1 = phi1;
  s.u2 = phi2;
  if (warm) {
    if (warm->r.size() != s.r.size() || std::fabs(warm->dr - s.dr) > 1e-15)
      fail(ErrorCode::InvalidArgument, "warm start grid differs");
    for (int i = s.first; i <= s.last; ++i) {
      s.u1[i] = warm->u1[i];
      s.u2[i] = warm->u2[i];
    }
  }

  const Band band = build_band(s.r, s.dr);
  const double ie2 = 1.0 / (rp.epsilon * rp.epsilon);
  const double scale = std::max({rp.fa, rp.fb, 1e-300});
  const int m = s.last - s.first + 1;
  std::vector<double> c1(n), c2(n), v1, v2, x(2 * m), g(2 * m);

  auto T = [&](const std::vector<double>& u1, const std::vector<double>& u2) {
    band.apply(u2, c1);
    band.apply(u1, c2);
    for (int i = 0; i < n; ++i) {
      c1[i] *= ie2;
      c2[i] *= ie2;
    }
    v1 = u1;
    v2 = u2;
    screened_1d(s.r, s.dr, c1, s.first, s.last, v1);
    screened_1d(s.r, s.dr, c2, s.first, s.last, v2);
  };

  Anderson acc(opt.anderson_depth, opt.mixing);
  double prev = 1e300;
  for (int it = 1; it <= opt.max_iter; ++it) {
    T(s.u1, s.u2);
    double res = 0;
    for (int k = 0; k < m; ++k) {
      int i = s.first + k;
      x[k] = s.u1[i];
      x[m + k] = s.u2[i];
      g[k] = v1[i] - s.u1[i];
      g[m + k] = v2[i] - s.u2[i];
      res = std::max({res, std::fabs(g[k]), std::fabs(g[m + k])});
    }
    res /= scale;
    s.iterations = it;
    s.residual = res;
    if (!std::isfinite(res)) fail(ErrorCode::SolverDiverged, "non-finite radial residual");
    if (res <= opt.tol) {
      s.u1 = v1;
      s.u2 = v2;
      s.converged = true;
      return s;
    }
    if (res > 2 * prev) acc.reset();
    prev = res;
    acc.step(x, g);
    for (int k = 0; k < m; ++k) {
      int i = s.first + k;
      s.u1[i] = std::clamp(x[k], 0.0, phi1[i]);
      s.u2[i] = std::clamp(x[m + k], 0.0, phi2[i]);
    }
  }
  std::ostringstream os;
  os << "radial residual " << s.residual << " after " << s.iterations << " iterations";
  fail(ErrorCode::NotConverged, os.str());
}

double radial_flux_balance(double R, double a, double b, double fa, double fb) {
  return fa / std::log(R / a) - fb / std::log(b / (R + 1.0));
}

double solve_radial_limit(double a, double b, double fa, double fb) {
  if (!(a > 0) || !(b - a > 2)) fail(ErrorCode::NoRoot, "need a > 0 and b - a > 2");
  if (!(fa > 0) || !(fb > 0)) fail(ErrorCode::NoRoot, "both densities must be positive");
  // balance decreases from +inf at R = a to -inf at R = b - 1
  double lo = a, hi = b - 1.0;
  for (int it = 0; it < 400; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (radial_flux_balance(mid, a, b, fa, fb) > 0)
      lo = mid;
    else
      hi = mid;
  }
  double fl = std::fabs(radial_flux_balance(lo, a, b, fa, fb));
  double fh = std::fabs(radial_flux_balance(hi, a, b, fa, fb));
  double R = fl <= fh ? lo : hi;
  if (!(R > a && R < b - 1.0)) fail(ErrorCode::NoRoot, "no crossing in (a, b - 1)");
  return R;
}

LimitProfile radial_limit_profile(double a, double b, double fa, double fb, double R, double r) {
  LimitProfile p;
  if (r <= a) {
    p.u1 = fa;
  } else if (r < R) {
    double L = std::log(R / a);
    p.u1 = fa * std::log(R / r) / L;
    p.du1 = -fa / (r * L);
  }
  if (r >= b) {
    p.u2 = fb;
  } else if (r > R + 1.0) {
    double L = std::log(b / (R + 1.0));
    p.u2 = fb * std::log(r / (R + 1.0)) / L;
    p.du2 = fb / (r * L);
  }
  return p;
}

RadialEdges radial_support_edges(const RadialSolution& s, double delta_abs, double delta_rel) {
  auto threshold = [&](const std::vector<double>& u) {
    double m = 0;
    for (int i = s.first; i <= s.last; ++i) m = std::max(m, u[i]);
    return std::max(delta_abs, delta_rel * m);
  };
  RadialEdges e;
  const double t1 = threshold(s.u1), t2 = threshold(s.u2);
  e.r1 = s.r[s.first];
  for (int i = s.last; i >= s.first; --i)
    if (s.u1[i] > t1) {
      e.r1 = i < s.last ? s.r[i] + s.dr * (s.u1[i] - t1) / (s.u1[i] - s.u1[i + 1]) : s.r[i];
      break;
    }
  e.r2 = s.r[s.last];
  for (int i = s.first; i <= s.last; ++i)
    if (s.u2[i] > t2) {
      e.r2 = i > s.first ? s.r[i] - s.dr * (s.u2[i] - t2) / (s.u2[i] - s.u2[i - 1]) : s.r[i];
      break;
    }
  return e;
}

void write_radial_csv(const std::string& path, const RadialSolution& s) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  out.precision(17);
  out << "r,u1,u2\n";
  for (std::size_t i = 0; i < s.r.size(); ++i) out << s.r[i] << ',' << s.u1[i] << ',' << s.u2[i] << '\n';
}

}  // namespace nlseg
