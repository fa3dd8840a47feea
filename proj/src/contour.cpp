#include "nlseg/contour.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "nlseg/errors.hpp"

namespace nlseg {

namespace {

struct Seg {
  long long e0, e1;  // edge keys
  Vec2 p0, p1;
};

double dist(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

bool less_vec(Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); }

}  // namespace

double Polyline::length() const {
  double s = 0;
  for (std::size_t k = 1; k < pts.size(); ++k) s += dist(pts[k - 1], pts[k]);
  if (closed && pts.size() > 1) s += dist(pts.back(), pts.front());
  return s;
}

double InterfaceCurve::length() const {
  double s = 0;
  for (std::size_t k = 1; k < v.size(); ++k) s += dist(v[k - 1].x, v[k].x);
  if (closed && v.size() > 1) s += dist(v.back().x, v.front().x);
  return s;
}

double InterfaceSet::total_length() const {
  double s = 0;
  for (const auto& c : curves) s += c.length();
  return s;
}

std::size_t InterfaceSet::vertex_count() const {
  std::size_t n = 0;
  for (const auto& c : curves) n += c.v.size();
  return n;
}

std::vector<Polyline> marching_squares(const Field& u, const Grid& g, double level, const Mask* keep,
                                       const Mask* touch) {
  if (g.mirrored()) fail(ErrorCode::InvalidArgument, "contouring needs an unfolded grid");
  if (u.size() != g.size()) fail(ErrorCode::InvalidArgument, "field does not match grid");
  const long long nx = g.nx;
  // edge keys: 2*idx for the edge (i,j)-(i+1,j), 2*idx+1 for (i,j)-(i,j+1)
  auto hkey = [&](int i, int j) { return 2 * (static_cast<long long>(j) * nx + i); };
  auto vkey = [&](int i, int j) { return 2 * (static_cast<long long>(j) * nx + i) + 1; };
  auto cross = [&](int i0, int j0, int i1, int j1) {
    double a = u[g.idx(i0, j0)] - level, b = u[g.idx(i1, j1)] - level;
    double t = a / (a - b);
    return Vec2{g.xc(i0) + t * (g.xc(i1) - g.xc(i0)), g.yc(j0) + t * (g.yc(j1) - g.yc(j0))};
  };

  std::vector<Seg> segs;
  for (int j = 0; j + 1 < g.ny; ++j)
    for (int i = 0; i + 1 < g.nx; ++i) {
      const std::size_t c00 = g.idx(i, j), c10 = g.idx(i + 1, j), c11 = g.idx(i + 1, j + 1), c01 = g.idx(i, j + 1);
      if (keep && !((*keep)[c00] && (*keep)[c10] && (*keep)[c11] && (*keep)[c01])) continue;
      if (touch && !((*touch)[c00] || (*touch)[c10] || (*touch)[c11] || (*touch)[c01])) continue;
      int code = (u[c00] > level) | ((u[c10] > level) << 1) | ((u[c11] > level) << 2) | ((u[c01] > level) << 3);
      if (code == 0 || code == 15) continue;
      // edges: 0 bottom, 1 right, 2 top, 3 left
      auto key = [&](int e) {
        switch (e) {
          case 0: return hkey(i, j);
          case 1: return vkey(i + 1, j);
          case 2: return hkey(i, j + 1);
          default: return vkey(i, j);
        }
      };
      auto pt = [&](int e) {
        switch (e) {
          case 0: return cross(i, j, i + 1, j);
          case 1: return cross(i + 1, j, i + 1, j + 1);
          case 2: return cross(i, j + 1, i + 1, j + 1);
          default: return cross(i, j, i, j + 1);
        }
      };
      auto add = [&](int a, int b) { segs.push_back({key(a), key(b), pt(a), pt(b)}); };
      const double centre = 0.25 * (u[c00] + u[c10] + u[c11] + u[c01]);
      switch (code) {
        case 1: case 14: add(3, 0); break;
        case 2: case 13: add(0, 1); break;
        case 3: case 12: add(3, 1); break;
        case 4: case 11: add(1, 2); break;
        case 6: case 9: add(0, 2); break;
        case 7: case 8: add(2, 3); break;
        case 5:
          if (centre > level) { add(3, 2); add(0, 1); } else { add(3, 0); add(1, 2); }
          break;
        case 10:
          if (centre > level) { add(0, 3); add(1, 2); } else { add(0, 1); add(2, 3); }
          break;
      }
    }

  std::map<long long, std::vector<int>> at;
  for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
    at[segs[s].e0].push_back(s);
    at[segs[s].e1].push_back(s);
  }
  std::vector<char> used(segs.size(), 0);
  std::vector<Polyline> out;
  auto other_end = [&](int s, long long e) { return segs[s].e0 == e ? segs[s].e1 : segs[s].e0; };
  auto point_of = [&](int s, long long e) { return segs[s].e0 == e ? segs[s].p0 : segs[s].p1; };
  auto walk = [&](int s, long long from, std::vector<Vec2>& pts) {
    long long e = from;
    while (true) {
      used[s] = 1;
      long long nxt = other_end(s, e);
      pts.push_back(point_of(s, nxt));
      int ns = -1;
      for (int t : at[nxt])
        if (!used[t]) ns = t;
      if (ns < 0) return nxt;
      e = nxt;
      s = ns;
    }
  };
  // open chains start at edges touched by a single segment
  for (auto& [e, list] : at) {
    if (list.size() != 1 || used[list[0]]) continue;
    Polyline pl;
    pl.pts.push_back(point_of(list[0], e));
    walk(list[0], e, pl.pts);
    out.push_back(std::move(pl));
  }
  for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
    if (used[s]) continue;
    Polyline pl;
    pl.pts.push_back(segs[s].p0);
    long long end = walk(s, segs[s].e0, pl.pts);
    pl.closed = end == segs[s].e0;
    if (pl.closed) pl.pts.pop_back();
    out.push_back(std::move(pl));
  }

  for (auto& pl : out) {
    if (pl.pts.size() < 2) continue;
    // orientation: {u > level} on the left of the first segment
    Vec2 a = pl.pts[0], b = pl.pts[1];
    double len = std::max(dist(a, b), 1e-300);
    Vec2 mid{0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
    Vec2 left{-(b.y - a.y) / len, (b.x - a.x) / len};
    double d = 0.25 * g.h;
    double ul = sample_bilinear(u, g, mid.x + d * left.x, mid.y + d * left.y);
    double ur = sample_bilinear(u, g, mid.x - d * left.x, mid.y - d * left.y);
    if (ul < ur) std::reverse(pl.pts.begin(), pl.pts.end());
    if (pl.closed) {
      auto it = std::min_element(pl.pts.begin(), pl.pts.end(), less_vec);
      std::rotate(pl.pts.begin(), it, pl.pts.end());
    }
  }
  std::sort(out.begin(), out.end(), [](const Polyline& p, const Polyline& q) {
    if (p.pts.empty() || q.pts.empty()) return p.pts.size() < q.pts.size();
    return less_vec(p.pts[0], q.pts[0]);
  });
  return out;
}

bool fit_circle(const std::vector<Vec2>& pts, Vec2& centre, double& radius) {
  const std::size_t n = pts.size();
  if (n < 3) return false;
  double mx = 0, my = 0;
  for (auto& p : pts) {
    mx += p.x;
    my += p.y;
  }
  mx /= n;
  my /= n;
  double Mxx = 0, Myy = 0, Mxy = 0, Mxz = 0, Myz = 0, Mzz = 0;
  for (auto& p : pts) {
    double X = p.x - mx, Y = p.y - my, Z = X * X + Y * Y;
    Mxx += X * X;
    Myy += Y * Y;
    Mxy += X * Y;
    Mxz += X * Z;
    Myz += Y * Z;
    Mzz += Z * Z;
  }
  Mxx /= n;
  Myy /= n;
  Mxy /= n;
  Mxz /= n;
  Myz /= n;
  Mzz /= n;
  // Pratt fit via Newton on the characteristic polynomial
  const double Mz = Mxx + Myy, Cov = Mxx * Myy - Mxy * Mxy;
  const double A2 = 4 * Cov - 3 * Mz * Mz - Mzz;
  const double A1 = Mzz * Mz + 4 * Cov * Mz - Mxz * Mxz - Myz * Myz - Mz * Mz * Mz;
  const double A0 = Mxz * Mxz * Myy + Myz * Myz * Mxx - Mzz * Cov - 2 * Mxz * Myz * Mxy + Mz * Mz * Cov;
  double x = 0, y = A0;
  for (int it = 0; it < 50; ++it) {
    double dy = A1 + x * (2 * A2 + 16 * x * x);
    double xn = x - y / dy;
    if (!std::isfinite(xn) || xn == x) break;
    double yn = A0 + xn * (A1 + xn * (A2 + 4 * xn * xn));
    if (std::fabs(yn) >= std::fabs(y)) break;
    x = xn;
    y = yn;
  }
  const double det = x * x - x * Mz + Cov;
  if (!(std::fabs(det) > 1e-30 * (Mz * Mz + 1e-300))) return false;
  double cx = (Mxz * (Myy - x) - Myz * Mxy) / det / 2;
  double cy = (Myz * (Mxx - x) - Mxz * Mxy) / det / 2;
  if (!std::isfinite(cx) || !std::isfinite(cy)) return false;
  centre = {cx + mx, cy + my};
  double r = 0;
  for (auto& p : pts) r += dist(p, centre);
  radius = r / n;
  double extent = std::sqrt(Mz);
  return radius < 1e6 * std::max(extent, 1e-300);
}

double normal_derivative(const Field& u, const Grid& g, Vec2 x, Vec2 n, double h) {
  double s[4];
  for (int k = 0; k < 4; ++k) s[k] = sample_bilinear(u, g, x.x - k * h * n.x, x.y - k * h * n.y);
  // derivative along -n, third order one-sided; the outward derivative is its negative
  return -(-11 * s[0] + 18 * s[1] - 9 * s[2] + 2 * s[3]) / (6 * h);
}

InterfaceSet extract_interface(const Field& u, const Grid& g, const Mask& omega, const Mask& extended, double level,
                               int population, const InterfaceOptions& opt) {
  InterfaceSet out;
  out.population = population;
  out.level = level;
  out.h = g.h;
  const double w = opt.window > 0 ? opt.window : std::max(10 * g.h, 0.1);
  auto lines = marching_squares(u, g, level, &extended, &omega);
  for (auto& pl : lines) {
    if (static_cast<int>(pl.pts.size()) < opt.min_vertices) continue;
    InterfaceCurve c;
    c.closed = pl.closed;
    const int n = static_cast<int>(pl.pts.size());
    // cumulative arc length
    std::vector<double> s(n, 0.0);
    for (int k = 1; k < n; ++k) s[k] = s[k - 1] + dist(pl.pts[k - 1], pl.pts[k]);
    const double L = pl.closed ? s[n - 1] + dist(pl.pts[n - 1], pl.pts[0]) : s[n - 1];
    for (int k = 0; k < n; ++k) {
      InterfaceVertex v;
      v.x = pl.pts[k];
      const double d = 0.5 * g.h;
      double gx = (sample_bilinear(u, g, v.x.x + d, v.x.y) - sample_bilinear(u, g, v.x.x - d, v.x.y)) / (2 * d);
      double gy = (sample_bilinear(u, g, v.x.x, v.x.y + d) - sample_bilinear(u, g, v.x.x, v.x.y - d)) / (2 * d);
      double gn = std::hypot(gx, gy);
      if (gn > 0) v.n = {-gx / gn, -gy / gn};
      std::vector<Vec2> win;
      for (int m = 0; m < n; ++m) {
        double ds = std::fabs(s[m] - s[k]);
        if (pl.closed) ds = std::min(ds, L - ds);
        if (ds <= w) win.push_back(pl.pts[m]);
      }
      Vec2 cen;
      double rad;
      if (gn > 0 && fit_circle(win, cen, rad)) {
        double side = (cen.x - v.x.x) * v.n.x + (cen.y - v.x.y) * v.n.y;
        v.kappa = (side < 0 ? -1.0 : 1.0) / rad;
      }
      if (gn > 0) v.u_nu = normal_derivative(u, g, v.x, v.n, g.h);
      c.v.push_back(v);
    }
    out.curves.push_back(std::move(c));
  }
  if (out.curves.empty()) fail(ErrorCode::DegenerateContour, "no interface curve with enough vertices");
  return out;
}

}  // namespace nlseg
